use super::{c, cabs, cone, cpowi, cr, czero, rmax, zero, C, R};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Complex 2×2 matrix `[[m11, m12], [m21, m22]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m11: C,
    pub m12: C,
    pub m21: C,
    pub m22: C,
}

impl Mat2 {
    pub fn new(m11: C, m12: C, m21: C, m22: C) -> Self {
        Mat2 { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        Mat2::new(cone(), czero(), czero(), cone())
    }

    pub fn zero() -> Self {
        Mat2::new(czero(), czero(), czero(), czero())
    }

    pub fn sigma3() -> Self {
        Mat2::new(cone(), czero(), czero(), -cone())
    }

    pub fn diag(d1: C, d2: C) -> Self {
        Mat2::new(d1, czero(), czero(), d2)
    }

    /// `x^{σ₃}` for a nonzero scalar.
    pub fn pow_sigma3(x: C) -> Self {
        Mat2::diag(x, cone() / x)
    }

    /// `x^{kσ₃}`.
    pub fn pow_sigma3_int(x: C, k: i64) -> Self {
        Mat2::diag(cpowi(x, k), cpowi(x, -k))
    }

    pub fn upper(b: C) -> Self {
        Mat2::new(cone(), b, czero(), cone())
    }

    pub fn lower(cc: C) -> Self {
        Mat2::new(cone(), czero(), cc, cone())
    }

    pub fn det(&self) -> C {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> C {
        self.m11 + self.m22
    }

    pub fn inv(&self) -> Self {
        let d = self.det();
        Mat2::new(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d)
    }

    /// Adjugate; the inverse of a unimodular matrix.
    pub fn adj(&self) -> Self {
        Mat2::new(self.m22, -self.m12, -self.m21, self.m11)
    }

    pub fn scale(&self, s: C) -> Self {
        Mat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn scale_r(&self, s: R) -> Self {
        self.scale(cr(s))
    }

    /// Max-abs-entry norm.
    pub fn norm(&self) -> R {
        rmax(
            rmax(cabs(self.m11), cabs(self.m12)),
            rmax(cabs(self.m21), cabs(self.m22)),
        )
    }

    pub fn col(&self, j: usize) -> (C, C) {
        if j == 0 {
            (self.m11, self.m21)
        } else {
            (self.m12, self.m22)
        }
    }

    pub fn from_cols(a: (C, C), b: (C, C)) -> Self {
        Mat2::new(a.0, b.0, a.1, b.1)
    }

    pub fn entries(&self) -> [C; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Distance from the identity in the max-abs norm.
    pub fn dist_identity(&self) -> R {
        (*self - Mat2::identity()).norm()
    }
}

/// Determinant of two column vectors.
pub fn det_cols(a: (C, C), b: (C, C)) -> C {
    a.0 * b.1 - a.1 * b.0
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.m11, -self.m12, -self.m21, -self.m22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Mul<C> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: C) -> Mat2 {
        self.scale(s)
    }
}

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::zero()
    }
}

/// Matrix with real entries, row major.
pub fn mat_r(m11: R, m12: R, m21: R, m22: R) -> Mat2 {
    Mat2::new(cr(m11), cr(m12), cr(m21), cr(m22))
}

pub fn is_small(m: &Mat2, tol: R) -> bool {
    m.norm() <= tol
}

#[allow(dead_code)]
fn _unused() -> C {
    c(zero(), zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{cf, tol_digits};

    #[test]
    fn inverse_and_det() {
        let a = Mat2::new(cf(1.0, 2.0), cf(-0.5, 0.1), cf(3.0, 0.0), cf(0.25, -1.0));
        let p = a * a.inv();
        assert!(p.dist_identity() < tol_digits(68));
        let b = Mat2::new(cf(0.3, 0.0), cf(1.0, 1.0), cf(-2.0, 0.5), cf(4.0, 0.0));
        let d = (a * b).det() - a.det() * b.det();
        assert!(cabs(d) < tol_digits(66));
    }

    #[test]
    fn sigma3_powers() {
        let x = cf(2.0, -1.0);
        let p = Mat2::pow_sigma3_int(x, 3) * Mat2::pow_sigma3_int(x, -3);
        assert!(p.dist_identity() < tol_digits(68));
    }
}
