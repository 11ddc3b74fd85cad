//! All-order improvement of the hard-edge matching: nilpotent factorization
//! of `z̃^{Kσ₃} R_K z̃^{-Kσ₃}` and the chain of left rational factors that
//! keeps `Ψ_κ R_κ` analytic at the outpost.
//!
//! Conventions.  With `w = 1/z̃`, the series `S(w) = 1 + Σ Y_j w^j` is peeled
//! from the right,
//!
//! `S = S_p (1 + M̃_p w^p)(1 + M_p w^p) ⋯ (1 + M̃_1 w)(1 + M_1 w)`,
//! `S_p = 1 + O(w^{p+1})`,
//!
//! so that the improved local parametrix
//! `R = z̃^{-Kσ₃} (1 - M_1 w)(1 - M̃_1 w) ⋯ (1 - M_p w^p)(1 - M̃_p w^p) z̃^{Kσ₃} R_K`
//! is `1 + O(w^{p+1})`.

use crate::error::{invalid, Error, Result};
use crate::num::linalg::{cmat_zero, solve_right, CMat};
use crate::num::series::{principal_part_size, taylor_matrix};
use crate::num::{c, cabs, cexp, cone, cpowi, cr, czero, pi, ri, rmax, ten_pow, to_f64, zero, Mat2, C, DIGITS, R};
use crate::parametrix::ParametrixSet;

pub const MAX_DEPTH: usize = 6;

fn tol() -> R {
    ten_pow(-(DIGITS as i32 - 10))
}

/// Truncated series `1 + Σ_{j≥1} c_j w^j`; `coeffs[0]` is the constant term.
#[derive(Clone, Debug)]
pub struct MatrixSeries {
    pub coeffs: Vec<Mat2>,
}

impl MatrixSeries {
    pub fn identity(order: usize) -> Self {
        let mut coeffs = vec![Mat2::zero(); order + 1];
        coeffs[0] = Mat2::identity();
        MatrixSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Product truncated at the order of `self`.
    pub fn mul(&self, o: &MatrixSeries) -> MatrixSeries {
        let n = self.order();
        let mut out = vec![Mat2::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j <= n {
                    out[i + j] += *a * *b;
                }
            }
        }
        MatrixSeries { coeffs: out }
    }

    /// `1 + m w^j` at the order of `self`.
    pub fn monomial(&self, m: Mat2, j: usize) -> MatrixSeries {
        let mut s = MatrixSeries::identity(self.order());
        if j <= self.order() {
            s.coeffs[j] = m;
        }
        s
    }

    pub fn eval(&self, w: C) -> Mat2 {
        let mut acc = Mat2::zero();
        for m in self.coeffs.iter().rev() {
            acc = acc.scale(w) + *m;
        }
        acc
    }
}

/// `z̃^{Kσ₃} R_K z̃^{-Kσ₃} = 1 + Σ Y_j z̃^{-j}` with `Y_j = W_j (C̃₀N)^{-γj}`.
pub fn local_series(set: &ParametrixSet, order: usize) -> MatrixSeries {
    let ys = set.model.y_series(set.k, order);
    let g = set.g_factor();
    let g2 = cr(g * g);
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut s = R::ONE;
    for (j, y) in ys.iter().enumerate() {
        if j > 0 {
            s /= set.scale;
        }
        let w = Mat2::new(y.m11, y.m12 * g2, y.m21 / g2, y.m22);
        coeffs.push(w.scale_r(s));
    }
    MatrixSeries { coeffs }
}

/// Splits a traceless matrix into two nilpotent ones.
pub fn nilpotent_split(a: &Mat2) -> Result<(Mat2, Mat2)> {
    let nrm = a.norm();
    if nrm.eq_zero() {
        return Ok((Mat2::zero(), Mat2::zero()));
    }
    if cabs(a.trace()) > tol() * nrm {
        return invalid("nilpotent_split: matrix is not traceless");
    }
    let (aa, b, cc) = (a.m11, a.m12, a.m21);
    let small = tol() * nrm;
    if cabs(cc) > small {
        let m = Mat2::new(aa, -aa * aa / cc, cc, -aa);
        let mt = Mat2::new(czero(), b + aa * aa / cc, czero(), czero());
        Ok((m, mt))
    } else if cabs(b) > small {
        let m = Mat2::new(aa, b, -aa * aa / b, -aa);
        let mt = Mat2::new(czero(), czero(), aa * aa / b, czero());
        Ok((m, mt))
    } else {
        let h = aa / ri(2);
        let m = Mat2::new(h, cone(), -h * h, -h);
        Ok((m, *a - m))
    }
}

/// Pairs `(M_j, M̃_j)`, `j = 1..=p`.
#[derive(Clone, Debug)]
pub struct NilpotentFactorization {
    pub pairs: Vec<(Mat2, Mat2)>,
}

impl NilpotentFactorization {
    /// `(1 + M̃_p w^p)(1 + M_p w^p) ⋯ (1 + M̃_1 w)(1 + M_1 w)` at `order`.
    pub fn product(&self, order: usize) -> MatrixSeries {
        let mut acc = MatrixSeries::identity(order);
        for (j, (m, mt)) in self.pairs.iter().enumerate() {
            let f = acc.monomial(*mt, j + 1).mul(&acc.monomial(*m, j + 1));
            acc = f.mul(&acc);
        }
        acc
    }

    /// `(1 - M_1 w)(1 - M̃_1 w) ⋯ (1 - M_p w^p)(1 - M̃_p w^p)` at `w`.
    pub fn inverse_at(&self, w: C) -> Mat2 {
        let mut acc = Mat2::identity();
        let mut wj = cone();
        for (m, mt) in &self.pairs {
            wj = wj * w;
            acc = acc * (Mat2::identity() - m.scale(wj)) * (Mat2::identity() - mt.scale(wj));
        }
        acc
    }
}

pub fn factorize(series: &MatrixSeries, p: usize) -> Result<NilpotentFactorization> {
    if p < 1 {
        return invalid("factorization depth must be at least 1");
    }
    if p > series.order() {
        return invalid("series too short for the requested depth");
    }
    let mut cur = MatrixSeries { coeffs: series.coeffs[..=p].to_vec() };
    let mut pairs = Vec::with_capacity(p);
    for j in 1..=p {
        let a = cur.coeffs[j];
        let scale = rmax(a.norm(), R::MIN_POSITIVE);
        if cabs(a.trace()) > ten_pow(-(DIGITS as i32 - 20)) * scale {
            return Err(Error::Numerical(format!(
                "order-{j} residue is not traceless (|tr| / |A| = {:e})",
                to_f64(cabs(a.trace()) / scale)
            )));
        }
        let a = a - Mat2::identity().scale(a.trace() / ri(2));
        let (m, mt) = nilpotent_split(&a)?;
        cur = cur.mul(&cur.monomial(-m, j)).mul(&cur.monomial(-mt, j));
        pairs.push((m, mt));
    }
    Ok(NilpotentFactorization { pairs })
}

/// `1 + F_1/z + ⋯ + F_j/z^j`.
#[derive(Clone, Debug)]
pub struct RationalFactor {
    pub poles: Vec<Mat2>,
}

impl RationalFactor {
    pub fn eval(&self, z: C) -> Mat2 {
        let zi = cone() / z;
        let mut acc = Mat2::zero();
        for f in self.poles.iter().rev() {
            acc = (acc + *f).scale(zi);
        }
        acc + Mat2::identity()
    }
}

/// `F_1, F̃_1, F_2, F̃_2, …` in the order they are applied (leftmost last).
#[derive(Clone, Debug)]
pub struct SchlesingerChain {
    pub factors: Vec<RationalFactor>,
}

impl SchlesingerChain {
    /// `F̃_p F_p ⋯ F̃_1 F_1`.
    pub fn eval(&self, z: C) -> Mat2 {
        let mut acc = Mat2::identity();
        for f in &self.factors {
            acc = f.eval(z) * acc;
        }
        acc
    }
}

/// Improved parametrices at depth `p`.
#[derive(Clone, Debug)]
pub struct Improved {
    pub set: ParametrixSet,
    pub p: usize,
    pub factorization: NilpotentFactorization,
    pub chain: SchlesingerChain,
    /// Largest residual of the redundant block equations over all steps.
    pub redundant_residual: R,
}

fn nilpotent_sequence(f: &NilpotentFactorization) -> Vec<(Mat2, usize)> {
    let mut out = Vec::new();
    for (j, (m, mt)) in f.pairs.iter().enumerate() {
        out.push((*m, j + 1));
        out.push((*mt, j + 1));
    }
    out
}

impl Improved {
    /// `𝐀(z)` after the first `steps` nilpotent factors and rational factors.
    fn analytic_part(&self, z: C, steps: usize) -> Result<Mat2> {
        let base = self.set.psi_k_reduced(z)?;
        let w = cone() / self.set.frame.ztilde(z);
        let mut right = Mat2::identity();
        let mut wj_cache = Vec::new();
        for (m, j) in nilpotent_sequence(&self.factorization).into_iter().take(steps) {
            while wj_cache.len() < j {
                wj_cache.push(cpowi(w, wj_cache.len() as i64 + 1));
            }
            right = right * (Mat2::identity() - m.scale(wj_cache[j - 1]));
        }
        let mut left = Mat2::identity();
        for f in self.chain.factors.iter().take(steps) {
            left = f.eval(z) * left;
        }
        Ok(left * base * right)
    }

    pub fn psi(&self, z: C) -> Result<Mat2> {
        Ok(self.chain.eval(z) * self.set.outer.eval(z)?)
    }

    pub fn local_r(&self, zeta: C) -> Result<Mat2> {
        let set = &self.set;
        let zt = zeta / set.scale;
        let k = set.k as i64;
        let mid = self.factorization.inverse_at(cone() / zt);
        let rk = set.r_k(zeta)?;
        Ok(Mat2::pow_sigma3_int(zt, -k) * mid * Mat2::pow_sigma3_int(zt, k) * rk)
    }

    pub fn boundary_residual_n(&self, samples: usize) -> Result<R> {
        let rho = self.set.frame.disk_radius;
        let mut worst = zero();
        for k in 0..samples {
            let th = pi().mul2() * (ri(k as i64) + R::ONE.div2()) / ri(samples as i64);
            let (s, co) = th.sin_cos();
            let z = c(rho * co, rho * s);
            let psi = self.psi(z)?;
            let rr = self.local_r(self.set.frame.zeta(z, self.set.n))?;
            worst = rmax(worst, (psi * rr * psi.inv() - Mat2::identity()).norm());
        }
        Ok(worst)
    }

    pub fn boundary_residual(&self) -> Result<R> {
        self.boundary_residual_n(128)
    }

    /// Principal part at the outpost of `Ψ_κ Ψ_K^{-1} 𝐀_final`, relative.
    pub fn outpost_defect(&self) -> Result<R> {
        let steps = self.chain.factors.len();
        let f = |z: C| self.analytic_part(z, steps);
        principal_part_size(f, self.set.taylor_radius, 2 * self.p + 2, 256)
    }
}

/// Builds the depth-`p` improvement on top of `R_K` (the local parametrix
/// without the first-order `M`, `F` correction).
pub fn improve(set: &ParametrixSet, p: usize) -> Result<Improved> {
    if p < 1 || p > MAX_DEPTH {
        return invalid(format!("depth must lie in 1..={MAX_DEPTH}"));
    }
    if set.model.kmax < set.k {
        return invalid("microscopic model too small");
    }
    let series = local_series(set, p);
    let factorization = factorize(&series, p)?;
    let mut imp = Improved {
        set: set.clone(),
        p,
        factorization,
        chain: SchlesingerChain { factors: Vec::new() },
        redundant_residual: zero(),
    };
    let seq = nilpotent_sequence(&imp.factorization);
    for (step, (m, j)) in seq.iter().enumerate() {
        let (m, j) = (*m, *j);
        let (f, res) = if m.norm().eq_zero() {
            (RationalFactor { poles: vec![Mat2::zero(); j] }, zero())
        } else {
            solve_step(&imp, step, m, j)?
        };
        imp.redundant_residual = rmax(imp.redundant_residual, res);
        imp.chain.factors.push(f);
    }
    Ok(imp)
}

fn put(mat: &mut CMat, bi: usize, bj: usize, m: &Mat2) {
    mat[2 * bi][2 * bj] = m.m11;
    mat[2 * bi][2 * bj + 1] = m.m12;
    mat[2 * bi + 1][2 * bj] = m.m21;
    mat[2 * bi + 1][2 * bj + 1] = m.m22;
}

/// One generic step: `F(z) 𝐀(z) (1 - N/z̃^j) = O(1)`.
fn solve_step(imp: &Improved, step: usize, nmat: Mat2, j: usize) -> Result<(RationalFactor, R)> {
    let rho = imp.set.taylor_radius;
    let frame = imp.set.frame.clone();
    let a_fn = |z: C| imp.analytic_part(z, step);
    let (a, _) = taylor_matrix(a_fn, rho, 2 * j)?;
    let aj_fn = |z: C| -> Result<Mat2> {
        let e = cexp(-frame.eta(z) * ri(j as i64));
        Ok(imp.analytic_part(z, step)?.scale(e))
    };
    let (aj, _) = taylor_matrix(aj_fn, rho, 2 * j)?;
    let ajn: Vec<Mat2> = aj.iter().map(|x| *x * nmat).collect();
    let get = |v: &Vec<Mat2>, k: i64| -> Mat2 {
        if k < 0 || k as usize >= v.len() {
            Mat2::zero()
        } else {
            v[k as usize]
        }
    };
    // unknown row X = (F_1 … F_j); block (i, m) of H is A_{i-m} - (A^{[j]}N)_{i+j-m}
    let mut h = cmat_zero(2 * j, 2 * j);
    let mut rhs = cmat_zero(2, 2 * j);
    for i in 1..=j {
        for m in 1..=j {
            let blk = get(&a, i as i64 - m as i64) - get(&ajn, (i + j) as i64 - m as i64);
            put(&mut h, i - 1, m - 1, &blk);
        }
    }
    for m in 1..=j {
        let r = get(&ajn, j as i64 - m as i64);
        rhs[0][2 * (m - 1)] = r.m11;
        rhs[0][2 * (m - 1) + 1] = r.m12;
        rhs[1][2 * (m - 1)] = r.m21;
        rhs[1][2 * (m - 1) + 1] = r.m22;
    }
    let x = solve_right(&h, &rhs).ok_or_else(|| {
        Error::Degenerate(format!("singular Schlesinger block system at step {} (order {j})", step + 1))
    })?;
    let poles: Vec<Mat2> = (0..j)
        .map(|i| Mat2::new(x[0][2 * i], x[0][2 * i + 1], x[1][2 * i], x[1][2 * i + 1]))
        .collect();
    // redundant orders z^{-m}, m = j+1..2j: Σ_{i ≥ m-j} F_i (A^{[j]}N)_{i+j-m} = 0
    let mut res = zero();
    let scale = rmax(ajn.iter().fold(zero(), |s, v| rmax(s, v.norm())), R::MIN_POSITIVE);
    for m in j + 1..=2 * j {
        let mut acc = Mat2::zero();
        for i in (m - j)..=j {
            acc += poles[i - 1] * get(&ajn, (i + j) as i64 - m as i64);
        }
        res = rmax(res, acc.norm() / scale);
    }
    Ok((RationalFactor { poles }, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{cf, tol_digits};

    #[test]
    fn split_cases() {
        let (m, mt) = nilpotent_split(&Mat2::zero()).unwrap();
        assert!(m.norm().eq_zero() && mt.norm().eq_zero());
        let d = Mat2::sigma3();
        let (m, mt) = nilpotent_split(&d).unwrap();
        assert!(cabs(m.m11 - cf(0.5, 0.0)).eq_zero() && cabs(m.m21 - cf(-0.25, 0.0)).eq_zero());
        assert!(cabs(mt.m12 - cf(-1.0, 0.0)).eq_zero());
        for a in [
            Mat2::new(cf(0.3, 0.1), cf(1.2, -0.4), cf(-0.7, 0.2), cf(-0.3, -0.1)),
            Mat2::new(cf(0.3, 0.1), cf(1.2, -0.4), czero(), cf(-0.3, -0.1)),
        ] {
            let (m, mt) = nilpotent_split(&a).unwrap();
            assert!(((m + mt) - a).norm() < tol_digits(65));
            assert!((m * m).norm() < tol_digits(64));
            assert!((mt * mt).norm() < tol_digits(64));
        }
        assert!(nilpotent_split(&Mat2::identity()).is_err());
    }

    #[test]
    fn nilpotent_inverse_identity() {
        let m = Mat2::new(cf(2.0, 0.0), cf(-4.0, 0.0), cf(1.0, 0.0), cf(-2.0, 0.0));
        let w = cf(0.3, -0.7);
        let p = (Mat2::identity() + m.scale(w)) * (Mat2::identity() - m.scale(w));
        assert!(p.dist_identity() < tol_digits(65));
    }

    #[test]
    fn factorization_reconstructs_series() {
        // a unimodular series: a product of unimodular factors plus a tail
        let order = 5;
        let id = MatrixSeries::identity(order);
        let u1 = Mat2::new(cf(0.2, 0.1), cf(0.5, 0.0), cf(-0.3, 0.2), cf(-0.2, -0.1));
        let (m1, mt1) = nilpotent_split(&u1).unwrap();
        let u3 = Mat2::new(cf(0.1, 0.0), cf(0.0, 0.4), cf(0.9, 0.0), cf(-0.1, 0.0));
        let (m3, mt3) = nilpotent_split(&u3).unwrap();
        let s = id
            .monomial(m1, 1)
            .mul(&id.monomial(mt1, 1))
            .mul(&id.monomial(m3, 3))
            .mul(&id.monomial(mt3, 3))
            .mul(&id.monomial(m1.scale(cf(0.0, 1.0)), 2));
        let f = factorize(&s, 4).unwrap();
        for (m, mt) in &f.pairs {
            assert!((*m * *m).norm() < tol_digits(55));
            assert!((*mt * *mt).norm() < tol_digits(55));
        }
        let prod = f.product(order);
        for j in 0..=4 {
            assert!((prod.coeffs[j] - s.coeffs[j]).norm() < tol_digits(55), "order {j}");
        }
        let w = cf(0.01, 0.02);
        let inv = f.inverse_at(w) * s.eval(w);
        assert!(inv.dist_identity() < crate::num::r(1e-8));
        let ident = factorize(&MatrixSeries::identity(3), 3).unwrap();
        assert!(ident.pairs.iter().all(|(a, b)| a.norm().eq_zero() && b.norm().eq_zero()));
    }
}
