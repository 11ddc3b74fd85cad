//! Eigenvalues of symmetric tridiagonal (Jacobi) matrices given by monic
//! recurrence coefficients: diagonal `alpha[k]`, squared off-diagonal `beta[k]`
//! for `k >= 1`.

use super::{one, r, rmax, zero, R};

/// Number of eigenvalues strictly below `x` (Sturm count via LDLᵀ pivots).
pub fn sturm_count(alpha: &[R], beta: &[R], n: usize, x: R) -> usize {
    let tiny = R::MIN_POSITIVE * r(1e30);
    let mut cnt = 0;
    let mut q = alpha[0] - x;
    if q.eq_zero() {
        q = -tiny;
    }
    if q < zero() {
        cnt += 1;
    }
    for k in 1..n {
        q = alpha[k] - x - beta[k] / q;
        if q.eq_zero() {
            q = -tiny;
        }
        if q < zero() {
            cnt += 1;
        }
    }
    cnt
}

/// Monic characteristic polynomial `p_n(x)` and its derivative.
pub fn char_poly(alpha: &[R], beta: &[R], n: usize, x: R) -> (R, R) {
    let (mut p0, mut p1) = (zero(), one());
    let (mut d0, mut d1) = (zero(), zero());
    for k in 0..n {
        let b = if k == 0 { zero() } else { beta[k] };
        let p2 = (x - alpha[k]) * p1 - b * p0;
        let d2 = p1 + (x - alpha[k]) * d1 - b * d0;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

fn gershgorin(alpha: &[R], beta: &[R], n: usize) -> (R, R) {
    let off: Vec<R> = (0..=n).map(|k| if k >= 1 && k < n { beta[k].sqrt() } else { zero() }).collect();
    let mut lo = alpha[0];
    let mut hi = alpha[0];
    for k in 0..n {
        let rad = off[k] + off[k + 1];
        if alpha[k] - rad < lo {
            lo = alpha[k] - rad;
        }
        if alpha[k] + rad > hi {
            hi = alpha[k] + rad;
        }
    }
    let pad = rmax(hi - lo, one()) * r(1e-6);
    (lo - pad, hi + pad)
}

/// All eigenvalues, ascending.  Bisection to about 1e-13 relative accuracy,
/// then Newton on the characteristic polynomial to full precision.
pub fn eigenvalues(alpha: &[R], beta: &[R], n: usize) -> Vec<R> {
    if n == 0 {
        return Vec::new();
    }
    let (glo, ghi) = gershgorin(alpha, beta, n);
    let scale = rmax(glo.abs(), ghi.abs());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut lo = if let Some(&prev) = out.last() { prev } else { glo };
        let mut hi = ghi;
        let tol = scale * r(1e-14);
        while hi - lo > tol {
            let mid = (lo + hi).div2();
            if sturm_count(alpha, beta, n, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(polish(alpha, beta, n, lo, hi));
    }
    out
}

fn polish(alpha: &[R], beta: &[R], n: usize, lo: R, hi: R) -> R {
    let mut x = (lo + hi).div2();
    let eps = R::EPSILON.mul2();
    for _ in 0..12 {
        let (p, d) = char_poly(alpha, beta, n, x);
        if d.eq_zero() {
            break;
        }
        let step = p / d;
        let nx = x - step;
        if nx < lo || nx > hi {
            break;
        }
        x = nx;
        if step.abs() <= eps * rmax(x.abs(), R::MIN_POSITIVE) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{ri, rs, tol_digits};

    #[test]
    fn laguerre_two_by_two() {
        // monic Laguerre, alpha=1/2: diag 2k+3/2, beta_k = k(k+1/2)
        let h = rs("0.5");
        let a = vec![ri(1) + h, ri(3) + h];
        let b = vec![zero(), ri(1) + h];
        let ev = eigenvalues(&a, &b, 2);
        let disc = (ri(25) - ri(15)).sqrt();
        let exact = [(ri(5) - disc).div2(), (ri(5) + disc).div2()];
        for i in 0..2 {
            assert!((ev[i] - exact[i]).abs() < tol_digits(68));
        }
        assert_eq!(sturm_count(&a, &b, 2, ri(1)), 1);
    }
}
