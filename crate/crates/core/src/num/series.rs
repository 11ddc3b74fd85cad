//! Laurent and Taylor coefficients of matrix-valued functions by trapezoid
//! averaging on a circle.

use super::{c, cr, pi, ri, rmax, ten_pow, zero, Mat2, C, DIGITS, R};
use crate::error::{Error, Result};

/// Sample points `ρ e^{2πik/n}`.
fn circle_point(rho: R, k: usize, n: usize) -> C {
    let th = pi().mul2() * ri(k as i64) / ri(n as i64);
    let (s, co) = th.sin_cos();
    c(rho * co, rho * s)
}

/// Coefficients `c_j`, `j ∈ [lo, hi]`, of `f(z) = Σ c_j z^j` from `n`
/// equispaced samples on `|z| = ρ`.
pub fn coefficients_from_samples(vals: &[Mat2], rho: R, lo: i64, hi: i64) -> Vec<Mat2> {
    let n = vals.len();
    let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    let unit: Vec<C> = (0..n).map(|k| circle_point(R::ONE, k, n)).collect();
    for j in lo..=hi {
        let mut acc = Mat2::zero();
        for (k, v) in vals.iter().enumerate() {
            // ω^{-jk}
            let idx = ((-(j as i128) * k as i128).rem_euclid(n as i128)) as usize;
            acc += *v * unit[idx];
        }
        let scale = rho.powi(-(j as i32)) / ri(n as i64);
        out.push(acc.scale(cr(scale)));
    }
    out
}

/// Samples `f` at `n` points of the circle `|z| = ρ`.
pub fn sample_circle<F: Fn(C) -> Result<Mat2>>(f: &F, rho: R, n: usize) -> Result<Vec<Mat2>> {
    (0..n).map(|k| f(circle_point(rho, k, n))).collect()
}

/// Taylor coefficients `c_0 .. c_jmax` of an analytic matrix function,
/// doubling the node count until two successive estimates agree to
/// `10^{-(DIGITS-10)}` relative to `max |f|` on the circle.
pub fn taylor_matrix<F: Fn(C) -> Result<Mat2>>(f: F, rho: R, jmax: usize) -> Result<(Vec<Mat2>, usize)> {
    let mut n = (4 * (jmax + 2)).next_power_of_two().max(64);
    let mut vals = sample_circle(&f, rho, n)?;
    let mut prev = coefficients_from_samples(&vals, rho, 0, jmax as i64);
    let tol = ten_pow(-(DIGITS as i32 - 10));
    while n <= 2048 {
        let mut next = Vec::with_capacity(2 * n);
        for (k, v) in vals.iter().enumerate() {
            next.push(*v);
            next.push(f(circle_point(rho, 2 * k + 1, 2 * n))?);
        }
        n *= 2;
        vals = next;
        let cur = coefficients_from_samples(&vals, rho, 0, jmax as i64);
        let fmax = vals.iter().fold(zero(), |m, v| rmax(m, v.norm()));
        let diff = cur
            .iter()
            .zip(&prev)
            .enumerate()
            .fold(zero(), |m, (j, (a, b))| rmax(m, (*a - *b).norm() * rho.powi(j as i32)));
        if diff <= tol * fmax {
            return Ok((cur, n));
        }
        prev = cur;
    }
    Err(Error::Numerical("Taylor coefficients did not settle on the circle".into()))
}

/// Largest `|c_{-j}| ρ^{-j}` for `j = 1..=jmax`, relative to `max |f|`.
pub fn principal_part_size<F: Fn(C) -> Result<Mat2>>(f: F, rho: R, jmax: usize, n: usize) -> Result<R> {
    let vals = sample_circle(&f, rho, n)?;
    let fmax = vals.iter().fold(zero(), |m, v| rmax(m, v.norm()));
    let neg = coefficients_from_samples(&vals, rho, -(jmax as i64), -1);
    let worst = neg
        .iter()
        .enumerate()
        .fold(zero(), |m, (i, a)| rmax(m, a.norm() * rho.powi(i as i32 - jmax as i32)));
    Ok(worst / fmax)
}
