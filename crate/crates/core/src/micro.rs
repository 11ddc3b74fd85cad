//! Orthogonal polynomials of the microscopic weight `ξ^α e^{-V_m(ξ)}` on ℝ₊,
//! `V_m(ξ) = ξ^ν + f(ξ)`.
//!
//! Everything is computed on one composite rule (a Gauss–Jacobi panel at the
//! origin for `ξ^α`, then Gauss–Legendre panels whose width follows the decay
//! scale of the weight).  The recurrence comes from the discretized Stieltjes
//! procedure, so the discrete orthogonality is exact to rounding and Cauchy
//! transforms computed on the same rule keep their cancellation structure.

use crate::error::{invalid, Error, Result};
use crate::num::poly::{eval_recurrence, eval_recurrence_c, monic_from_recurrence, Poly};
use crate::num::quad::{gj_left_panel, gl_panel, Rule};
use crate::num::tridiag::eigenvalues;
use crate::num::{
    c, cabs, cr, czero, dec, one, ri, rmax, to_f64, two_pi_i, zero, Mat2, C, DIGITS, R,
};

const PANEL_NODES: usize = 40;

#[derive(Clone, Debug)]
struct Panel {
    lo: R,
    hi: R,
    left: bool,
}

#[derive(Clone, Debug)]
pub struct MicroModel {
    pub alpha: R,
    pub nu: u32,
    pub f: Poly,
    pub kmax: usize,
    /// Recurrence `P_{k+1} = (ξ - ra_k) P_k - rb_k P_{k-1}`.
    pub ra: Vec<R>,
    pub rb: Vec<R>,
    /// `η_ℓ`, `ℓ = 0..=kmax+1`.
    pub norms: Vec<R>,
    /// Monic `P_ℓ`, `ℓ = 0..=kmax+1`.
    pub polys: Vec<Poly>,
    panels: Vec<Panel>,
    rule: Rule,
    /// `ξ^α e^{-V_m}` folded into the weights of `rule`.
    wts: Vec<R>,
    /// `P_ℓ(ξ_i)` times the folded weight, per degree.
    pw: Vec<Vec<R>>,
}

/// Validates `f` and lifts it to working precision.
fn fine_tuning(nu: u32, f: &[f64]) -> Result<Poly> {
    let deg = f.iter().rposition(|&x| x != 0.0).map_or(0, |i| i);
    if f.iter().any(|x| !x.is_finite()) {
        return invalid("non-finite fine-tuning coefficient");
    }
    if !f.is_empty() && deg >= nu as usize && f[deg] != 0.0 {
        return invalid(format!("fine-tuning degree {deg} must be at most nu - 1 = {}", nu - 1));
    }
    Ok(Poly::new(f.iter().map(|&x| dec(x)).collect()))
}

pub fn micro_model(alpha: f64, nu: u32, f: &[f64], kmax: usize) -> Result<MicroModel> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return invalid(format!("alpha must exceed -1, got {alpha}"));
    }
    if nu == 0 {
        return invalid("nu must be positive");
    }
    let f = fine_tuning(nu, f)?;
    micro_model_exact(dec(alpha), nu, f, kmax)
}

pub fn micro_model_exact(alpha: R, nu: u32, f: Poly, kmax: usize) -> Result<MicroModel> {
    if f.degree() >= nu as usize && !f.is_zero() {
        return invalid("fine-tuning degree must be at most nu - 1");
    }
    let panels = build_panels(alpha, nu, &f, kmax);
    let mut model = MicroModel {
        alpha,
        nu,
        f,
        kmax,
        ra: Vec::new(),
        rb: Vec::new(),
        norms: Vec::new(),
        polys: Vec::new(),
        panels,
        rule: Rule::new(),
        wts: Vec::new(),
        pw: Vec::new(),
    };
    model.rule = panels_rule(&model.panels, alpha);
    model.wts = model
        .rule
        .x
        .iter()
        .zip(&model.rule.w)
        .map(|(&x, &w)| w * (-model.vm(x)).exp())
        .collect();
    model.stieltjes()?;
    Ok(model)
}

fn panels_rule(panels: &[Panel], alpha: R) -> Rule {
    let mut rule = Rule::new();
    for p in panels {
        if p.left {
            rule.append(gj_left_panel(p.hi, alpha, PANEL_NODES));
        } else {
            let mut g = gl_panel(p.lo, p.hi, PANEL_NODES);
            for (w, &x) in g.w.iter_mut().zip(&g.x) {
                *w *= (alpha * x.ln()).exp();
            }
            rule.append(g);
        }
    }
    rule
}

fn build_panels(alpha: R, nu: u32, f: &Poly, kmax: usize) -> Vec<Panel> {
    let vm = |x: R| x.powi(nu as i32) + f.eval(x);
    let dvm = |x: R| ri(nu as i64) * x.powi(nu as i32 - 1) + f.derivative().eval(x);
    // tail cutoff: integrand with up to ξ^(4 kmax + 16) below 10^-(DIGITS+8)
    let powk = alpha + ri(4 * kmax as i64 + 16);
    let target = -ri(DIGITS as i64 + 8) * ri(10).ln();
    let mut l = ri(2);
    loop {
        let lv = -vm(l) + powk * l.ln();
        if lv < target && dvm(l) > zero() {
            break;
        }
        l *= crate::num::r(1.1);
    }
    let mut panels = vec![Panel { lo: zero(), hi: one(), left: true }];
    let mut x = one();
    while x < l {
        let scale = rmax(dvm(x).abs(), crate::num::r(1e-3));
        let w = {
            let geo = x;
            let dec_w = ri(6) / scale;
            if geo < dec_w { geo } else { dec_w }
        };
        let hi = if x + w > l { l } else { x + w };
        panels.push(Panel { lo: x, hi, left: false });
        x = hi;
    }
    panels
}

impl MicroModel {
    /// `V_m(ξ) = ξ^ν + f(ξ)`.
    pub fn vm(&self, x: R) -> R {
        x.powi(self.nu as i32) + self.f.eval(x)
    }

    pub fn vm_c(&self, z: C) -> C {
        crate::num::cpowi(z, self.nu as i64) + self.f.eval_c(z)
    }

    /// Weight `ξ^α e^{-V_m(ξ)}` for `ξ > 0`.
    pub fn weight(&self, x: R) -> R {
        if x <= zero() {
            return zero();
        }
        (self.alpha * x.ln() - self.vm(x)).exp()
    }

    /// Nodes and weights (weight function folded in).
    pub fn nodes(&self) -> (&[R], &[R]) {
        (&self.rule.x, &self.wts)
    }

    fn stieltjes(&mut self) -> Result<()> {
        let n = self.kmax + 2;
        let x = &self.rule.x;
        let w = &self.wts;
        let mut p_prev = vec![zero(); x.len()];
        let mut p = vec![one(); x.len()];
        let mut norm_prev = one();
        for k in 0..n {
            let mut nk = zero();
            let mut xk = zero();
            for i in 0..x.len() {
                let v = w[i] * p[i] * p[i];
                nk += v;
                xk += v * x[i];
            }
            if !(nk > zero()) || !nk.is_finite() {
                return Err(Error::Numerical(format!(
                    "microscopic norm eta_{k} not positive; increase precision"
                )));
            }
            let ak = xk / nk;
            let bk = if k == 0 { zero() } else { nk / norm_prev };
            self.ra.push(ak);
            self.rb.push(bk);
            self.norms.push(nk);
            self.pw.push((0..x.len()).map(|i| w[i] * p[i]).collect());
            if k + 1 < n {
                let next: Vec<R> = (0..x.len())
                    .map(|i| (x[i] - ak) * p[i] - bk * p_prev[i])
                    .collect();
                p_prev = std::mem::replace(&mut p, next);
            }
            norm_prev = nk;
        }
        self.polys = monic_from_recurrence(&self.ra, &self.rb, n - 1);
        Ok(())
    }

    pub fn eta(&self, l: usize) -> R {
        self.norms[l]
    }

    /// Coefficient of `ζ^{K-1}` in the monic `P_K` (0 for `K = 0`).
    pub fn a_k(&self, k: usize) -> R {
        if k == 0 {
            zero()
        } else {
            self.polys[k].coeff(k - 1)
        }
    }

    pub fn p(&self, l: usize) -> &Poly {
        &self.polys[l]
    }

    pub fn p_eval(&self, l: usize, z: C) -> C {
        eval_recurrence_c(&self.ra, &self.rb, l, z)[l]
    }

    pub fn p_eval_real(&self, l: usize, x: R) -> R {
        eval_recurrence(&self.ra, &self.rb, l, x)[l]
    }

    /// Moment `∫ P_ℓ ξ^k w dξ`.
    pub fn moment(&self, l: usize, k: usize) -> R {
        let x = &self.rule.x;
        let pw = &self.pw[l];
        let mut s = zero();
        for i in 0..x.len() {
            s += pw[i] * x[i].powi(k as i32);
        }
        s
    }

    /// All `K` zeros of `P_K`, ascending.
    pub fn zeros(&self, k: usize) -> Result<Vec<R>> {
        if k > self.kmax + 1 {
            return invalid(format!("K = {k} exceeds the model's Kmax"));
        }
        Ok(eigenvalues(&self.ra, &self.rb, k))
    }

    /// `(1/2πi) ∫ P_ℓ(ξ) ξ^α e^{-V_m(ξ)} / (ξ - ζ) dξ` for `ζ ∉ [0, ∞)`.
    pub fn cauchy(&self, l: usize, zeta: C) -> Result<C> {
        if zeta.im.eq_zero() && zeta.re >= zero() {
            return invalid("micro_cauchy: zeta on the positive real axis; use cauchy_boundary");
        }
        let mut s = czero();
        for (pi_, p) in self.panels.iter().enumerate() {
            s += self.panel_cauchy(pi_, p, l, zeta, 0);
        }
        Ok(s / two_pi_i())
    }

    fn panel_cauchy(&self, idx: usize, p: &Panel, l: usize, zeta: C, depth: usize) -> C {
        let width = p.hi - p.lo;
        let dist = dist_to_segment(zeta, p.lo, p.hi);
        if depth < 80 && dist < width.mul2() {
            let mid = (p.lo + p.hi).div2();
            if p.left {
                let a = Panel { lo: zero(), hi: mid, left: true };
                let b = Panel { lo: mid, hi: p.hi, left: false };
                return self.panel_cauchy(usize::MAX, &a, l, zeta, depth + 1)
                    + self.panel_cauchy(usize::MAX, &b, l, zeta, depth + 1);
            }
            let a = Panel { lo: p.lo, hi: mid, left: false };
            let b = Panel { lo: mid, hi: p.hi, left: false };
            return self.panel_cauchy(usize::MAX, &a, l, zeta, depth + 1)
                + self.panel_cauchy(usize::MAX, &b, l, zeta, depth + 1);
        }
        let mut s = czero();
        if idx != usize::MAX {
            let off = idx * PANEL_NODES;
            let pw = &self.pw[l];
            for i in off..off + PANEL_NODES {
                let dx = self.rule.x[i] - zeta.re;
                let den = dx * dx + zeta.im * zeta.im;
                let f = pw[i] / den;
                s += c(f * dx, f * zeta.im);
            }
            return s;
        }
        let rl = if p.left {
            gj_left_panel(p.hi, self.alpha, PANEL_NODES)
        } else {
            gl_panel(p.lo, p.hi, PANEL_NODES)
        };
        for (&x, &w) in rl.x.iter().zip(&rl.w) {
            let v = w * (-self.vm(x)).exp() * self.p_eval_real(l, x);
            let v = if p.left { v } else { v * (self.alpha * x.ln()).exp() };
            s += cr(v) / (cr(x) - zeta);
        }
        s
    }

    /// One-sided boundary value of the Cauchy transform at `ξ0 > 0`,
    /// from above (`upper`) or below.
    pub fn cauchy_boundary(&self, l: usize, xi0: R, upper: bool) -> Result<C> {
        if !(xi0 > zero()) {
            return invalid("cauchy_boundary: need xi0 > 0");
        }
        let full = |x: R| self.weight(x) * self.p_eval_real(l, x);
        let f0 = full(xi0);
        let h0 = if xi0.div2() < one() { xi0.div2() } else { one() };
        let l_end = self.panels.last().map(|p| p.hi).unwrap_or_else(one);
        let l_end = if l_end > xi0.mul2() { l_end } else { xi0.mul2() + ri(40) };
        let mut pv = zero();
        let left = gj_left_panel(h0, self.alpha, PANEL_NODES);
        for (&x, &w) in left.x.iter().zip(&left.w) {
            pv += w * (-self.vm(x)).exp() * self.p_eval_real(l, x) / (x - xi0);
        }
        // geometric panels on [h0, xi0] and [xi0, l_end], refined towards xi0
        let mut segs = Vec::new();
        let mut lo = h0;
        while xi0 - lo > R::EPSILON {
            let hi = xi0 - (xi0 - lo).div2();
            let hi = if (xi0 - lo) < ri(1) / ri(1000) { xi0 } else { hi };
            segs.push((lo, hi));
            lo = hi;
        }
        let mut hi = l_end;
        let mut right = Vec::new();
        while hi - xi0 > R::EPSILON {
            let lo2 = xi0 + (hi - xi0).div2();
            let lo2 = if (hi - xi0) < ri(1) / ri(1000) { xi0 } else { lo2 };
            right.push((lo2, hi));
            hi = lo2;
        }
        segs.extend(right);
        for (p, q) in segs {
            let rl = gl_panel(p, q, PANEL_NODES);
            for (&x, &w) in rl.x.iter().zip(&rl.w) {
                pv += w * (full(x) - f0) / (x - xi0);
            }
        }
        pv += f0 * ((l_end - xi0) / (xi0 - h0)).ln();
        let half = f0.div2();
        let jump = if upper { half } else { -half };
        Ok(cr(pv) / two_pi_i() + cr(jump))
    }

    /// Coefficients `Y_j` (`j = 0..=jmax`) of the large-`ζ` expansion
    /// `Y(ζ) ζ^{-Kσ₃} = 1 + Σ Y_j ζ^{-j}` of the microscopic OP matrix.
    pub fn y_series(&self, k: usize, jmax: usize) -> Vec<Mat2> {
        let mut out = Vec::with_capacity(jmax + 1);
        out.push(Mat2::identity());
        let tpi = two_pi_i();
        for j in 1..=jmax {
            let m11 = if j <= k { cr(self.polys[k].coeff(k - j)) } else { czero() };
            let m12 = -cr(self.moment(k, k + j - 1)) / tpi;
            let (m21, m22) = if k == 0 {
                (czero(), czero())
            } else {
                let e = self.norms[k - 1];
                let m21 = if j <= k {
                    -tpi * cr(self.polys[k - 1].coeff(k - j) / e)
                } else {
                    czero()
                };
                (m21, cr(self.moment(k - 1, k - 1 + j) / e))
            };
            out.push(Mat2::new(m11, m12, m21, m22));
        }
        out
    }

    /// The microscopic OP matrix `Y(ζ)` of size `K`.
    pub fn y_matrix(&self, k: usize, zeta: C) -> Result<Mat2> {
        let pk = self.p_eval(k, zeta);
        let ck = self.cauchy(k, zeta)?;
        if k == 0 {
            return Ok(Mat2::new(pk, ck, czero(), cr(one())));
        }
        let e = self.norms[k - 1];
        let f = -two_pi_i() / e;
        Ok(Mat2::new(pk, ck, f * self.p_eval(k - 1, zeta), f * self.cauchy(k - 1, zeta)?))
    }

    pub fn summary(&self) -> MicroSummary {
        MicroSummary {
            alpha: to_f64(self.alpha),
            nu: self.nu,
            f: self.f.coef.iter().map(|&x| to_f64(x)).collect(),
            kmax: self.kmax,
            log_norms: self.norms.iter().map(|&x| to_f64(x.ln())).collect(),
            subleading: (0..=self.kmax).map(|k| to_f64(self.a_k(k))).collect(),
            nodes: self.rule.len(),
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct MicroSummary {
    pub alpha: f64,
    pub nu: u32,
    pub f: Vec<f64>,
    pub kmax: usize,
    pub log_norms: Vec<f64>,
    pub subleading: Vec<f64>,
    pub nodes: usize,
}

fn dist_to_segment(z: C, lo: R, hi: R) -> R {
    let x = if z.re < lo {
        lo
    } else if z.re > hi {
        hi
    } else {
        z.re
    };
    cabs(z - cr(x))
}

/// Monic Laguerre polynomial coefficients (ascending), parameter `α`.
pub fn laguerre_monic(k: usize, alpha: R) -> Vec<R> {
    let mut out = vec![zero(); k + 1];
    for j in 0..=k {
        // (-1)^{K+j} K!/j! Π_{i=j+1}^{K}(α+i)/(K-j)!  ... as a ratio of products
        let mut v = one();
        for i in (j + 1)..=k {
            v *= (alpha + ri(i as i64)) * ri(i as i64);
        }
        for i in 1..=(k - j) {
            v /= ri(i as i64);
        }
        if (k + j) % 2 == 1 {
            v = -v;
        }
        out[j] = v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::quad::exp_sinh;
    use crate::num::special::gamma;
    use crate::num::{cf, rs, tol_digits};

    fn laguerre(alpha: f64) -> MicroModel {
        micro_model(alpha, 1, &[], 9).unwrap()
    }

    #[test]
    fn first_laguerre_values() {
        let m = laguerre(0.5);
        assert!((m.eta(0) - crate::num::pi().sqrt().div2()).abs() < tol_digits(60));
        assert!((m.p(1).coeff(0) + rs("1.5")).abs() < tol_digits(60));
        assert_eq!(m.p(3).coeff(3), one());
        let z1 = m.zeros(1).unwrap();
        assert!((z1[0] - rs("1.5")).abs() < tol_digits(60));
        assert!(m.zeros(0).unwrap().is_empty());
        let z2 = m.zeros(2).unwrap();
        let disc = (ri(25) - ri(15)).sqrt();
        assert!((z2[0] - (ri(5) - disc).div2()).abs() < tol_digits(58));
        assert!((z2[1] - (ri(5) + disc).div2()).abs() < tol_digits(58));
    }

    #[test]
    fn laguerre_oracle_coefficients() {
        for alpha in [0.0, 0.5, 1.3] {
            let m = laguerre(alpha);
            for k in 0..=8 {
                let exact = laguerre_monic(k, dec(alpha));
                for j in 0..=k {
                    let got = m.p(k).coeff(j);
                    let rel = (got - exact[j]).abs() / exact[j].abs();
                    assert!(rel < tol_digits(50), "alpha {alpha} k {k} j {j}");
                }
                let eta = gamma(ri(k as i64 + 1)) * gamma(ri(k as i64 + 1) + dec(alpha));
                assert!(((m.eta(k) - eta) / eta).abs() < tol_digits(50));
            }
        }
    }

    #[test]
    fn independent_orthogonality_check() {
        let m = micro_model(0.5, 2, &[0.3, -0.7], 4).unwrap();
        let w = |x: R| m.weight(x);
        for i in 0..4 {
            for j in 0..=i {
                let v = exp_sinh(|x, _| w(x) * m.p_eval_real(i, x) * m.p_eval_real(j, x), zero(), tol_digits(50));
                if i == j {
                    assert!(((v - m.eta(i)) / m.eta(i)).abs() < tol_digits(40));
                } else {
                    assert!(v.abs() < tol_digits(40) * (m.eta(i) * m.eta(j)).sqrt());
                }
            }
        }
    }

    #[test]
    fn zeros_interlace() {
        let m = micro_model(1.3, 3, &[0.0, 0.5, -0.2], 7).unwrap();
        for k in 1..7 {
            let a = m.zeros(k).unwrap();
            let b = m.zeros(k + 1).unwrap();
            assert!(a.iter().all(|&x| x > zero()));
            for i in 0..k {
                assert!(b[i] < a[i] && a[i] < b[i + 1]);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(micro_model(-1.0, 1, &[], 2).is_err());
        assert!(micro_model(0.5, 2, &[0.0, 0.0, 1.0], 2).is_err());
        let m = laguerre(0.5);
        assert!(m.cauchy(0, cf(2.0, 0.0)).is_err());
    }

    #[test]
    fn cauchy_transform_values() {
        let m = laguerre(0.5);
        let z = cf(-1.0, 0.0);
        let v = m.cauchy(0, z).unwrap();
        let direct = exp_sinh(|x, _| m.weight(x) / (x + one()), zero(), tol_digits(50));
        assert!(cabs(v - cr(direct) / two_pi_i()) < tol_digits(45));
        // large ζ
        for l in 0..3 {
            let z = c(zero(), rs("1e6"));
            let v = m.cauchy(l, z).unwrap();
            let lead = -cr(m.eta(l)) / (two_pi_i() * crate::num::cpowi(z, l as i64 + 1));
            assert!(crate::num::crel(v, lead) < rs("1e-4"));
        }
        // Plemelj at ξ = 2
        let up = m.cauchy_boundary(1, ri(2), true).unwrap();
        let dn = m.cauchy_boundary(1, ri(2), false).unwrap();
        let jump = m.weight(ri(2)) * m.p_eval_real(1, ri(2));
        assert!(cabs(up - dn - cr(jump)) < tol_digits(60));
        let near = m.cauchy(1, c(ri(2), rs("1e-12"))).unwrap();
        assert!(cabs(near - up) < rs("1e-10"));
    }

    #[test]
    fn series_matches_direct() {
        let m = laguerre(0.5);
        let k = 2;
        let ys = m.y_series(k, 30);
        let z = c(ri(30), ri(40));
        let mut s = Mat2::zero();
        for (j, y) in ys.iter().enumerate() {
            s += y.scale(crate::num::cpowi(z, -(j as i64)));
        }
        let direct = m.y_matrix(k, z).unwrap() * Mat2::pow_sigma3_int(z, -(k as i64));
        assert!((s - direct).norm() < rs("1e-12"));
        assert!(cabs(direct.det() - cr(one())) < tol_digits(55));
    }
}
