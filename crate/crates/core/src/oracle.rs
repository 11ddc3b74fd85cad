//! Finite-N orthogonal polynomials for the perturbed weight, computed at
//! working precision by a discretized Stieltjes procedure.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::micro::MicroModel;
use crate::num::poly::{eval_recurrence, Poly};
use crate::num::quad::{gj_left_panel, gl_panel, Rule};
use crate::num::tridiag::eigenvalues;
use crate::num::{cr, dec, one, ri, rmax, rmin, to_f64, zero, DIGITS, R};
use crate::spectral::{ConformalFrame, CriticalPotential};

const PANEL_NODES: usize = 40;

/// The sharp window `J = [0, ε)` carrying the perturbation.
#[derive(Clone, Debug)]
pub struct PerturbationWindow {
    pub epsilon: R,
    pub kappa: R,
    pub alpha: R,
    pub f: Poly,
}

impl PerturbationWindow {
    pub fn new(frame: &ConformalFrame, model: &MicroModel, kappa: R) -> Result<Self> {
        if !kappa.is_finite() {
            return invalid("κ must be finite");
        }
        Ok(PerturbationWindow { epsilon: frame.disk_radius, kappa, alpha: model.alpha, f: model.f.clone() })
    }

    pub fn contains(&self, x: R) -> bool {
        x >= zero() && x < self.epsilon
    }

    /// `ln w̃(x)` without the `α ln x` term.
    fn log_weight_reduced(&self, cp: &CriticalPotential, frame: &ConformalFrame, n: R, x: R) -> R {
        let mut lw = -(n / cp.t) * cp.v(x);
        if self.contains(x) {
            let g = frame.gamma();
            let eta = frame.eta(cr(x)).re;
            let zeta = frame.scale(n) * x * eta.exp();
            lw += (self.kappa.mul2() + self.alpha) * g * n.ln() + self.alpha * g * frame.ctilde0.ln()
                + self.alpha * eta
                - self.f.eval(zeta);
        }
        lw
    }

    /// `ln w̃(x)`, `w̃ = x^α e^{-(N/T)V} [N^{(2κ+α)γ} C̃₀^{αγ} e^{αη - f(ζ)}]^{χ_J}`.
    pub fn log_weight(&self, cp: &CriticalPotential, frame: &ConformalFrame, n: R, x: R) -> Result<R> {
        if !(x > zero()) {
            return invalid("the weight is evaluated at x > 0 only");
        }
        Ok(self.alpha * x.ln() + self.log_weight_reduced(cp, frame, n, x))
    }
}

pub fn perturbed_log_weight(
    cp: &CriticalPotential,
    frame: &ConformalFrame,
    model: &MicroModel,
    kappa: R,
    n: R,
    x: R,
) -> Result<R> {
    PerturbationWindow::new(frame, model, kappa)?.log_weight(cp, frame, n, x)
}

/// One finite-N computation.
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub cp: Arc<CriticalPotential>,
    pub frame: Arc<ConformalFrame>,
    pub window: PerturbationWindow,
    pub n_big: u64,
    pub r: i64,
    /// `n = N + r`.
    pub degree: usize,
    pub digits: u32,
    /// Monic recurrence `p_{k+1} = (x - a_k) p_k - b_k p_{k-1}`.
    pub ra: Vec<R>,
    pub rb: Vec<R>,
    /// `ln h_j`, `j = 0..=n`.
    pub ln_h: Vec<R>,
    pub zeros_all: Vec<R>,
    pub zeros_edge: Vec<R>,
    /// `(C̃₀N)^γ z̃(x)` for the zeros in the window.
    pub zeros_edge_rescaled: Vec<R>,
    pub nodes: usize,
    pub refine: usize,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRecord {
    pub n: u64,
    pub r: i64,
    pub degree: usize,
    pub digits: u32,
    pub kappa: f64,
    pub epsilon: f64,
    pub log_norms: Vec<f64>,
    pub zeros_edge_rescaled: Vec<f64>,
    pub edge_zero_count: usize,
    pub smallest_zeros: Vec<f64>,
    pub nodes: usize,
    pub elapsed_ms: f64,
}

fn oracle_rule(cp: &CriticalPotential, window: &PerturbationWindow, n: R, alpha: R, refine: usize) -> Result<Rule> {
    let eps = window.epsilon;
    if !(eps < cp.a) {
        return invalid("the perturbation window must end before a");
    }
    let h = rmin(ri(2) * cp.t / n, crate::num::r(0.1)) / ri(refine as i64);
    // tail: 2(N/T)φ(x) beyond DIGITS + 25 decades
    let target = ri(DIGITS as i64 + 25) * ri(10).ln();
    let mut tail = cp.b + h;
    loop {
        let phi = cp.effective_potential(tail)?;
        if (n / cp.t) * phi.mul2() > target {
            break;
        }
        tail += rmax(h, (tail - cp.b) * crate::num::r(0.25));
    }
    let mut rule = Rule::new();
    let first = rmin(h, eps);
    rule.append(gj_left_panel(first, alpha, PANEL_NODES));
    let mut cuts = vec![first];
    for edge in [eps, cp.a, cp.b, tail] {
        let lo = *cuts.last().unwrap();
        let m = ((edge - lo) / h).ceil();
        let m = to_f64(m).max(1.0) as usize;
        let w = (edge - lo) / ri(m as i64);
        for i in 1..=m {
            cuts.push(if i == m { edge } else { lo + w * ri(i as i64) });
        }
    }
    for pair in cuts.windows(2) {
        let mut g = gl_panel(pair[0], pair[1], PANEL_NODES);
        for (w, &x) in g.w.iter_mut().zip(&g.x) {
            *w *= (alpha * x.ln()).exp();
        }
        rule.append(g);
    }
    Ok(rule)
}

/// Normalized Stieltjes procedure; returns `(a, b, ln h)` or `None` on a
/// loss of positivity.
fn stieltjes(x: &[R], lw: &[R], n: usize) -> Option<(Vec<R>, Vec<R>, Vec<R>)> {
    let top = lw.iter().copied().fold(lw[0], rmax);
    let w: Vec<R> = lw.iter().map(|&l| (l - top).exp()).collect();
    let mu0: R = w.iter().copied().fold(zero(), |s, v| s + v);
    if !(mu0 > zero()) {
        return None;
    }
    let mut ra = Vec::with_capacity(n + 1);
    let mut rb = Vec::with_capacity(n + 1);
    let mut ln_h = Vec::with_capacity(n + 1);
    let q0 = one() / mu0.sqrt();
    let mut q_prev = vec![zero(); x.len()];
    let mut q = vec![q0; x.len()];
    let mut sb_prev = zero();
    let mut lh = mu0.ln() + top;
    for k in 0..=n {
        let ak = (0..x.len()).fold(zero(), |s, i| s + w[i] * x[i] * q[i] * q[i]);
        ra.push(ak);
        rb.push(sb_prev * sb_prev);
        if k > 0 {
            lh += (sb_prev * sb_prev).ln();
        }
        ln_h.push(lh);
        if k == n {
            break;
        }
        let mut next: Vec<R> = (0..x.len()).map(|i| (x[i] - ak) * q[i] - sb_prev * q_prev[i]).collect();
        // one pass of reorthogonalization against q_k
        let c = (0..x.len()).fold(zero(), |s, i| s + w[i] * next[i] * q[i]);
        for i in 0..x.len() {
            next[i] -= c * q[i];
        }
        let nn = (0..x.len()).fold(zero(), |s, i| s + w[i] * next[i] * next[i]);
        if !(nn > zero()) || !nn.is_finite() {
            return None;
        }
        let sb = nn.sqrt();
        for v in next.iter_mut() {
            *v /= sb;
        }
        q_prev = std::mem::replace(&mut q, next);
        sb_prev = sb;
    }
    Some((ra, rb, ln_h))
}

/// Monic `p_0 .. p_n` for the perturbed weight with `n = N + r`.
pub fn finite_n_ops(
    cp: Arc<CriticalPotential>,
    frame: Arc<ConformalFrame>,
    window: PerturbationWindow,
    n_big: u64,
    r: i64,
) -> Result<OracleRun> {
    finite_n_ops_refined(cp, frame, window, n_big, r, 1)
}

pub fn finite_n_ops_refined(
    cp: Arc<CriticalPotential>,
    frame: Arc<ConformalFrame>,
    window: PerturbationWindow,
    n_big: u64,
    r: i64,
    refine: usize,
) -> Result<OracleRun> {
    if n_big < 1 || n_big > 4096 {
        return invalid("the oracle supports 1 ≤ N ≤ 4096");
    }
    if !(-1..=4).contains(&r) || (n_big as i64 + r) < 1 {
        return invalid("r must lie in -1..=4 with N + r ≥ 1");
    }
    if refine == 0 {
        return invalid("refinement factor must be positive");
    }
    let start = Instant::now();
    let degree = (n_big as i64 + r) as usize;
    let nn = ri(n_big as i64);
    let mut attempt = refine;
    let (rule, ra, rb, ln_h) = loop {
        let rule = oracle_rule(&cp, &window, nn, window.alpha, attempt)?;
        let lw: Vec<R> = rule
            .x
            .iter()
            .zip(&rule.w)
            .map(|(&x, &w)| w.ln() + window.log_weight_reduced(&cp, &frame, nn, x))
            .collect();
        match stieltjes(&rule.x, &lw, degree) {
            Some((a, b, h)) => break (rule, a, b, h),
            None if attempt == refine => attempt *= 2,
            None => {
                return Err(Error::Numerical(format!(
                    "Stieltjes lost positivity at N = {n_big} after refinement"
                )))
            }
        }
    };
    let zeros_all = eigenvalues(&ra, &rb, degree);
    if zeros_all.iter().any(|&z| !(z > zero())) {
        return Err(Error::Numerical("oracle produced a non-positive zero".into()));
    }
    let scale = frame.scale(nn);
    let zeros_edge: Vec<R> = zeros_all.iter().copied().filter(|&z| window.contains(z)).collect();
    let zeros_edge_rescaled = zeros_edge.iter().map(|&z| scale * frame.ztilde_real(z)).collect();
    Ok(OracleRun {
        cp,
        frame,
        window,
        n_big,
        r,
        degree,
        digits: DIGITS,
        ra,
        rb,
        ln_h,
        zeros_all,
        zeros_edge,
        zeros_edge_rescaled,
        nodes: rule.len(),
        refine: attempt,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Independent runs over an `N` grid, in parallel; results keep the grid
/// order.
pub fn oracle_sweep(
    cp: &Arc<CriticalPotential>,
    frame: &Arc<ConformalFrame>,
    window: &PerturbationWindow,
    grid: &[u64],
    r: i64,
) -> Vec<Result<OracleRun>> {
    use rayon::prelude::*;
    grid.par_iter().map(|&n| finite_n_ops(cp.clone(), frame.clone(), window.clone(), n, r)).collect()
}

impl OracleRun {
    pub fn edge_zero_count(&self) -> usize {
        self.zeros_edge.len()
    }

    pub fn n(&self) -> R {
        ri(self.n_big as i64)
    }

    /// `(p_n, p_{n-1}, p_n', p_{n-1}')` at `x`.
    fn p_pair(&self, x: R) -> (R, R, R, R) {
        let n = self.degree;
        let v = eval_recurrence(&self.ra, &self.rb, n, x);
        let mut d_prev = zero();
        let mut d = zero();
        for k in 0..n {
            let nd = v[k] + (x - self.ra[k]) * d - self.rb[k] * d_prev;
            d_prev = d;
            d = nd;
        }
        (v[n], v[n - 1], d, d_prev)
    }

    fn x_of_zeta(&self, zeta: R) -> Result<R> {
        let x = self.frame.ztilde_inverse(zeta / self.frame.scale(self.n()))?;
        if !self.window.contains(x) || !(x > zero()) {
            return invalid(format!("ζ = {} maps outside the window at N = {}", to_f64(zeta), self.n_big));
        }
        Ok(x)
    }

    /// `√(w̃(x)w̃(x')) K_n(x, x') √(dx/dζ · dx'/dζ')`, the dressed kernel per
    /// unit `ζ`.
    pub fn dressed_kernel(&self, zeta: R, zetap: R) -> Result<R> {
        if self.degree < 1 {
            return invalid("the kernel needs n ≥ 1");
        }
        if !(zeta > zero() && zetap > zero()) {
            return invalid("ζ, ζ' must be positive");
        }
        let x = self.x_of_zeta(zeta)?;
        let xp = self.x_of_zeta(zetap)?;
        let (pn, pm, dn, dm) = self.p_pair(x);
        let cd = if (x - xp).abs() <= x * crate::num::tol_digits(DIGITS as i32 - 5) {
            dn * pm - dm * pn
        } else {
            let (qn, qm, _, _) = self.p_pair(xp);
            (pn * qm - pm * qn) / (x - xp)
        };
        let (cp, fr) = (&self.cp, &self.frame);
        let nn = self.n();
        let lw = (self.window.log_weight(cp, fr, nn, x)? + self.window.log_weight(cp, fr, nn, xp)?).div2();
        let s = fr.scale(nn);
        let jac = one() / (s * (fr.ztilde_prime(cr(x)).re * fr.ztilde_prime(cr(xp)).re).sqrt());
        Ok(cd * (lw - self.ln_h[self.degree - 1]).exp() * jac)
    }

    pub fn record(&self) -> OracleRecord {
        OracleRecord {
            n: self.n_big,
            r: self.r,
            degree: self.degree,
            digits: self.digits,
            kappa: to_f64(self.window.kappa),
            epsilon: to_f64(self.window.epsilon),
            log_norms: self.ln_h.iter().map(|&v| to_f64(v)).collect(),
            zeros_edge_rescaled: self.zeros_edge_rescaled.iter().map(|&v| to_f64(v)).collect(),
            edge_zero_count: self.edge_zero_count(),
            smallest_zeros: self.zeros_all.iter().take(6).map(|&v| to_f64(v)).collect(),
            nodes: self.nodes,
            elapsed_ms: self.elapsed_ms,
        }
    }
}

/// Distance from each predicted zero to the nearest oracle zero.
pub fn zero_errors(oracle: &[R], predicted: &[f64]) -> Vec<f64> {
    predicted
        .iter()
        .map(|&p| {
            let p = dec(p);
            oracle.iter().map(|&z| to_f64((z - p).abs())).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in `ln error`.
    pub residual: f64,
    pub slope_stderr: f64,
}

/// Least squares of `ln error` against `ln N`.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return invalid("a rate fit needs at least three points");
    }
    if points.iter().any(|&(n, e)| !(n > 0.0) || !(e > 0.0) || !e.is_finite()) {
        return invalid("rate fit needs positive N and positive finite errors");
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("rate fit needs distinct N");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss / m).sqrt(),
        slope_stderr: (ss / (m - 2.0).max(1.0) / sxx).sqrt(),
    })
}
