//! Closed-form predictions near the hard edge: zero locations, the stray
//! zero, Christoffel–Darboux kernels and the transitional certificates.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::micro::MicroModel;
use crate::num::mat2::det_cols;
use crate::num::tridiag::eigenvalues;
use crate::num::{cabs, carg, cone, cpow, cr, czero, one, pi, ri, to_f64, two_pi_i, zero, C, DIGITS, R};
use crate::parametrix::ParametrixSet;
use crate::spectral::{ConformalFrame, CriticalPotential};

#[derive(Clone, Debug, Serialize)]
pub struct StrayZero {
    /// `2πi C̃₀^{2γK} B₁⁽⁰⁾ / (η_{K-1} A₁⁽⁰⁾) N^{2γ|δ|}`.
    pub ab_route: f64,
    /// The same quantity written through `(a, b, t₀, r, α, K, η_{K-1})`.
    pub closed_form: f64,
    pub relative_gap: f64,
    pub growth_exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroPrediction {
    pub kappa: f64,
    pub k: usize,
    pub delta: f64,
    pub n: f64,
    pub anchored_zeros: Vec<f64>,
    pub stray: Option<StrayZero>,
    /// Decay exponent of the anchored-zero error.
    pub convergence_exponent: f64,
    /// Zeros of `P_K - c N^{-2γδ} P_{K-1}` with `c` the limiting mixed
    /// coefficient; interpolates the three regimes at finite `N`.
    pub uniform_zeros: Vec<f64>,
}

fn is_half(delta: R) -> bool {
    (delta.abs() - one().div2()).abs() < crate::num::tol_digits(DIGITS as i32 - 10)
}

/// `D(0)² = D∞² (1 - t₀⁻²)^{2α}`.
pub fn szego_at_zero_sq(cp: &CriticalPotential, alpha: R) -> R {
    let t0 = cp.t0();
    let d_inf_sq = ((cp.a.sqrt() + cp.b.sqrt()).div2()).powf(&alpha.mul2());
    d_inf_sq * (one() - one() / (t0 * t0)).powf(&alpha.mul2())
}

/// `ρ₀ = lim Φ(z)/z = 4t₀²/((b-a)(1-t₀²)²)`.
pub fn rho0(cp: &CriticalPotential) -> R {
    let t0 = cp.t0();
    let w = one() - t0 * t0;
    ri(4) * t0 * t0 / ((cp.b - cp.a) * w * w)
}

fn ct_pow(frame: &ConformalFrame, e: i64) -> R {
    (frame.ctilde0.ln() * frame.gamma() * ri(e)).exp()
}

/// `2πi C̃₀^{2γK} B₁⁽⁰⁾/(η_{K-1} A₁⁽⁰⁾)`, the coefficient of the mixed
/// polynomial and of `ζ_away`.
pub fn mixing_constant(set: &ParametrixSet) -> Result<C> {
    if set.k == 0 {
        return invalid("the mixed coefficient needs K ≥ 1");
    }
    let ab0 = set.ab[0];
    let a1 = ab0.m11;
    let tol = ab0.norm() * crate::num::tol_digits(DIGITS as i32 - 10);
    if cabs(a1) <= tol {
        return Err(Error::Degenerate("A₁⁽⁰⁾ vanishes; the stray zero is undefined".into()));
    }
    let eta = set.model.eta(set.k - 1);
    Ok(two_pi_i() * ab0.m12 * cr(ct_pow(&set.frame, 2 * set.k as i64)) / (a1 * cr(eta)))
}

/// `ζ_away` through the AB coefficients.
pub fn zeta_away_ab(set: &ParametrixSet) -> Result<C> {
    let grow = (set.n.ln() * set.gamma() * set.delta.abs().mul2()).exp();
    Ok(mixing_constant(set)? * cr(grow))
}

/// `ζ_away = -2π C̃₀^{2γK} D(0)² ρ₀^{-2K} N^{2γ|δ|} / (η_{K-1} t₀^{2r+1})`.
pub fn zeta_away_closed(
    cp: &CriticalPotential,
    frame: &ConformalFrame,
    model: &MicroModel,
    k: usize,
    r: i64,
    delta: R,
    n: R,
) -> Result<R> {
    if k == 0 {
        return invalid("ζ_away needs K ≥ 1");
    }
    let t0 = cp.t0();
    let grow = (n.ln() * frame.gamma() * delta.abs().mul2()).exp();
    let num = -pi().mul2() * ct_pow(frame, 2 * k as i64) * szego_at_zero_sq(cp, model.alpha);
    let den = model.eta(k - 1) * t0.powi(2 * r as i32 + 1) * rho0(cp).powi(2 * k as i32);
    Ok(num / den * grow)
}

/// Zeros of `P_K - c P_{K-1}` from the Jacobi matrix with a shifted last
/// diagonal entry.
pub fn mixed_zeros(model: &MicroModel, k: usize, cshift: R) -> Vec<R> {
    if k == 0 {
        return Vec::new();
    }
    let mut ra = model.ra[..k].to_vec();
    ra[k - 1] += cshift;
    eigenvalues(&ra, &model.rb, k)
}

pub fn predicted_zeros(set: &ParametrixSet) -> Result<ZeroPrediction> {
    let gamma = set.gamma();
    let k = set.k;
    let model = &set.model;
    let base = ZeroPrediction {
        kappa: to_f64(set.kappa),
        k,
        delta: to_f64(set.delta),
        n: to_f64(set.n),
        anchored_zeros: Vec::new(),
        stray: None,
        convergence_exponent: to_f64(gamma * set.delta.abs().mul2()),
        uniform_zeros: Vec::new(),
    };
    if set.kappa <= zero() || k == 0 {
        return Ok(ZeroPrediction { convergence_exponent: 0.0, ..base });
    }
    let c_lim = zeta_away_closed(&set.cp, &set.frame, model, k, set.outer.r, zero(), one())?;
    let shift = c_lim * (-set.n.ln() * gamma * set.delta.mul2()).exp();
    let base = ZeroPrediction {
        uniform_zeros: mixed_zeros(model, k, shift).into_iter().map(to_f64).collect(),
        ..base
    };
    let as_f64 = |v: Vec<R>| v.into_iter().map(to_f64).collect::<Vec<_>>();
    if set.delta > zero() {
        return Ok(ZeroPrediction { anchored_zeros: as_f64(model.zeros(k)?), ..base });
    }
    if set.delta.eq_zero() {
        let c = mixing_constant(set)?;
        if cabs(c) > zero() && c.im.abs() > cabs(c) * crate::num::tol_digits(40) {
            return Err(Error::Numerical("mixed-polynomial coefficient is not real".into()));
        }
        return Ok(ZeroPrediction {
            anchored_zeros: as_f64(mixed_zeros(model, k, c.re)),
            convergence_exponent: to_f64(gamma),
            ..base
        });
    }
    let anchored = as_f64(model.zeros(k - 1)?);
    if is_half(set.delta) {
        return Ok(ZeroPrediction { anchored_zeros: anchored, ..base });
    }
    let ab = zeta_away_ab(set)?;
    let closed = zeta_away_closed(&set.cp, &set.frame, model, k, set.outer.r, set.delta, set.n)?;
    Ok(ZeroPrediction {
        anchored_zeros: anchored,
        stray: Some(StrayZero {
            ab_route: to_f64(ab.re),
            closed_form: to_f64(closed),
            relative_gap: to_f64(cabs(ab - cr(closed)) / closed.abs()),
            growth_exponent: to_f64(gamma * set.delta.abs().mul2()),
        }),
        ..base
    })
}

/// `(P_K(ζ)P_{K-1}(ζ') - P_K(ζ')P_{K-1}(ζ)) / (η_{K-1}(ζ - ζ'))`, with the
/// derivative limit on the diagonal.
pub fn cd_part(model: &MicroModel, k: usize, z: C, zp: C) -> C {
    if k == 0 {
        return czero();
    }
    let eta = cr(model.eta(k - 1));
    let scale = crate::num::rmax(cabs(z), cabs(zp)) + one();
    if cabs(z - zp) <= scale * crate::num::tol_digits(DIGITS as i32 - 5) {
        let dk = model.p(k).derivative().eval_c(z);
        let dk1 = model.p(k - 1).derivative().eval_c(z);
        return (dk * model.p_eval(k - 1, z) - model.p_eval(k, z) * dk1) / eta;
    }
    let num = model.p_eval(k, z) * model.p_eval(k - 1, zp) - model.p_eval(k, zp) * model.p_eval(k - 1, z);
    num / (eta * (z - zp))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum KernelKind {
    Generic,
    TransitionalPlus,
    TransitionalMinus,
}

/// Evaluator for the microscopic kernel at one `(κ, N)`.
#[derive(Clone, Debug)]
pub struct KernelPrediction {
    pub kind: KernelKind,
    /// `α_K` or `β_{K-1}`.
    pub mixing: Option<C>,
    pub k: usize,
    pub dressed: bool,
}

/// `u_K det[A⁽⁰⁾, A⁽¹⁾]` from the AB coefficients.
pub fn u_det_ab(set: &ParametrixSet) -> C {
    let (a0, a1) = (set.ab[0].col(0), set.ab[1].col(0));
    set.u_k * det_cols(a0, a1)
}

/// `ℓ_{K-1} det[B⁽¹⁾, B⁽⁰⁾]` from the AB coefficients.
pub fn l_det_ab(set: &ParametrixSet) -> C {
    let (b0, b1) = (set.ab[0].col(1), set.ab[1].col(1));
    set.l_km1 * det_cols(b1, b0)
}

/// Leading mixing coefficient `x/(1+x)` with
/// `x = u_K det[A⁽⁰⁾,A⁽¹⁾] N^{γ(2δ-1)}` for `δ > 0` and
/// `x = ℓ_{K-1} det[B⁽¹⁾,B⁽⁰⁾] N^{-γ(2δ+1)}` for `δ < 0`; at `|δ| = ½` these
/// are `α_K` and `β_{K-1}`.
pub fn mixing_coefficient(set: &ParametrixSet) -> Result<C> {
    let g = set.gamma();
    let ln_n = set.n.ln();
    let x = if set.delta > zero() {
        u_det_ab(set) * cr((ln_n * g * (set.delta.mul2() - one())).exp())
    } else if set.delta < zero() && set.k > 0 {
        l_det_ab(set) * cr((-ln_n * g * (set.delta.mul2() + one())).exp())
    } else {
        return Ok(czero());
    };
    let den = cone() + x;
    if cabs(den) <= crate::num::tol_digits(DIGITS as i32 - 10) {
        return Err(Error::Degenerate("transitional denominator vanishes".into()));
    }
    Ok(x / den)
}

impl KernelPrediction {
    pub fn new(set: &ParametrixSet, dressed: bool) -> Result<Self> {
        let (kind, mixing) = if set.kappa > zero() && is_half(set.delta) {
            let kind = if set.delta > zero() { KernelKind::TransitionalPlus } else { KernelKind::TransitionalMinus };
            (kind, Some(mixing_coefficient(set)?))
        } else {
            (KernelKind::Generic, None)
        };
        Ok(KernelPrediction { kind, mixing, k: set.k, dressed })
    }

    /// Microscopic kernel without the weight factors.
    pub fn core(&self, model: &MicroModel, z: C, zp: C) -> C {
        let cd = cd_part(model, self.k, z, zp);
        match (self.kind, self.mixing) {
            (KernelKind::TransitionalPlus, Some(a)) => {
                let k = self.k;
                cd + a / cr(model.eta(k)) * model.p_eval(k, z) * model.p_eval(k, zp)
            }
            (KernelKind::TransitionalMinus, Some(b)) => {
                let k = self.k - 1;
                cd - b / cr(model.eta(k)) * model.p_eval(k, z) * model.p_eval(k, zp)
            }
            _ => cd,
        }
    }

    /// `(ζζ')^{α/2} e^{-(V_m(ζ)+V_m(ζ'))/2}` times [`core`](Self::core):
    /// the dressed kernel per unit `ζ`.
    pub fn dressed(&self, model: &MicroModel, z: C, zp: C) -> C {
        let h = model.alpha.div2();
        let w = cpow(z, h) * cpow(zp, h) * crate::num::cexp(-(model.vm_c(z) + model.vm_c(zp)) * one().div2());
        w * self.core(model, z, zp)
    }
}

/// Dressed kernel per unit `ζ`.
pub fn predicted_kernel(set: &ParametrixSet, zeta: C, zetap: C) -> Result<C> {
    Ok(KernelPrediction::new(set, true)?.dressed(&set.model, zeta, zetap))
}

/// A value stored as `ln|v|` and `arg v`.
#[derive(Clone, Copy, Debug)]
pub struct LogValue {
    pub ln_abs: R,
    pub phase: R,
}

impl LogValue {
    pub fn ln_abs_f64(&self) -> f64 {
        to_f64(self.ln_abs)
    }
}

/// Raw kernel `C̃₀^γ e^{(N/T)(g+g')} N^{-γ(2κ-1)} [core]` at the points
/// `x, x'` of the edge window with `ζ(x) = ζ`, in log form.
pub fn predicted_kernel_raw(set: &ParametrixSet, zeta: R, zetap: R) -> Result<LogValue> {
    if !(zeta > zero() && zetap > zero()) {
        return invalid("raw kernel needs ζ, ζ' > 0");
    }
    let frame = &set.frame;
    let x = frame.ztilde_inverse(zeta / set.scale)?;
    let xp = frame.ztilde_inverse(zetap / set.scale)?;
    if !(x < frame.disk_radius && xp < frame.disk_radius) {
        return invalid("ζ lies outside the edge window at this N");
    }
    let cp = &set.cp;
    let g = cp.g_value(cr(x))? + cp.g_value(cr(xp))?;
    let nt = set.n / cp.t;
    let core = KernelPrediction::new(set, false)?.core(&set.model, cr(zeta), cr(zetap));
    let gamma = set.gamma();
    let ln_abs = gamma * frame.ctilde0.ln() + nt * g.re - gamma * (set.kappa.mul2() - one()) * set.n.ln()
        + cabs(core).ln();
    let tau = pi().mul2();
    let mut phase = (nt * g.im + carg(core)) % tau;
    if phase > pi() {
        phase -= tau;
    } else if phase <= -pi() {
        phase += tau;
    }
    Ok(LogValue { ln_abs, phase })
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub k: usize,
    pub r: i64,
    pub plus: bool,
    pub value: f64,
    pub positive: bool,
}

/// Closed forms of `u_K det[A⁽⁰⁾,A⁽¹⁾]` (`plus`) and
/// `ℓ_{K-1} det[B⁽¹⁾,B⁽⁰⁾]`, with `X = t₀²/((b-a)(1-t₀²)²)`:
/// `η_K 4^{1+2K} t₀^{2r} X^{1+2K} / (2π C̃₀^{γ(2K+1)} D(0)²)` and
/// `2π C̃₀^{γ(2K-1)} D(0)² 4^{1-2K} X^{1-2K} / (η_{K-1} t₀^{2r})`.
pub fn certificate_closed(
    cp: &CriticalPotential,
    frame: &ConformalFrame,
    model: &MicroModel,
    k: usize,
    r: i64,
    plus: bool,
) -> Result<R> {
    if k == 0 && !plus {
        return invalid("δ = -½ needs K ≥ 1");
    }
    if k > model.kmax {
        return invalid("K exceeds the microscopic model size");
    }
    let t0 = cp.t0();
    let w = one() - t0 * t0;
    let x = t0 * t0 / ((cp.b - cp.a) * w * w);
    let d0 = szego_at_zero_sq(cp, model.alpha);
    let t2r = t0.powi(2 * r as i32);
    let k = k as i64;
    Ok(if plus {
        model.eta(k as usize) * ri(4).powi((1 + 2 * k) as i32) * t2r * x.powi((1 + 2 * k) as i32)
            / (pi().mul2() * ct_pow(frame, 2 * k + 1) * d0)
    } else {
        pi().mul2() * ct_pow(frame, 2 * k - 1) * d0 * ri(4).powi((1 - 2 * k) as i32) * x.powi((1 - 2 * k) as i32)
            / (model.eta(k as usize - 1) * t2r)
    })
}

pub fn transitional_certificate(set: &ParametrixSet) -> Result<Certificate> {
    if !is_half(set.delta) {
        return invalid("certificates are defined at |δ| = ½");
    }
    let plus = set.delta > zero();
    let v = certificate_closed(&set.cp, &set.frame, &set.model, set.k, set.outer.r, plus)?;
    Ok(Certificate {
        a: to_f64(set.cp.a),
        b: to_f64(set.cp.b),
        alpha: to_f64(set.model.alpha),
        k: set.k,
        r: set.outer.r,
        plus,
        value: to_f64(v),
        positive: v > zero(),
    })
}

/// Relative gap between the closed-form certificate and the AB route.
pub fn certificate_gap(set: &ParametrixSet) -> Result<R> {
    let plus = set.delta > zero();
    let closed = certificate_closed(&set.cp, &set.frame, &set.model, set.k, set.outer.r, plus)?;
    let ab = if plus { u_det_ab(set) } else { l_det_ab(set) };
    Ok(cabs(ab - cr(closed)) / closed.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::micro::micro_model;
    use crate::num::{r, rs};
    use crate::spectral::{build_critical_potential, conformal_frame};
    use std::sync::Arc;

    fn setup(alpha: f64) -> (Arc<CriticalPotential>, Arc<ConformalFrame>, Arc<MicroModel>) {
        let cp = build_critical_potential(1.0, 3.0, 1.0, 1).unwrap();
        let fr = conformal_frame(&cp).unwrap();
        let m = micro_model(alpha, 1, &[], 3).unwrap();
        (Arc::new(cp), Arc::new(fr), Arc::new(m))
    }

    fn set_at(kappa: &str, n: f64) -> ParametrixSet {
        let (cp, fr, m) = setup(0.5);
        ParametrixSet::new(cp, fr, m, rs(kappa), r(n), 0).unwrap()
    }

    #[test]
    fn anchored_zero_generic() {
        let p = predicted_zeros(&set_at("1.25", 1e3)).unwrap();
        assert_eq!(p.anchored_zeros.len(), 1);
        assert!((p.anchored_zeros[0] - 1.5).abs() < 1e-60);
        assert!((p.convergence_exponent - 0.5).abs() < 1e-12);
        assert!(p.stray.is_none());
        let q = predicted_zeros(&set_at("-0.5", 1e3)).unwrap();
        assert!(q.anchored_zeros.is_empty() && q.stray.is_none());
    }

    #[test]
    fn stray_zero_two_routes() {
        let p = predicted_zeros(&set_at("0.75", 1e4)).unwrap();
        assert!(p.anchored_zeros.is_empty());
        let s = p.stray.unwrap();
        assert!(s.closed_form > 0.0 && s.ab_route > 0.0);
        assert!((s.growth_exponent - 0.5).abs() < 1e-12);
        assert!((p.uniform_zeros[0] / s.closed_form - 1.0).abs() < 1e-3);
        // the AB route carries the M̃ term, a relative O(N^{2γ|δ|-γ}) shift
        let c4 = (s.closed_form / s.ab_route - 1.0) * 1e4f64.sqrt();
        let q = predicted_zeros(&set_at("0.75", 1e5)).unwrap().stray.unwrap();
        let c5 = (q.closed_form / q.ab_route - 1.0) * 1e5f64.sqrt();
        assert!((c5 / c4 - 1.0).abs() < 0.05, "{c4} {c5}");
    }

    #[test]
    fn mixed_zeros_interlace() {
        let (_, _, m) = setup(0.5);
        let z = mixed_zeros(&m, 2, r(0.7));
        let p2 = m.zeros(2).unwrap();
        let p1 = m.zeros(1).unwrap();
        for x in &z {
            let v = m.p_eval_real(2, *x) - r(0.7) * m.p_eval_real(1, *x);
            assert!(v.abs() < crate::num::tol_digits(55));
        }
        assert!(z[1] > p2[1] && z[0] > p2[0] && z[0] < p1[0]);
    }

    #[test]
    fn confluent_limit() {
        let (_, _, m) = setup(0.5);
        let x = cr(r(1.5));
        let h = cr(rs("1e-6"));
        let d = cd_part(&m, 1, x, x);
        let q = cd_part(&m, 1, x + h, x);
        assert!(crate::num::crel(q, d) < r(1e-5));
        assert!(d.re > zero());
        let a = cd_part(&m, 2, cr(r(1.0)), cr(r(2.0)));
        let b = cd_part(&m, 2, cr(r(2.0)), cr(r(1.0)));
        assert!(crate::num::crel(a, b) < crate::num::tol_digits(60));
    }

    #[test]
    fn dressed_equals_raw_times_weights() {
        let set = set_at("1.25", 1e3);
        let raw = predicted_kernel_raw(&set, r(1.0), r(2.0)).unwrap();
        let fr = &set.frame;
        let lw = |z: R| {
            let x = fr.ztilde_inverse(z / set.scale).unwrap();
            crate::oracle::perturbed_log_weight(&set.cp, fr, &set.model, set.kappa, set.n, x).unwrap()
        };
        let ln_dressed = raw.ln_abs + (lw(r(1.0)) + lw(r(2.0))).div2();
        let direct = predicted_kernel(&set, cr(r(1.0)), cr(r(2.0))).unwrap() * cr(set.scale);
        let rel = (ln_dressed.exp() - direct.re).abs() / direct.re.abs();
        assert!(rel < crate::num::tol_digits(DIGITS as i32 - 10), "rel {}", to_f64(rel));
        assert!(raw.phase.abs() < crate::num::tol_digits(50));
    }

    #[test]
    fn certificates_positive_and_match_ab() {
        let (cp, fr, m) = setup(0.5);
        for (k, kappa, plus) in [(1usize, "1.5", true), (1, "0.5", false)] {
            let c = certificate_closed(&cp, &fr, &m, k, 0, plus).unwrap();
            assert!(c > zero());
            let gaps: Vec<R> = [1e3, 1e4]
                .iter()
                .map(|&n| {
                    let s = ParametrixSet::with_k(cp.clone(), fr.clone(), m.clone(), rs(kappa), k, r(n), 0).unwrap();
                    certificate_gap(&s).unwrap()
                })
                .collect();
            assert!(gaps[1] < r(1e-2), "gap {}", to_f64(gaps[1]));
            assert!(gaps[1] < gaps[0]);
        }
    }
}
