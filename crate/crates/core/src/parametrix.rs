//! Szegő function, outer parametrix `Ψ_K`, local parametrix `R_κ`, the
//! nilpotent correction `M_{K,δ}` and the partial Schlesinger factor
//! `F(z) = 1 + F_{K,δ}/z`.

use crate::error::{invalid, Error, Result};
use crate::micro::MicroModel;
use crate::num::series::{principal_part_size, taylor_matrix};
use crate::num::{
    c, cabs, cexp, ci, cone, cpow, cpowi, cr, csqrt, czero, one, pi, ri, rmax, rmin, to_f64, two_pi_i,
    zero, Mat2, C, R,
};
use crate::spectral::{ConformalFrame, CriticalPotential};
use serde::Serialize;
use std::sync::Arc;

/// Genus-zero Szegő function `D(z) = D_∞ ((t - 1/t₀)/t)^α` with
/// `D_∞ = ((√a + √b)/2)^α`, the normalization for which `D₊D₋ = x^α`.
#[derive(Clone, Debug)]
pub struct SzegoFunction {
    pub alpha: R,
    pub d_inf: R,
    t0: R,
    a: R,
    b: R,
    m0: R,
    d: R,
}

impl SzegoFunction {
    pub fn new(cp: &CriticalPotential, alpha: R) -> Self {
        let mid = (cp.a.sqrt() + cp.b.sqrt()).div2();
        let d_inf = if alpha.eq_zero() { one() } else { (mid.ln() * alpha).exp() };
        SzegoFunction { alpha, d_inf, t0: cp.t0(), a: cp.a, b: cp.b, m0: cp.m0(), d: cp.half_width() }
    }

    /// `D` as a function of the uniformizing variable.
    pub fn at_t(&self, t: C) -> C {
        let w = (t - cr(one() / self.t0)) / t;
        cpow(w, self.alpha) * self.d_inf
    }

    pub fn eval(&self, z: C) -> Result<C> {
        if on_cut(z, self.a, self.b) {
            return invalid("Szegő function evaluated on the cut; use the boundary variant");
        }
        let s = csqrt(z - cr(self.a)) * csqrt(z - cr(self.b));
        Ok(self.at_t((z - cr(self.m0) + s) / self.d))
    }

    /// Boundary value `D_±(x)` for `a < x < b`.
    pub fn boundary(&self, x: R, upper: bool) -> Result<C> {
        Ok(self.at_t(t_boundary(self.a, self.b, self.m0, self.d, x, upper)?))
    }
}

pub fn szego(cp: &CriticalPotential, alpha: R, z: C) -> Result<C> {
    SzegoFunction::new(cp, alpha).eval(z)
}

fn on_cut(z: C, a: R, b: R) -> bool {
    z.im.eq_zero() && z.re >= a && z.re <= b
}

fn t_boundary(a: R, b: R, m0: R, d: R, x: R, upper: bool) -> Result<C> {
    if !(x > a && x < b) {
        return invalid("boundary value requested off the open cut");
    }
    let h = ((x - a) * (b - x)).sqrt();
    let im = if upper { h } else { -h };
    Ok(c((x - m0) / d, im / d))
}

/// Outer parametrix `Ψ_K` with degree offset `r`.
#[derive(Clone, Debug)]
pub struct OuterPsi {
    pub szego: SzegoFunction,
    pub k: i64,
    pub r: i64,
    lambda: R,
    t0: R,
    excluded: R,
}

impl OuterPsi {
    pub fn new(cp: &CriticalPotential, alpha: R, k: i64, r: i64) -> Self {
        let szego = SzegoFunction::new(cp, alpha);
        let t0 = cp.t0();
        let quarter = (cp.b - cp.a) / ri(4);
        let lambda = szego.d_inf * t0.powi(k as i32) * quarter.powi(r as i32);
        OuterPsi { szego, k, r, lambda, t0, excluded: (cp.b - cp.a) / ri(20) }
    }

    /// `Ψ_K` in terms of `t`.
    pub fn at_t(&self, t: C) -> Mat2 {
        let tinv = cone() / t;
        let s = csqrt(cone() - tinv * tinv);
        let tr = cpowi(t, self.r);
        let core = Mat2::new(tr, ci() * tinv / tr, -ci() * tr * tinv, cone() / tr).scale(cone() / s);
        let phi = (t - cr(self.t0)) / (t * self.t0 - cone());
        let pk = cpowi(phi, self.k);
        let dd = self.szego.at_t(t);
        let lam = Mat2::diag(cr(self.lambda), cr(one() / self.lambda));
        lam * core * Mat2::diag(pk / dd, dd / pk)
    }

    fn check(&self, z: C) -> Result<()> {
        let sz = &self.szego;
        if cabs(z - cr(sz.a)) < self.excluded || cabs(z - cr(sz.b)) < self.excluded {
            return invalid("outer parametrix evaluated inside an excluded edge disk");
        }
        Ok(())
    }

    pub fn eval(&self, z: C) -> Result<Mat2> {
        let sz = &self.szego;
        if on_cut(z, sz.a, sz.b) {
            return invalid("outer parametrix evaluated on the cut; use the boundary variant");
        }
        self.check(z)?;
        let s = csqrt(z - cr(sz.a)) * csqrt(z - cr(sz.b));
        let t = (z - cr(sz.m0) + s) / sz.d;
        if !(cabs(t) > one()) {
            return Err(Error::Numerical("uniformizer left the physical sheet".into()));
        }
        Ok(self.at_t(t))
    }

    /// Boundary values `Ψ_{K,±}(x)` on the cut.
    pub fn boundary(&self, x: R, upper: bool) -> Result<Mat2> {
        let sz = &self.szego;
        self.check(cr(x))?;
        Ok(self.at_t(t_boundary(sz.a, sz.b, sz.m0, sz.d, x, upper)?))
    }

    /// Jump matrix `[[0, x^α], [-x^{-α}, 0]]` of `Ψ_K` on the cut.
    pub fn jump(&self, x: R) -> Mat2 {
        let xa = (x.ln() * self.szego.alpha).exp();
        Mat2::new(czero(), cr(xa), cr(-one() / xa), czero())
    }
}

pub fn outer_psi(cp: &CriticalPotential, alpha: R, k: i64, r: i64, z: C) -> Result<Mat2> {
    OuterPsi::new(cp, alpha, k, r).eval(z)
}

/// Nearest integer with ties away from zero.
pub fn nearest_k(kappa: R) -> i64 {
    let f = to_f64(kappa);
    let k = f.round() as i64;
    // f64 rounding of κ near a half-integer: settle with the exact value
    let half = one().div2();
    let kk = ri(k);
    if kappa - kk > half {
        k + 1
    } else if kk - kappa > half {
        k - 1
    } else {
        k
    }
}

/// Everything needed to evaluate `Ỹ_∞` for one `(κ, N)`.
#[derive(Clone, Debug)]
pub struct ParametrixSet {
    pub cp: Arc<CriticalPotential>,
    pub frame: Arc<ConformalFrame>,
    pub model: Arc<MicroModel>,
    pub outer: OuterPsi,
    pub kappa: R,
    pub k: usize,
    pub delta: R,
    pub n: R,
    /// `M_{K,δ}`.
    pub m: Mat2,
    /// `M_{K,δ} (C̃₀N)^{-γ}`.
    pub m_tilde: Mat2,
    /// `F_{K,δ}`.
    pub f_poles: Mat2,
    /// `[A^{(j)}, B^{(j)}]`, `j = 0..=3`.
    pub ab: Vec<Mat2>,
    pub u_k: C,
    pub l_km1: C,
    /// `(C̃₀N)^γ`.
    pub scale: R,
    /// `C̃₀^{-γK} N^{γδ}`.
    g: R,
    /// Radius of the Taylor circle.
    pub taylor_radius: R,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParametrixSummary {
    pub kappa: f64,
    pub k: usize,
    pub delta: f64,
    pub n: f64,
    pub m: [[(f64, f64); 2]; 2],
    pub f_poles: [[(f64, f64); 2]; 2],
    pub ab0: [[(f64, f64); 2]; 2],
    pub ab1: [[(f64, f64); 2]; 2],
    pub u_k: (f64, f64),
    pub l_km1: (f64, f64),
}

pub fn mat_pairs(m: &Mat2) -> [[(f64, f64); 2]; 2] {
    use crate::num::cpair;
    [[cpair(m.m11), cpair(m.m12)], [cpair(m.m21), cpair(m.m22)]]
}

impl ParametrixSet {
    /// Builds the set with `K` the nearest integer to `κ`.
    pub fn new(
        cp: Arc<CriticalPotential>,
        frame: Arc<ConformalFrame>,
        model: Arc<MicroModel>,
        kappa: R,
        n: R,
        r: i64,
    ) -> Result<Self> {
        let k = if kappa < one().div2() { 0 } else { nearest_k(kappa) };
        Self::with_k(cp, frame, model, kappa, k as usize, n, r)
    }

    /// Builds the set for an explicit `K` (used at half-integer `κ`, where
    /// both neighbouring `K` are admissible).
    pub fn with_k(
        cp: Arc<CriticalPotential>,
        frame: Arc<ConformalFrame>,
        model: Arc<MicroModel>,
        kappa: R,
        k: usize,
        n: R,
        r: i64,
    ) -> Result<Self> {
        if !(n >= one()) {
            return invalid("N must be at least 1");
        }
        if model.nu != cp.nu {
            return invalid("microscopic model and potential disagree on ν");
        }
        if k > model.kmax {
            return invalid(format!("K = {k} exceeds the microscopic model size {}", model.kmax));
        }
        let half = one().div2();
        let delta = kappa - ri(k as i64);
        if kappa >= half && delta.abs() > half {
            return invalid("|κ - K| must not exceed ½");
        }
        if kappa < half && k != 0 {
            return invalid("κ < ½ uses K = 0");
        }
        let gamma = frame.gamma();
        let ct = frame.ctilde0;
        let ln_n = n.ln();
        let scale = frame.scale(n);
        let ct_2gk = (ct.ln() * gamma * ri(2 * k as i64)).exp();
        let n_2gd = (ln_n * gamma * delta.mul2()).exp();
        let tpi = two_pi_i();
        let a_k = cr(model.a_k(k));
        let m = if kappa <= zero() || delta.eq_zero() {
            Mat2::zero()
        } else if delta > zero() {
            let eta = model.eta(k);
            Mat2::new(
                a_k,
                -cr(eta * n_2gd / ct_2gk) / tpi,
                tpi * a_k * a_k * cr(ct_2gk / (eta * n_2gd)),
                -a_k,
            )
        } else {
            let eta = model.eta(k - 1);
            Mat2::new(
                a_k,
                a_k * a_k * cr(eta * n_2gd / ct_2gk) / tpi,
                -tpi * cr(ct_2gk / (eta * n_2gd)),
                -a_k,
            )
        };
        let m_tilde = m.scale_r(one() / scale);
        let u_k = cr(model.eta(k) * (ct.ln() * (-gamma) * ri(2 * k as i64 + 1)).exp()) / tpi;
        let l_km1 = if k == 0 {
            czero()
        } else {
            tpi * cr((ct.ln() * gamma * ri(2 * k as i64 - 1)).exp() / model.eta(k - 1))
        };
        let g = ((-gamma * ri(k as i64)) * ct.ln() + gamma * delta * ln_n).exp();
        let outer = OuterPsi::new(&cp, model.alpha, k as i64, r);
        let excl = (cp.b - cp.a) / ri(20);
        let taylor_radius = rmin(frame.disk_radius / ri(4), cp.a / ri(8));
        if !(cp.a - taylor_radius > excl) {
            return invalid("Taylor circle meets an excluded edge disk");
        }
        let mut set = ParametrixSet {
            cp,
            frame,
            model,
            outer,
            kappa,
            k,
            delta,
            n,
            m,
            m_tilde,
            f_poles: Mat2::zero(),
            ab: Vec::new(),
            u_k,
            l_km1,
            scale,
            g,
            taylor_radius,
        };
        set.ab = set.ab_coefficients(3)?;
        if kappa > zero() && !m.norm().eq_zero() {
            set.f_poles = set.schlesinger_f()?;
        }
        Ok(set)
    }

    /// The same set with `M = 0` and `F = 0`: the bare `Ψ_K R_K` pair with no
    /// transitional handling.
    pub fn uncorrected(&self) -> Result<Self> {
        let mut s = self.clone();
        s.m = Mat2::zero();
        s.m_tilde = Mat2::zero();
        s.f_poles = Mat2::zero();
        s.ab = s.ab_coefficients(3)?;
        Ok(s)
    }

    pub fn gamma(&self) -> R {
        self.frame.gamma()
    }

    /// `Ψ_K(z) z̃^{-Kσ₃}`.
    pub fn psi_k_reduced(&self, z: C) -> Result<Mat2> {
        let psi = self.outer.eval(z)?;
        let zt = self.frame.ztilde(z);
        Ok(psi * Mat2::pow_sigma3_int(zt, -(self.k as i64)))
    }

    /// Taylor coefficients at `z = 0` of
    /// `Ψ_K z̃^{-Kσ₃} (1 - M̃ (e^{-η} - 1)/z)`.
    pub fn ab_coefficients(&self, jmax: usize) -> Result<Vec<Mat2>> {
        if jmax < 1 {
            return invalid("jmax must be at least 1");
        }
        let mt = self.m_tilde;
        let f = |z: C| -> Result<Mat2> {
            let base = self.psi_k_reduced(z)?;
            let e = cexp(-self.frame.eta(z)) - cone();
            Ok(base * (Mat2::identity() - mt.scale(e / z)))
        };
        Ok(taylor_matrix(f, self.taylor_radius, jmax)?.0)
    }

    /// `F_{K,δ} = AB₀ M̃ (AB₀ - AB₁ M̃)^{-1}`.
    pub fn schlesinger_f(&self) -> Result<Mat2> {
        let ab0 = self.ab[0];
        let ab1 = self.ab[1];
        let den = ab0 - ab1 * self.m_tilde;
        let det = den.det();
        let size = rmax(den.norm() * den.norm(), R::MIN_POSITIVE);
        if cabs(det) <= size * crate::num::tol_digits(60) {
            return Err(Error::Degenerate(format!(
                "AB₀ - AB₁M̃ is singular (|det| = {:e}, κ = {}, N = {})",
                to_f64(cabs(det)),
                to_f64(self.kappa),
                to_f64(self.n)
            )));
        }
        Ok(ab0 * self.m_tilde * den.inv())
    }

    /// `F(z) = 1 + F_{K,δ}/z`.
    pub fn f_factor(&self, z: C) -> Mat2 {
        Mat2::identity() + self.f_poles.scale(cone() / z)
    }

    /// `Ψ_κ = F Ψ_K`.
    pub fn psi_kappa(&self, z: C) -> Result<Mat2> {
        Ok(self.f_factor(z) * self.outer.eval(z)?)
    }

    /// `W(ζ) = G Y(ζ) ζ^{-Kσ₃} G^{-1}`, `G = (C̃₀^{-γK} N^{γδ})^{σ₃}`.
    pub fn w_matrix(&self, zeta: C) -> Result<Mat2> {
        let y = self.model.y_matrix(self.k, zeta)?;
        let yz = y * Mat2::pow_sigma3_int(zeta, -(self.k as i64));
        let g2 = self.g * self.g;
        Ok(Mat2::new(yz.m11, yz.m12 * cr(g2), yz.m21 / cr(g2), yz.m22))
    }

    /// `C̃₀^{-γK} N^{γδ}`.
    pub fn g_factor(&self) -> R {
        self.g
    }

    fn conj_ztilde(&self, core: Mat2, zeta: C) -> Mat2 {
        let zt = zeta / self.scale;
        let z2k = cpowi(zt, 2 * self.k as i64);
        Mat2::new(core.m11, core.m12 / z2k, core.m21 * z2k, core.m22)
    }

    /// Local parametrix `R_κ(ζ)`.
    pub fn local_r(&self, zeta: C) -> Result<Mat2> {
        let w = self.w_matrix(zeta)?;
        let core = (Mat2::identity() - self.m.scale(cone() / zeta)) * w;
        Ok(self.conj_ztilde(core, zeta))
    }

    /// `R_K(ζ) = z̃^{-Kσ₃} H_K(ζ)`, without the nilpotent correction.
    pub fn r_k(&self, zeta: C) -> Result<Mat2> {
        Ok(self.conj_ztilde(self.w_matrix(zeta)?, zeta))
    }

    /// `Ỹ_∞(z)`.
    pub fn assemble(&self, z: C) -> Result<Mat2> {
        let psi = self.psi_kappa(z)?;
        if cabs(z) < self.frame.disk_radius {
            let zeta = self.frame.zeta(z, self.n);
            Ok(psi * self.local_r(zeta)?)
        } else {
            Ok(psi)
        }
    }

    /// `Ψ_κ R_κ Ψ_κ^{-1} - 1` at a point of `∂𝔻`.
    pub fn boundary_jump(&self, z: C) -> Result<Mat2> {
        let psi = self.psi_kappa(z)?;
        let rr = self.local_r(self.frame.zeta(z, self.n))?;
        Ok(psi * rr * psi.inv() - Mat2::identity())
    }

    /// Max over `samples` points of `∂𝔻` (offset from the real axis) of
    /// `‖Ψ_κ R_κ Ψ_κ^{-1} - 1‖`.
    pub fn boundary_residual_n(&self, samples: usize) -> Result<R> {
        let rho = self.frame.disk_radius;
        let mut worst = zero();
        for k in 0..samples {
            let th = pi().mul2() * (ri(k as i64) + one().div2()) / ri(samples as i64);
            let (s, co) = th.sin_cos();
            let z = c(rho * co, rho * s);
            worst = rmax(worst, self.boundary_jump(z)?.norm());
        }
        Ok(worst)
    }

    pub fn boundary_residual(&self) -> Result<R> {
        self.boundary_residual_n(128)
    }

    /// Size of the principal part at `z = 0` of
    /// `F Ψ_K z̃^{-Kσ₃} (1 - M/ζ)`, relative to its size on the Taylor
    /// circle.  Zero up to rounding when `Ψ_κ R_κ` is analytic there.
    pub fn outpost_defect(&self) -> Result<R> {
        let f = |z: C| -> Result<Mat2> {
            let base = self.psi_k_reduced(z)?;
            let zeta = self.frame.zeta(z, self.n);
            Ok(self.f_factor(z) * base * (Mat2::identity() - self.m.scale(cone() / zeta)))
        };
        principal_part_size(f, self.taylor_radius, 2 * (self.k + 1), 256)
    }

    pub fn summary(&self) -> ParametrixSummary {
        ParametrixSummary {
            kappa: to_f64(self.kappa),
            k: self.k,
            delta: to_f64(self.delta),
            n: to_f64(self.n),
            m: mat_pairs(&self.m),
            f_poles: mat_pairs(&self.f_poles),
            ab0: mat_pairs(&self.ab[0]),
            ab1: mat_pairs(&self.ab[1]),
            u_k: crate::num::cpair(self.u_k),
            l_km1: crate::num::cpair(self.l_km1),
        }
    }
}
