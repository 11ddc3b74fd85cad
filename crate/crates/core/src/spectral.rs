//! Critical one-cut potentials, the g-function and the conformal frame at
//! the hard edge.
//!
//! The family is `φ'(z) = ½ Q(z) S(z)` with `Q(x) = q x^(ν-1) (x - c)` and
//! `S(z) = √(z-a) √(z-b)` (principal roots, `S ~ z` at infinity).  Writing
//! `u = z - (a+b)/2`, `d = (b-a)/2` and `t = (u + S)/d`, every primitive of
//! `P(u) S(u)` has the closed form `R(u) S(u) + C ln t` with `R` polynomial,
//! which is what all evaluators below use.

use crate::error::{invalid, Error, Result};
use crate::num::poly::Poly;
use crate::num::{
    c, cabs, carg, cexp, cln, cone, cr, csqrt, czero, dec, one, pi, ri, rmax, to_f64, zero, C, DIGITS, R,
};
use serde::Serialize;

/// Number of Taylor coefficients kept for `φ` at the hard edge.
const SERIES_TERMS: usize = 256;

#[derive(Clone, Debug)]
pub struct CriticalPotential {
    pub a: R,
    pub b: R,
    pub t: R,
    pub nu: u32,
    pub q: R,
    pub c: R,
    pub c0: R,
    m0: R,
    d: R,
    /// `R(u)` of the closed-form primitive of `φ'`.
    r_u: Poly,
    /// log coefficient of the primitive, equal to `-T`.
    log_coef: R,
    /// `V(z)` as a polynomial in `z` (ℓ ≡ 0).
    v: Poly,
    /// Taylor coefficients of `φ` at 0.
    series: Vec<R>,
}

/// Plain-number summary for reports.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialSummary {
    pub a: f64,
    pub b: f64,
    pub total_mass: f64,
    pub nu: u32,
    pub q: f64,
    pub c: f64,
    pub c0: f64,
    pub v_coefficients: Vec<f64>,
}

/// `R, C` with `d/du [R S + C ln t] = P S`, `S² = u² - d²`.
fn primitive(p: &Poly, d: R) -> (Poly, R) {
    let deg = p.degree();
    let d2 = d * d;
    let rhs = |k: usize| -> R {
        let lo = if k >= 2 { p.coeff(k - 2) } else { zero() };
        lo - d2 * p.coeff(k)
    };
    let mut r = vec![zero(); deg + 3];
    for k in (1..=deg + 2).rev() {
        let up = if k + 1 < r.len() { r[k + 1] } else { zero() };
        r[k - 1] = (rhs(k) + ri((k + 1) as i64) * d2 * up) / ri(k as i64);
    }
    let cc = rhs(0) + d2 * r[1];
    (Poly::new(r), cc)
}

fn binomial_half(n: usize) -> Vec<R> {
    let mut v = vec![one()];
    let half = one().div2();
    for k in 1..n {
        let prev = v[k - 1];
        v.push(prev * (half - ri(k as i64 - 1)) / ri(k as i64));
    }
    v
}

/// Principal-branch primitive value `R S + C ln(-t)` for a polynomial
/// density factor `p` (in `u`), on ℂ \ [a, ∞).
impl CriticalPotential {
    pub fn m0(&self) -> R {
        self.m0
    }

    pub fn half_width(&self) -> R {
        self.d
    }

    /// `S(z)` off `[a, b]`.
    pub fn s(&self, z: C) -> C {
        csqrt(z - cr(self.a)) * csqrt(z - cr(self.b))
    }

    /// Physical-sheet uniformizer `t(z) = (u + S)/d`, `|t| > 1`.
    pub fn t_of(&self, z: C) -> C {
        (z - cr(self.m0) + self.s(z)) / self.d
    }

    /// `z(t) = d/2 (t + 1/t) + (a+b)/2`.
    pub fn z_of_t(&self, t: C) -> C {
        (t + cone() / t) * (self.d.div2()) + cr(self.m0)
    }

    /// Preimage of the hard edge outside the unit circle.
    pub fn t0(&self) -> R {
        -(self.m0 + (self.a * self.b).sqrt()) / self.d
    }

    /// `Q(x)`.
    pub fn q_poly(&self, x: R) -> R {
        self.q * x.powi(self.nu as i32 - 1) * (x - self.c)
    }

    /// Equilibrium density on `[a, b]`, zero elsewhere.
    pub fn density(&self, x: R) -> R {
        if x <= self.a || x >= self.b {
            return zero();
        }
        self.q_poly(x) * ((x - self.a) * (self.b - x)).sqrt() / pi().mul2()
    }

    /// `φ(z)` on ℂ \ [a, ∞) by the closed form.
    pub fn phi(&self, z: C) -> C {
        let u = z - cr(self.m0);
        let s = self.s(z);
        let t = (u + s) / self.d;
        self.r_u.eval_c(u) * s + cln(-t) * self.log_coef
    }

    /// `φ'(z) = ½ Q(z) S(z)`.
    pub fn phi_prime(&self, z: C) -> C {
        let q = cr(self.q) * crate::num::cpowi(z, self.nu as i64 - 1) * (z - cr(self.c));
        q * self.s(z) * one().div2()
    }

    /// Effective potential on `x ≥ 0`.
    pub fn effective_potential(&self, x: R) -> Result<R> {
        if x < zero() || !x.is_finite() {
            return invalid(format!("effective potential needs x >= 0, got {}", to_f64(x)));
        }
        if x >= self.a && x <= self.b {
            return Ok(zero());
        }
        let u = x - self.m0;
        if x < self.a {
            if x <= self.a.div2() {
                return Ok(self.phi_taylor(cr(x)).re);
            }
            let h = ((self.a - x) * (self.b - x)).sqrt();
            let t = (u - h) / self.d;
            Ok(-self.r_u.eval(u) * h + self.log_coef * (-t).ln())
        } else {
            let h = ((x - self.a) * (x - self.b)).sqrt();
            let t = (u + h) / self.d;
            Ok(self.r_u.eval(u) * h + self.log_coef * t.ln())
        }
    }

    /// External potential `V(x)` (with ℓ ≡ 0).
    pub fn v(&self, x: R) -> R {
        self.v.eval(x)
    }

    pub fn v_poly(&self) -> &Poly {
        &self.v
    }

    /// `g(z)` off `[a, ∞)`, log branch with argument in `(0, 2π)`.
    pub fn g_value(&self, z: C) -> Result<C> {
        if z.im.eq_zero() && z.re >= self.a {
            return invalid("g_value: z on the cut [a, ∞); use g_boundary");
        }
        Ok(self.v.eval_c(z) * one().div2() - self.phi(z) + c(zero(), pi() * self.t))
    }

    /// Boundary value of `g` at real `x > b` from above (`upper`) or below.
    pub fn g_boundary(&self, x: R, upper: bool) -> Result<C> {
        if x <= self.b {
            return invalid("g_boundary: x must lie to the right of the band");
        }
        let u = x - self.m0;
        let h = ((x - self.a) * (x - self.b)).sqrt();
        let lt = ((u + h) / self.d).ln();
        let im = if upper { -pi() } else { pi() };
        let phi = c(self.r_u.eval(u) * h + self.log_coef * lt, self.log_coef * im);
        Ok(self.v.eval_c(cr(x)) * one().div2() - phi + c(zero(), pi() * self.t))
    }

    /// Taylor coefficients `φ_k` of `φ` at 0 (`φ_k = 0` for `k < ν`).
    pub fn series(&self) -> &[R] {
        &self.series
    }

    /// `φ` from its Taylor series; accurate for `|z| ≤ a/2`.
    pub fn phi_taylor(&self, z: C) -> C {
        self.series.iter().rev().fold(czero(), |acc, &k| acc * z + cr(k))
    }

    pub fn summary(&self) -> PotentialSummary {
        PotentialSummary {
            a: to_f64(self.a),
            b: to_f64(self.b),
            total_mass: to_f64(self.t),
            nu: self.nu,
            q: to_f64(self.q),
            c: to_f64(self.c),
            c0: to_f64(self.c0),
            v_coefficients: self.v.coef.iter().map(|&x| to_f64(x)).collect(),
        }
    }
}

pub fn build_critical_potential(a: f64, b: f64, t: f64, nu: u32) -> Result<CriticalPotential> {
    if !(a.is_finite() && b.is_finite() && t.is_finite()) {
        return invalid("non-finite spectral parameter");
    }
    if !(a > 0.0 && a < b) {
        return invalid(format!("need 0 < a < b, got a = {a}, b = {b}"));
    }
    if t <= 0.0 || nu == 0 {
        return invalid("need T > 0 and nu >= 1");
    }
    build_exact(dec(a), dec(b), dec(t), nu)
}

pub fn build_exact(a: R, b: R, t: R, nu: u32) -> Result<CriticalPotential> {
    let m0 = (a + b).div2();
    let d = (b - a).div2();
    let sab = (a * b).sqrt();
    let t0 = -(m0 + sab) / d;
    let ln_mt0 = (-t0).ln();
    let x_pow = |k: u32| -> Poly {
        // (m0 + u)^k in u
        let mut p = Poly::constant(one());
        let lin = Poly::new(vec![m0, one()]);
        for _ in 0..k {
            p = &p * &lin;
        }
        p
    };
    let i_k = |k: u32| -> R {
        let (rp, cc) = primitive(&x_pow(k), d);
        -sab * rp.eval(-m0) + cc * ln_mt0
    };
    let i_nu = i_k(nu);
    let i_num1 = i_k(nu - 1);
    if !(i_nu > zero() && i_num1 > zero()) {
        return Err(Error::Numerical("hard-edge moments not positive".into()));
    }
    let cpar = i_nu / i_num1;
    // ½ (x^ν - c x^(ν-1)) with q = 1
    let half = one().div2();
    let p1 = (&x_pow(nu) - &x_pow(nu - 1).scale(cpar)).scale(half);
    let (_, c1) = primitive(&p1, d);
    if !(c1 < zero()) {
        return Err(Error::Numerical("mass normalization has the wrong sign".into()));
    }
    let q = -t / c1;
    let p = p1.scale(q);
    let (r_u, log_coef) = primitive(&p, d);
    let c0 = q * cpar * sab / ri(2 * nu as i64);

    // polynomial part of R(u) S(u) at infinity
    let deg_r = r_u.degree();
    let bin = binomial_half(deg_r + 3);
    let mut pi_u = vec![zero(); deg_r + 2];
    for (m, &rm) in r_u.coef.iter().enumerate() {
        let mut k = 0;
        while 2 * k <= m + 1 {
            let sign = if k % 2 == 0 { one() } else { -one() };
            let term = rm * bin[k] * sign * d.powi(2 * k as i32);
            pi_u[m + 1 - 2 * k] += term;
            k += 1;
        }
    }
    let pi_z = Poly::new(pi_u).shift(-m0);
    let ln2d = (ri(2) / d).ln();
    let v = &pi_z.scale(ri(2)) - &Poly::constant(t.mul2() * ln2d);

    // Taylor series of φ at 0
    let n = SERIES_TERMS;
    let ba = binomial_half(n);
    let sa: Vec<R> = (0..n)
        .map(|k| ba[k] * (-one() / a).powi(k as i32))
        .collect();
    let sb: Vec<R> = (0..n)
        .map(|k| ba[k] * (-one() / b).powi(k as i32))
        .collect();
    let mut s_ser = vec![zero(); n];
    for i in 0..n {
        for j in 0..n - i {
            s_ser[i + j] += sa[i] * sb[j];
        }
    }
    for v in s_ser.iter_mut() {
        *v *= -sab;
    }
    // ½ Q(z) = ½ q z^(ν-1) (z - c)
    let mut dphi = vec![zero(); n];
    let nu_us = nu as usize;
    for k in 0..n {
        let mut acc = zero();
        if k + 1 >= nu_us {
            let j = k + 1 - nu_us;
            acc -= cpar * s_ser[j];
        }
        if k >= nu_us {
            let j = k - nu_us;
            acc += s_ser[j];
        }
        dphi[k] = acc * q * half;
    }
    let mut series = vec![zero(); n + 1];
    for k in 0..n {
        series[k + 1] = dphi[k] / ri(k as i64 + 1);
    }
    for v in series.iter_mut().take(nu_us) {
        *v = zero();
    }

    Ok(CriticalPotential {
        a,
        b,
        t,
        nu,
        q,
        c: cpar,
        c0,
        m0,
        d,
        r_u,
        log_coef,
        v,
        series,
    })
}

/// Conformal coordinates at the hard edge.
#[derive(Clone, Debug)]
pub struct ConformalFrame {
    pub t0: R,
    pub ctilde0: R,
    pub nu: u32,
    pub disk_radius: R,
    /// `u(z) = φ(z)/(C0 z^ν)` Taylor coefficients.
    u_series: Vec<R>,
    /// `log10 |u_k|`, used to truncate the Horner loop.
    u_mag: Vec<f64>,
    /// Notes produced while choosing the disk.
    pub report: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameSummary {
    pub t0: f64,
    pub ctilde0: f64,
    pub gamma: f64,
    pub disk_radius: f64,
    pub report: Vec<String>,
}

impl ConformalFrame {
    pub fn gamma(&self) -> R {
        one() / ri(self.nu as i64)
    }

    pub fn epsilon(&self) -> R {
        self.disk_radius
    }

    fn u_and_du(&self, z: C) -> (C, C) {
        let mut u = czero();
        let mut du = czero();
        let lz = to_f64(cabs(z)).log10();
        let floor = self.u_mag[0] - (DIGITS as f64 + 6.0);
        let mut n = self.u_series.len();
        while n > 1 && self.u_mag[n - 1] + (n - 1) as f64 * lz < floor {
            n -= 1;
        }
        for &k in self.u_series[..n].iter().rev() {
            du = du * z + u;
            u = u * z + cr(k);
        }
        (u, du)
    }

    /// `η(z)` with `z̃ = z e^η`.
    pub fn eta(&self, z: C) -> C {
        let (u, _) = self.u_and_du(z);
        cln(u) / ri(self.nu as i64)
    }

    pub fn eta_prime(&self, z: C) -> C {
        let (u, du) = self.u_and_du(z);
        du / u / ri(self.nu as i64)
    }

    /// `z̃(z) = z e^{η(z)}`.
    pub fn ztilde(&self, z: C) -> C {
        z * cexp(self.eta(z))
    }

    pub fn ztilde_prime(&self, z: C) -> C {
        cexp(self.eta(z)) * (cone() + z * self.eta_prime(z))
    }

    /// `(C̃₀ N)^γ`.
    pub fn scale(&self, n: R) -> R {
        ((self.ctilde0 * n).ln() * self.gamma()).exp()
    }

    /// `ζ(z) = (C̃₀N)^γ z̃(z)`.
    pub fn zeta(&self, z: C, n: R) -> C {
        self.ztilde(z) * self.scale(n)
    }

    pub fn ztilde_real(&self, x: R) -> R {
        self.ztilde(cr(x)).re
    }

    /// Real `x ∈ [0, ε)` with `z̃(x) = w`, by Newton from `x = w`.
    pub fn ztilde_inverse(&self, w: R) -> Result<R> {
        let mut x = w;
        for _ in 0..80 {
            let f = self.ztilde_real(x) - w;
            let df = self.ztilde_prime(cr(x)).re;
            let step = f / df;
            x -= step;
            if step.abs() <= R::EPSILON * ri(8) * rmax(x.abs(), R::MIN_POSITIVE) {
                return Ok(x);
            }
        }
        Err(Error::Numerical("z̃ inversion did not converge".into()))
    }

    pub fn summary(&self) -> FrameSummary {
        FrameSummary {
            t0: to_f64(self.t0),
            ctilde0: to_f64(self.ctilde0),
            gamma: 1.0 / self.nu as f64,
            disk_radius: to_f64(self.disk_radius),
            report: self.report.clone(),
        }
    }

    /// Checks used by the radius policy on the circle `|z| = rho`.
    fn circle_ok(&self, rho: R, samples: usize) -> bool {
        let mut prev: Option<R> = None;
        let mut total = zero();
        for k in 0..=samples {
            let th = pi().mul2() * ri(k as i64) / ri(samples as i64);
            let (s, co) = th.sin_cos();
            let z = c(rho * co, rho * s);
            let (u, _) = self.u_and_du(z);
            if !(u.re > zero()) {
                return false;
            }
            if cabs(cone() + z * self.eta_prime(z)) < crate::num::r(1e-3) {
                return false;
            }
            let ang = carg(self.ztilde(z));
            if let Some(p) = prev {
                let mut dth = ang - p;
                if dth > pi() {
                    dth -= pi().mul2();
                }
                if dth < -pi() {
                    dth += pi().mul2();
                }
                if !(dth > zero()) {
                    return false;
                }
                total += dth;
            }
            prev = Some(ang);
        }
        (total - pi().mul2()).abs() < crate::num::r(1e-20)
    }
}

pub fn conformal_frame(cp: &CriticalPotential) -> Result<ConformalFrame> {
    let nu = cp.nu as usize;
    let u_series: Vec<R> = cp.series[nu..].iter().map(|&k| k / cp.c0).collect();
    let u_mag = u_series
        .iter()
        .map(|&k| if k.eq_zero() { f64::NEG_INFINITY } else { to_f64(k.abs()).log10() })
        .collect();
    let mut frame = ConformalFrame {
        t0: cp.t0(),
        ctilde0: cp.c0.mul2() / cp.t,
        nu: cp.nu,
        disk_radius: cp.a.div2(),
        u_series,
        u_mag,
        report: Vec::new(),
    };
    for attempt in 0..=6 {
        let r = frame.disk_radius;
        let ok = frame.circle_ok(r, 256)
            && (1..=16).all(|k| frame.circle_ok(r * ri(k) / ri(17), 64));
        if ok {
            return Ok(frame);
        }
        if attempt == 6 {
            break;
        }
        frame.report.push(format!(
            "disk radius {} failed the univalence check; halved",
            to_f64(r)
        ));
        frame.disk_radius = r.div2();
    }
    Err(Error::Numerical("no admissible disk radius after 6 halvings".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{quad, rs, tol_digits};

    fn cp13(nu: u32) -> CriticalPotential {
        build_critical_potential(1.0, 3.0, 1.0, nu).unwrap()
    }

    #[test]
    fn c_matches_quadrature_oracle() {
        let cp = cp13(1);
        let c_ref = rs("0.386646601364478138211024719240019632639587479");
        assert!((cp.c - c_ref).abs() < tol_digits(38));
        let q_ref = rs("2.47930800739810730493781149023918835159674454");
        assert!((cp.q - q_ref).abs() < tol_digits(38));
        let c0_ref = rs("0.830185821288121169804799988395807845831646565");
        assert!((cp.c0 - c0_ref).abs() < tol_digits(38));
        let cp2 = cp13(2);
        let c2_ref = rs("0.560244167792383087073896381482524320546554711");
        assert!((cp2.c - c2_ref).abs() < tol_digits(38));
        assert!((cp2.c0 - rs("0.310071176373733010459743479474458264790096673")).abs() < tol_digits(38));
    }

    #[test]
    fn boundary_values_of_phi() {
        for nu in 1..=4 {
            let cp = cp13(nu);
            assert!(cp.effective_potential(cp.a).unwrap().abs() < tol_digits(60));
            assert!(cp.effective_potential(zero()).unwrap().abs() < tol_digits(60));
            let closed = cp.phi(cr(zero())).re;
            assert!(closed.abs() < tol_digits(60));
            assert_eq!(cp.effective_potential(ri(2)).unwrap(), zero());
        }
    }

    #[test]
    fn phi_half_a_oracle() {
        let cp = cp13(1);
        let v = cp.effective_potential(rs("0.5")).unwrap();
        assert!((v - rs("0.137137620328372936550576215949860020366791381")).abs() < tol_digits(38));
        let w = cp.phi(cr(rs("0.5"))).re;
        assert!((v - w).abs() < tol_digits(60));
        let cp = build_critical_potential(2.0, 5.0, 1.5, 3).unwrap();
        let v = cp.effective_potential(rs("0.1")).unwrap();
        assert!((v - rs("0.0000529206467770831349029871511605763377542257303")).abs() < tol_digits(40));
    }

    #[test]
    fn mass_and_positivity() {
        let cp = cp13(2);
        let gj = quad::gauss_jacobi(64, one().div2(), one().div2()).mapped(cp.a, cp.b);
        let half_w = (cp.b - cp.a).div2();
        // rule already carries sqrt((1-s)(1+s)); rescale to sqrt((x-a)(b-x))
        let mass = gj.integrate(|x| cp.q_poly(x) * half_w / pi().mul2());
        assert!((mass - cp.t).abs() < tol_digits(60));
        for k in 1..40 {
            let x = cp.a + (cp.b - cp.a) * ri(k) / ri(40);
            assert!(cp.density(x) > zero());
        }
        for k in 1..60 {
            let x = ri(k) / ri(10);
            let v = cp.effective_potential(x).unwrap();
            assert!(v >= zero());
        }
    }

    #[test]
    fn g_function_properties() {
        let cp = cp13(1);
        let z = c(rs("1e6"), rs("3e5"));
        let g = cp.g_value(z).unwrap();
        let lnz = c(cabs(z).ln(), carg(z));
        assert!(cabs(g - lnz * cp.t) < ri(10) * cp.t / cabs(z));
        let zl = c(-rs("1e6"), rs("-1"));
        let gl = cp.g_value(zl).unwrap();
        let mut ang = carg(zl);
        if ang < zero() {
            ang += pi().mul2();
        }
        assert!(cabs(gl - c(cabs(zl).ln(), ang) * cp.t) < ri(10) * cp.t / cabs(zl));
        let x = ri(5);
        let jump = cp.g_boundary(x, true).unwrap() - cp.g_boundary(x, false).unwrap();
        assert!(cabs(jump - c(zero(), -pi().mul2() * cp.t)) < tol_digits(60));
        let g01 = cp.g_value(cr(rs("0.1"))).unwrap();
        assert!((g01.re - rs("0.690282169717660462168108818064808611381467686")).abs() < tol_digits(38));
        assert!((g01.im - pi() * cp.t).abs() < tol_digits(60));
        // independent Gauss–Jacobi route
        let gj = quad::gauss_jacobi(200, one().div2(), one().div2()).mapped(cp.a, cp.b);
        let half_w = (cp.b - cp.a).div2();
        let x0 = rs("0.1");
        let direct = gj.integrate(|s| cp.q_poly(s) * half_w / pi().mul2() * (s - x0).ln());
        assert!((direct - g01.re).abs() < tol_digits(40));
        // effective potential identity V/2 - Re g = φ
        let phi = cp.effective_potential(x0).unwrap();
        assert!((cp.v(x0).div2() - g01.re - phi).abs() < tol_digits(60));
    }

    #[test]
    fn uniformizer() {
        let cp = cp13(1);
        let t0 = cp.t0();
        assert!((t0 - (-ri(2) - ri(3).sqrt())).abs() < tol_digits(68));
        assert!(cabs(cp.z_of_t(cr(one())) - cr(cp.b)) < tol_digits(68));
        assert!(cabs(cp.z_of_t(cr(-one())) - cr(cp.a)) < tol_digits(68));
        assert!(cabs(cp.z_of_t(cr(t0))) < tol_digits(68));
        let t = c(rs("1.7"), rs("-2.2"));
        assert!(cabs(cp.z_of_t(t) - cp.z_of_t(cone() / t)) < tol_digits(68));
        assert!(cabs(cp.t_of(cp.z_of_t(t)) - t) < tol_digits(66));
        let s = cp.s(cr(rs("0.4")));
        assert!((s.re + ((rs("0.6")) * rs("2.6")).sqrt()).abs() < tol_digits(68));
        let s = cp.s(cr(ri(4)));
        assert!((s.re - ri(3).sqrt()).abs() < tol_digits(68));
    }

    #[test]
    fn frame_identities() {
        for nu in 1..=3 {
            let cp = cp13(nu);
            let fr = conformal_frame(&cp).unwrap();
            assert!(fr.t0 < -one());
            assert!(cabs(fr.eta(czero())) < tol_digits(68));
            let eps = fr.epsilon();
            assert!(eps < cp.a);
            let z = c(eps * rs("0.3"), eps * rs("0.5"));
            let zt = fr.ztilde(z);
            let lhs = crate::num::cpowi(zt, nu as i64) * cp.c0;
            assert!(cabs(lhs - cp.phi(z)) < tol_digits(55));
            for n in [ri(10), ri(1000)] {
                let diff = fr.zeta(z, n) - zt * fr.scale(n);
                assert!(cabs(diff).eq_zero());
            }
            let w = rs("0.05");
            let x = fr.ztilde_inverse(w).unwrap();
            assert!((fr.ztilde_real(x) - w).abs() < tol_digits(65));
        }
    }
}
