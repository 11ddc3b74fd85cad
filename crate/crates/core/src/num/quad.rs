//! Gauss rules at working precision and a double-exponential fallback used
//! as an independent check.

use super::special::lgamma;
use super::tridiag::eigenvalues;
use super::{one, pi, r, ri, rmax, zero, R};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// A quadrature rule: nodes and weights, the weight function (if any)
/// already folded into `w`.
#[derive(Clone, Debug, Default)]
pub struct Rule {
    pub x: Vec<R>,
    pub w: Vec<R>,
}

impl Rule {
    pub fn new() -> Self {
        Rule::default()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn append(&mut self, other: Rule) {
        self.x.extend(other.x);
        self.w.extend(other.w);
    }

    pub fn integrate<F: Fn(R) -> R>(&self, f: F) -> R {
        self.x.iter().zip(&self.w).fold(zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    /// Affine image of a rule given on `[-1, 1]`.
    pub fn mapped(&self, lo: R, hi: R) -> Rule {
        let h = (hi - lo).div2();
        let m = (hi + lo).div2();
        Rule {
            x: self.x.iter().map(|&s| m + h * s).collect(),
            w: self.w.iter().map(|&w| w * h).collect(),
        }
    }
}

/// Monic recurrence of the Jacobi weight `(1-s)^a (1+s)^b` on `[-1, 1]`.
pub fn jacobi_recurrence(n: usize, a: R, b: R) -> (Vec<R>, Vec<R>) {
    let mut al = Vec::with_capacity(n);
    let mut be = Vec::with_capacity(n);
    let two = ri(2);
    for k in 0..n {
        let kk = ri(k as i64);
        let s = two * kk + a + b;
        let ak = if k == 0 {
            (b - a) / (a + b + two)
        } else {
            (b * b - a * a) / (s * (s + two))
        };
        al.push(ak);
        let bk = if k == 0 {
            zero()
        } else if k == 1 {
            ri(4) * (one() + a) * (one() + b) / ((two + a + b) * (two + a + b) * (ri(3) + a + b))
        } else {
            ri(4) * kk * (kk + a) * (kk + b) * (kk + a + b) / (s * s * (s + one()) * (s - one()))
        };
        be.push(bk);
    }
    (al, be)
}

/// Gauss rule from monic recurrence coefficients and the zeroth moment.
pub fn gauss_from_recurrence(alpha: &[R], beta: &[R], n: usize, mu0: R) -> Rule {
    let x = eigenvalues(alpha, beta, n);
    let w = x
        .iter()
        .map(|&xi| {
            let mut p0 = zero();
            let mut p1 = one();
            let mut norm = one();
            let mut s = one();
            for k in 0..n - 1 {
                let b = if k == 0 { zero() } else { beta[k] };
                let p2 = (xi - alpha[k]) * p1 - b * p0;
                p0 = p1;
                p1 = p2;
                norm *= beta[k + 1];
                s += p1 * p1 / norm;
            }
            mu0 / s
        })
        .collect();
    Rule { x, w }
}

fn cache() -> &'static Mutex<HashMap<String, Rule>> {
    static C: OnceLock<Mutex<HashMap<String, Rule>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `n`-point Gauss–Jacobi rule on `[-1, 1]` for `(1-s)^a (1+s)^b`.
pub fn gauss_jacobi(n: usize, a: R, b: R) -> Rule {
    let key = format!("{n}:{a:?}:{b:?}");
    if let Some(rl) = cache().lock().unwrap().get(&key) {
        return rl.clone();
    }
    let (al, be) = jacobi_recurrence(n, a, b);
    let two = ri(2);
    let mu0 = ((a + b + one()) * two.ln() + lgamma(a + one()) + lgamma(b + one()) - lgamma(a + b + two)).exp();
    let rule = gauss_from_recurrence(&al, &be, n, mu0);
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

pub fn gauss_legendre(n: usize) -> Rule {
    let key = format!("gl{n}");
    if let Some(rl) = cache().lock().unwrap().get(&key) {
        return rl.clone();
    }
    let al = vec![zero(); n];
    let be: Vec<R> = (0..n)
        .map(|k| {
            if k == 0 {
                zero()
            } else {
                let kk = ri((k * k) as i64);
                kk / (ri(4) * kk - one())
            }
        })
        .collect();
    let rule = gauss_from_recurrence(&al, &be, n, ri(2));
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

/// Gauss–Legendre panel on `[lo, hi]`.
pub fn gl_panel(lo: R, hi: R, n: usize) -> Rule {
    gauss_legendre(n).mapped(lo, hi)
}

/// Rule for `∫_0^h x^α f(x) dx`, the factor `x^α` folded into the weights.
pub fn gj_left_panel(h: R, alpha: R, n: usize) -> Rule {
    let base = gauss_jacobi(n, zero(), alpha);
    let half = h.div2();
    let scale = if alpha.eq_zero() { half } else { (half.ln() * (alpha + one())).exp() };
    Rule {
        x: base.x.iter().map(|&s| half * (one() + s)).collect(),
        w: base.w.iter().map(|&w| w * scale).collect(),
    }
}

/// Panels on `[lo, hi]` graded geometrically towards `lo` (if `toward_lo`)
/// or towards `hi`, smallest panel of width about `h0`.
pub fn graded_panels(lo: R, hi: R, h0: R, ratio: R, n: usize, toward_lo: bool) -> Rule {
    let mut cuts = vec![zero()];
    let len = hi - lo;
    let mut w = h0;
    let mut pos = zero();
    while pos + w < len {
        pos += w;
        cuts.push(pos);
        w *= ratio;
    }
    let n_cuts = cuts.len();
    if n_cuts > 1 && len - cuts[n_cuts - 1] < w.div2() {
        cuts[n_cuts - 1] = len;
    } else {
        cuts.push(len);
    }
    let mut rule = Rule::new();
    for i in 0..cuts.len() - 1 {
        let (p, q) = if toward_lo {
            (lo + cuts[i], lo + cuts[i + 1])
        } else {
            (hi - cuts[i + 1], hi - cuts[i])
        };
        rule.append(gl_panel(p, q, n));
    }
    rule
}

/// Tanh–sinh quadrature on `[lo, hi]` to relative accuracy `tol`.
/// `f` receives `(x, x - lo, hi - x)` so endpoint singularities can be
/// evaluated without cancellation.
pub fn tanh_sinh<F: Fn(R, R, R) -> R>(f: F, lo: R, hi: R, tol: R) -> R {
    let half = (hi - lo).div2();
    let mid = (hi + lo).div2();
    let pi2 = pi().div2();
    let tmax = r(4.5);
    let mut h = one().div2();
    let node = |t: R| -> (R, R, R) {
        let et = t.exp();
        let (sh, ch) = (et - one() / et, et + one() / et);
        let u = pi2 * sh.div2();
        let eu = u.exp();
        let emu = one() / eu;
        // 1 - tanh(u) and 1 + tanh(u) without cancellation
        let one_m = emu.mul2() / (eu + emu);
        let one_p = eu.mul2() / (eu + emu);
        let cosh_u = (eu + emu).div2();
        let wgt = pi2 * ch.div2() / (cosh_u * cosh_u);
        (one_m, one_p, wgt)
    };
    let eval = |t: R| -> R {
        let (om, op, wgt) = node(t);
        let dlo = half * op;
        let dhi = half * om;
        if dlo.eq_zero() || dhi.eq_zero() {
            return zero();
        }
        let x = mid + half * (op - one());
        wgt * f(x, dlo, dhi)
    };
    let mut sum = eval(zero());
    let mut k = 1;
    loop {
        let t = h * ri(k);
        if t > tmax {
            break;
        }
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut est = sum * h * half;
    for _ in 0..8 {
        h = h.div2();
        let mut k = 1;
        loop {
            let t = h * ri(k);
            if t > tmax {
                break;
            }
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let new = sum * h * half;
        let diff = (new - est).abs();
        est = new;
        if diff <= tol * rmax(est.abs(), R::MIN_POSITIVE) {
            break;
        }
    }
    est
}

/// Exp–sinh quadrature on `[lo, ∞)`; `f` receives `(x, x - lo)`.
pub fn exp_sinh<F: Fn(R, R) -> R>(f: F, lo: R, tol: R) -> R {
    let pi2 = pi().div2();
    let tmin = r(-6.0);
    let tmax = r(5.0);
    let eval = |t: R| -> R {
        let et = t.exp();
        let sh = (et - one() / et).div2();
        let ch = (et + one() / et).div2();
        let d = (pi2 * sh).exp();
        let wgt = pi2 * ch * d;
        if d.eq_zero() || !d.is_finite() {
            return zero();
        }
        let v = f(lo + d, d);
        if v.eq_zero() {
            zero()
        } else {
            wgt * v
        }
    };
    let mut h = one().div2();
    let mut sum = zero();
    let mut k = 0i64;
    loop {
        let t = tmin + h * ri(k);
        if t > tmax {
            break;
        }
        sum += eval(t);
        k += 1;
    }
    let mut est = sum * h;
    for _ in 0..8 {
        h = h.div2();
        let mut k = 1i64;
        loop {
            let t = tmin + h * ri(k);
            if t > tmax {
                break;
            }
            sum += eval(t);
            k += 2;
        }
        let new = sum * h;
        let diff = (new - est).abs();
        est = new;
        if diff <= tol * rmax(est.abs(), R::MIN_POSITIVE) {
            break;
        }
    }
    est
}
