use super::{cr, czero, zero, C, R};
use std::ops::{Add, Mul, Sub};

/// Real polynomial, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub coef: Vec<R>,
}

impl Poly {
    pub fn new(mut coef: Vec<R>) -> Self {
        while coef.len() > 1 && coef.last().map_or(false, |c| c.eq_zero()) {
            coef.pop();
        }
        if coef.is_empty() {
            coef.push(zero());
        }
        Poly { coef }
    }

    pub fn zero() -> Self {
        Poly::new(vec![zero()])
    }

    pub fn constant(c: R) -> Self {
        Poly::new(vec![c])
    }

    /// `x - s`
    pub fn linear_root(s: R) -> Self {
        Poly::new(vec![-s, R::ONE])
    }

    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coef.len() == 1 && self.coef[0].eq_zero()
    }

    pub fn coeff(&self, k: usize) -> R {
        self.coef.get(k).copied().unwrap_or_else(zero)
    }

    pub fn eval(&self, x: R) -> R {
        self.coef.iter().rev().fold(zero(), |acc, &c| acc * x + c)
    }

    pub fn eval_c(&self, z: C) -> C {
        self.coef.iter().rev().fold(czero(), |acc, &c| acc * z + cr(c))
    }

    pub fn derivative(&self) -> Poly {
        if self.coef.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coef
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * R::from(k as u64))
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Poly {
        let mut v = vec![zero()];
        for (k, &c) in self.coef.iter().enumerate() {
            v.push(c / R::from((k + 1) as u64));
        }
        Poly::new(v)
    }

    pub fn scale(&self, s: R) -> Poly {
        Poly::new(self.coef.iter().map(|&c| c * s).collect())
    }

    /// `p(x + h)` by repeated synthetic division.
    pub fn shift(&self, h: R) -> Poly {
        let mut c = self.coef.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = c[j + 1] * h;
                c[j] += t;
            }
        }
        Poly::new(c)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coef.len().max(o.coef.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coef.len().max(o.coef.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut v = vec![zero(); self.coef.len() + o.coef.len() - 1];
        for (i, &a) in self.coef.iter().enumerate() {
            for (j, &b) in o.coef.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }
}

/// Monic polynomials `p_0..p_n` from recurrence coefficients
/// `p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}`.
pub fn monic_from_recurrence(alpha: &[R], beta: &[R], n: usize) -> Vec<Poly> {
    let mut out = vec![Poly::constant(R::ONE)];
    if n == 0 {
        return out;
    }
    out.push(Poly::linear_root(alpha[0]));
    for k in 1..n {
        let xp = &Poly::linear_root(alpha[k]) * &out[k];
        let next = &xp - &out[k - 1].scale(beta[k]);
        out.push(next);
    }
    out
}

/// Evaluates `p_0(x)..p_n(x)` from the recurrence without forming coefficients.
pub fn eval_recurrence(alpha: &[R], beta: &[R], n: usize, x: R) -> Vec<R> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(R::ONE);
    if n == 0 {
        return v;
    }
    v.push(x - alpha[0]);
    for k in 1..n {
        let next = (x - alpha[k]) * v[k] - beta[k] * v[k - 1];
        v.push(next);
    }
    v
}

pub fn eval_recurrence_c(alpha: &[R], beta: &[R], n: usize, z: C) -> Vec<C> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(cr(R::ONE));
    if n == 0 {
        return v;
    }
    v.push(z - cr(alpha[0]));
    for k in 1..n {
        let next = (z - cr(alpha[k])) * v[k] - v[k - 1] * beta[k];
        v.push(next);
    }
    v
}
