//! Extended-precision scalar layer.
//!
//! Everything numerical in the crate runs on [`R`], a 256-bit binary float
//! (237-bit significand, about 71 decimal digits), and on [`C`], the
//! corresponding complex type from `num-complex`.

pub mod linalg;
pub mod mat2;
pub mod poly;
pub mod quad;
pub mod series;
pub mod special;
pub mod tridiag;

use f256::f256;
use num_complex::Complex;
use std::str::FromStr;

pub use mat2::Mat2;
pub use poly::Poly;

pub type R = f256;
pub type C = Complex<f256>;

/// Decimal digits carried by [`R`].
pub const DIGITS: u32 = f256::DIGITS;

#[inline]
pub fn r(x: f64) -> R {
    R::from(x)
}

#[inline]
pub fn ri(n: i64) -> R {
    R::from(n)
}

/// Parses a decimal literal exactly (to the last bit of [`R`]).
pub fn rs(s: &str) -> R {
    R::from_str(s.trim()).unwrap_or_else(|_| panic!("bad numeric literal {s:?}"))
}

/// Lifts an `f64` through its shortest decimal representation, so that a
/// configuration value such as `1.3` becomes the 71-digit `1.3` rather than
/// the binary neighbour of it.
pub fn dec(x: f64) -> R {
    if x.is_finite() {
        rs(&format!("{x:e}"))
    } else {
        r(x)
    }
}

pub fn to_f64(x: R) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    if x.eq_zero() {
        return 0.0;
    }
    let (s, t, (hi, lo)) = x.as_sign_exp_signif();
    let mut m = (hi as f64) * 2f64.powi(128) + lo as f64;
    let mut e = t;
    while e > 600 {
        m *= 2f64.powi(600);
        e -= 600;
    }
    while e < -600 {
        m *= 2f64.powi(-600);
        e += 600;
        if m == 0.0 {
            break;
        }
    }
    m *= 2f64.powi(e);
    if s == 1 {
        -m
    } else {
        m
    }
}

pub fn pi() -> R {
    ::f256::consts::PI
}

pub fn zero() -> R {
    f256::ZERO
}

pub fn one() -> R {
    f256::ONE
}

pub fn ten_pow(k: i32) -> R {
    ri(10).powi(k)
}

/// `10^(-d)` as a tolerance.
pub fn tol_digits(d: i32) -> R {
    ten_pow(-d)
}

pub fn rmax(a: R, b: R) -> R {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn rmin(a: R, b: R) -> R {
    if a <= b {
        a
    } else {
        b
    }
}

#[inline]
pub fn c(re: R, im: R) -> C {
    Complex::new(re, im)
}

#[inline]
pub fn cr(re: R) -> C {
    Complex::new(re, f256::ZERO)
}

#[inline]
pub fn cf(re: f64, im: f64) -> C {
    Complex::new(r(re), r(im))
}

pub fn czero() -> C {
    cr(zero())
}

pub fn cone() -> C {
    cr(one())
}

pub fn ci() -> C {
    c(zero(), one())
}

pub fn two_pi_i() -> C {
    c(zero(), pi().mul2())
}

pub fn cabs(z: C) -> R {
    z.re.hypot(z.im)
}

pub fn carg(z: C) -> R {
    z.im.atan2(&z.re)
}

pub fn cexp(z: C) -> C {
    let m = z.re.exp();
    let (s, co) = z.im.sin_cos();
    c(m * co, m * s)
}

/// Principal logarithm, argument in `(-π, π]`.
pub fn cln(z: C) -> C {
    c(cabs(z).ln(), carg(z))
}

/// Principal square root; a negative real axis approached with `-0.0`
/// imaginary part maps to the lower half plane.
pub fn csqrt(z: C) -> C {
    let m = cabs(z);
    if m.eq_zero() {
        return czero();
    }
    if z.re >= zero() {
        let s = ((m + z.re).div2()).sqrt();
        c(s, z.im / s.mul2())
    } else {
        let t = ((m - z.re).div2()).sqrt();
        let re = z.im.abs() / t.mul2();
        if z.im.is_sign_negative() {
            c(re, -t)
        } else {
            c(re, t)
        }
    }
}

/// Principal power `z^p = exp(p log z)`.
pub fn cpow(z: C, p: R) -> C {
    if cabs(z).eq_zero() {
        return czero();
    }
    cexp(cln(z) * p)
}

pub fn cpowi(z: C, n: i64) -> C {
    if n < 0 {
        return cone() / cpowi(z, -n);
    }
    let mut acc = cone();
    let mut base = z;
    let mut k = n as u64;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        k >>= 1;
    }
    acc
}

pub fn cscale(z: C, s: R) -> C {
    c(z.re * s, z.im * s)
}

/// `(re, im)` pair for serialization and display.
pub fn cpair(z: C) -> (f64, f64) {
    (to_f64(z.re), to_f64(z.im))
}

/// Relative distance between two complex numbers, guarded at zero.
pub fn crel(a: C, b: C) -> R {
    let d = cabs(a - b);
    let s = rmax(cabs(a), cabs(b));
    if s.eq_zero() {
        d
    } else {
        d / s
    }
}

/// Decimal exponent estimate, handy for log-scale reports.
pub fn log10(x: R) -> f64 {
    to_f64(x.abs().log10())
}
