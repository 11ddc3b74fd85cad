use super::{pi, ri, rs, zero, R};
use std::sync::OnceLock;

const BERNOULLI: [(&str, &str); 17] = [
    ("1", "6"),
    ("-1", "30"),
    ("1", "42"),
    ("-1", "30"),
    ("5", "66"),
    ("-691", "2730"),
    ("7", "6"),
    ("-3617", "510"),
    ("43867", "798"),
    ("-174611", "330"),
    ("854513", "138"),
    ("-236364091", "2730"),
    ("8553103", "6"),
    ("-23749461029", "870"),
    ("8615841276005", "14322"),
    ("-7709321041217", "510"),
    ("2577687858367", "6"),
];

fn stirling_terms() -> &'static Vec<R> {
    static T: OnceLock<Vec<R>> = OnceLock::new();
    T.get_or_init(|| {
        BERNOULLI
            .iter()
            .enumerate()
            .map(|(i, (n, d))| {
                let k = (i + 1) as i64;
                rs(n) / rs(d) / ri(2 * k * (2 * k - 1))
            })
            .collect()
    })
}

/// `ln Γ(x)` for real `x > 0`.
pub fn lgamma(x: R) -> R {
    assert!(x > zero(), "lgamma needs a positive argument");
    let shift = 200i64;
    let mut y = x;
    let mut acc = zero();
    let mut prod = R::ONE;
    let mut cnt = 0;
    while y < ri(shift) {
        prod *= y;
        y += R::ONE;
        cnt += 1;
        if cnt % 16 == 0 {
            acc += prod.ln();
            prod = R::ONE;
        }
    }
    acc += prod.ln();
    let half = R::ONE.div2();
    let mut s = (y - half) * y.ln() - y + (pi().mul2()).ln() * half;
    let y2 = y * y;
    let mut yp = y;
    for t in stirling_terms() {
        s += *t / yp;
        yp *= y2;
    }
    s - acc
}

pub fn gamma(x: R) -> R {
    lgamma(x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::tol_digits;

    #[test]
    fn gamma_values() {
        let half = rs("0.5");
        let v = gamma(half + R::ONE);
        assert!((v - pi().sqrt().div2()).abs() < tol_digits(60));
        assert!((gamma(ri(6)) - ri(120)).abs() < tol_digits(60));
        assert!((gamma(half) - pi().sqrt()).abs() < tol_digits(60));
        // Γ(2.3) = 1.3·Γ(1.3)
        let g = gamma(rs("2.3")) - rs("1.3") * gamma(rs("1.3"));
        assert!(g.abs() < tol_digits(60));
    }
}
