//! Dense complex linear solves (partial pivoting) for the block systems of
//! the Schlesinger chain.

use super::{cabs, czero, zero, C, R};

pub type CMat = Vec<Vec<C>>;

pub fn cmat_zero(n: usize, m: usize) -> CMat {
    vec![vec![czero(); m]; n]
}

/// Solves `X · A = B` for `X` (row-vector form), `A` square `n×n`,
/// `B` of shape `k×n`.  Returns `None` if `A` is numerically singular.
pub fn solve_right(a: &CMat, b: &CMat) -> Option<CMat> {
    let n = a.len();
    let at: CMat = (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect();
    let k = b.len();
    let bt: CMat = (0..n).map(|i| (0..k).map(|j| b[j][i]).collect()).collect();
    let xt = solve(&at, &bt)?;
    Some((0..k).map(|i| (0..n).map(|j| xt[j][i]).collect()).collect())
}

/// Solves `A · X = B`, `B` of shape `n×m`.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    let n = a.len();
    let m = if n > 0 { b[0].len() } else { 0 };
    let mut a = a.clone();
    let mut b = b.clone();
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|z| cabs(*z)))
        .fold(zero(), |acc, v| if v > acc { v } else { acc });
    if scale.eq_zero() {
        return None;
    }
    let tiny = scale * R::EPSILON * super::ri(64);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| cabs(a[i][col]).partial_cmp(&cabs(a[j][col])).unwrap())
            .unwrap();
        if cabs(a[piv][col]) <= tiny {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if cabs(f).eq_zero() {
                continue;
            }
            for j in col..n {
                let t = a[col][j] * f;
                a[row][j] -= t;
            }
            for j in 0..m {
                let t = b[col][j] * f;
                b[row][j] -= t;
            }
        }
    }
    let mut x = cmat_zero(n, m);
    for row in (0..n).rev() {
        for j in 0..m {
            let mut s = b[row][j];
            for k in row + 1..n {
                s -= a[row][k] * x[k][j];
            }
            x[row][j] = s / a[row][row];
        }
    }
    Some(x)
}
