//! Experiment drivers shared by the command-line front end and the
//! acceptance suite: oracle comparisons, residual and depth scans, the κ
//! sweep and the certificate grid.

use serde::Serialize;

use crate::config::Pipeline;
use crate::error::{Error, Result};
use crate::micro::micro_model;
use crate::num::{cr, dec, r, to_f64, R};
use crate::oracle::{oracle_sweep, rate_fit, OracleRun, RateFit};
use crate::parametrix::{nearest_k, ParametrixSet};
use crate::predict::{certificate_closed, predicted_kernel, predicted_zeros, Certificate};
use crate::schlesinger::improve;
use crate::spectral::{build_critical_potential, conformal_frame};

#[derive(Clone, Debug, Serialize)]
pub struct FitCheck {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub fit: Option<RateFit>,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

impl FitCheck {
    pub fn new(name: &str, points: Vec<(f64, f64)>, expected: f64, tolerance: f64) -> Self {
        let (fit, note) = match rate_fit(&points) {
            Ok(f) => (Some(f), String::new()),
            Err(e) => (None, e.to_string()),
        };
        let pass = fit.is_some_and(|f| (f.slope - expected).abs() <= tolerance);
        FitCheck { name: name.into(), points, fit, expected, tolerance, pass, note }
    }

    pub fn slope(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.slope)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub n: u64,
    pub edge_count: usize,
    pub edge_zeros: Vec<f64>,
    /// Distance of the oracle edge zero nearest to each anchored zero.
    pub anchored_error: Option<f64>,
    /// Same against the uniform prediction.
    pub uniform_error: Option<f64>,
    /// Largest edge-rescaled zero over the closed-form `ζ_away`.
    pub stray_ratio: Option<f64>,
    pub kernel_oracle: Option<f64>,
    pub kernel_predicted: f64,
    pub kernel_deviation: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub kappa: f64,
    pub rows: Vec<ComparisonRow>,
    pub checks: Vec<FitCheck>,
    pub failure: Option<String>,
}

fn max_error(oracle: &[R], predicted: &[f64]) -> Option<f64> {
    if predicted.is_empty() || oracle.is_empty() {
        return None;
    }
    let e = crate::oracle::zero_errors(oracle, predicted);
    Some(e.into_iter().fold(0.0, f64::max))
}

pub fn compare_run(p: &Pipeline, kappa: f64, run: &OracleRun, kernel_at: (f64, f64)) -> Result<ComparisonRow> {
    let set = p.set(kappa, run.n_big as f64)?;
    let pred = predicted_zeros(&set)?;
    let zs = &run.zeros_edge_rescaled;
    let stray_ratio = pred
        .stray
        .as_ref()
        .and_then(|s| zs.iter().copied().fold(None, |m: Option<R>, z| Some(m.map_or(z, |v| crate::num::rmax(v, z)))).map(|z| to_f64(z) / s.closed_form));
    let (z1, z2) = (dec(kernel_at.0), dec(kernel_at.1));
    let kp = to_f64(predicted_kernel(&set, cr(z1), cr(z2))?.re);
    let ko = run.dressed_kernel(z1, z2).ok().map(to_f64);
    Ok(ComparisonRow {
        n: run.n_big,
        edge_count: run.edge_zero_count(),
        edge_zeros: zs.iter().map(|&z| to_f64(z)).collect(),
        anchored_error: max_error(zs, &pred.anchored_zeros),
        uniform_error: max_error(zs, &pred.uniform_zeros),
        stray_ratio,
        kernel_oracle: ko,
        kernel_predicted: kp,
        kernel_deviation: ko.map(|k| (k - kp).abs() / kp.abs()),
    })
}

/// Oracle runs over `grid`, matched against the predictions.  A failed run
/// stops the comparison; rows computed so far are kept.
pub fn compare(p: &Pipeline, kappa: f64, grid: &[u64]) -> ComparisonReport {
    let mut rows = Vec::new();
    let mut failure = None;
    let window = match p.window(kappa) {
        Ok(w) => w,
        Err(e) => {
            return ComparisonReport { kappa, rows, checks: Vec::new(), failure: Some(e.to_string()) };
        }
    };
    for (n, res) in grid.iter().zip(oracle_sweep(&p.cp, &p.frame, &window, grid, p.config.regime.r)) {
        match res.and_then(|run| compare_run(p, kappa, &run, (1.0, 2.0))) {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure = Some(format!("N = {n}: {e}"));
                break;
            }
        }
    }
    let checks = comparison_checks(p, kappa, &rows);
    ComparisonReport { kappa, rows, checks, failure }
}

pub fn comparison_checks(p: &Pipeline, kappa: f64, rows: &[ComparisonRow]) -> Vec<FitCheck> {
    let gamma = 1.0 / p.config.spectral.nu as f64;
    let k = if kappa < 0.5 { 0 } else { nearest_k(dec(kappa)) };
    let delta = kappa - k as f64;
    let mut checks = Vec::new();
    let pts = |f: &dyn Fn(&ComparisonRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter().filter_map(|r| f(r).filter(|v| *v > 0.0).map(|v| (r.n as f64, v))).collect()
    };
    if kappa > 0.0 && delta > 0.0 && k > 0 {
        checks.push(FitCheck::new("anchored zero error", pts(&|r| r.anchored_error), -2.0 * gamma * delta, 0.2));
    }
    if kappa > 0.0 && delta < 0.0 {
        let growth: Vec<(f64, f64)> =
            rows.iter().filter_map(|r| r.edge_zeros.last().map(|&z| (r.n as f64, z))).collect();
        checks.push(FitCheck::new("stray zero growth", growth, 2.0 * gamma * delta.abs(), 0.2));
    }
    if kappa > 0.0 && k > 0 && delta.abs() < 0.5 {
        checks.push(FitCheck::new(
            "dressed kernel deviation",
            pts(&|r| r.kernel_deviation),
            2.0 * gamma * delta.abs() - gamma,
            0.2,
        ));
    }
    checks
}

/// Planted-rate self test of the fitting pipeline.
pub fn synthetic_self_test() -> Vec<FitCheck> {
    let grid = [16.0f64, 32.0, 64.0, 128.0];
    vec![
        FitCheck::new("planted N^-1", grid.iter().map(|&n| (n, 1.0 / n)).collect(), -1.0, 1e-9),
        FitCheck::new(
            "planted 3N^-1.5(1+0.2/sqrt N)",
            grid.iter().map(|&n| (n, 3.0 * n.powf(-1.5) * (1.0 + 0.2 / n.sqrt()))).collect(),
            -1.5,
            0.1,
        ),
        FitCheck::new("planted N^0.5", grid.iter().map(|&n| (n, 7.0 * n.sqrt())).collect(), 0.5, 1e-9),
    ]
}

/// `-γ min(1 + 2|δ|, 2 - 2|δ|)`.
pub fn expected_residual_slope(nu: u32, kappa: f64) -> f64 {
    let k = if kappa < 0.5 { 0 } else { nearest_k(dec(kappa)) };
    let d = (kappa - k as f64).abs();
    -(1.0 / nu as f64) * (1.0 + 2.0 * d).min(2.0 - 2.0 * d)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub n: f64,
    pub residual: f64,
    pub uncorrected: Option<f64>,
}

/// Boundary residual `‖Ψ_κ R_κ Ψ_κ⁻¹ - 1‖` over an `N` grid.  At `|δ| = ½`
/// the bare pair without `M` and `F` is reported as well.
pub fn residual_scan(set_at: impl Fn(f64) -> Result<ParametrixSet>, grid: &[f64], samples: usize) -> Result<Vec<ResidualRow>> {
    grid.iter()
        .map(|&n| {
            let s = set_at(n)?;
            let half = (to_f64(s.delta).abs() - 0.5).abs() < 1e-12;
            let unc = if half { Some(to_f64(s.uncorrected()?.boundary_residual_n(samples)?)) } else { None };
            Ok(ResidualRow { n, residual: to_f64(s.boundary_residual_n(samples)?), uncorrected: unc })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthRow {
    pub p: usize,
    pub n: f64,
    pub residual: f64,
    pub redundant_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthReport {
    pub rows: Vec<DepthRow>,
    pub checks: Vec<FitCheck>,
    pub monotone: bool,
}

/// Improved parametrix residuals for `p = 1..=depth` over an `N` grid.
pub fn depth_scan(p: &Pipeline, kappa: f64, grid: &[f64], depth: usize, samples: usize) -> Result<DepthReport> {
    let gamma = 1.0 / p.config.spectral.nu as f64;
    let mut rows = Vec::new();
    for &n in grid {
        let set = p.set(kappa, n)?;
        for d in 1..=depth {
            let imp = improve(&set, d)?;
            rows.push(DepthRow {
                p: d,
                n,
                residual: to_f64(imp.boundary_residual_n(samples)?),
                redundant_residual: to_f64(imp.redundant_residual),
            });
        }
    }
    let checks = (1..=depth)
        .map(|d| {
            let pts = rows.iter().filter(|r| r.p == d).map(|r| (r.n, r.residual)).collect();
            FitCheck::new(&format!("depth p = {d}"), pts, -((d + 1) as f64) * gamma, 0.2)
        })
        .collect();
    let monotone = grid.iter().all(|&n| {
        let v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.residual).collect();
        v.windows(2).all(|w| w[1] < w[0])
    });
    Ok(DepthReport { rows, checks, monotone })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub predicted_k: usize,
    /// Uniform-prediction zeros inside the window at `N`.
    pub uniform_count: Option<usize>,
    pub oracle_count: Option<usize>,
    pub oracle_zeros: Vec<f64>,
}

pub fn sweep_kappa(p: &Pipeline, kappas: &[f64], oracle_n: Option<u64>) -> Result<Vec<SweepRow>> {
    if kappas.is_empty() {
        return Err(Error::InvalidInput("the κ list is empty".into()));
    }
    kappas
        .iter()
        .map(|&kappa| {
            let predicted_k = if kappa < 0.5 { 0 } else { nearest_k(dec(kappa)).max(0) as usize };
            let (uniform_count, oracle_count, oracle_zeros) = match oracle_n {
                None => (None, None, Vec::new()),
                Some(n) => {
                    let set = p.set(kappa, n as f64)?;
                    let edge = set.scale * p.frame.ztilde_real(p.frame.disk_radius);
                    let uc = predicted_zeros(&set)?.uniform_zeros.iter().filter(|&&z| dec(z) < edge).count();
                    let run = crate::oracle::finite_n_ops(p.cp.clone(), p.frame.clone(), p.window(kappa)?, n, p.config.regime.r)?;
                    (Some(uc), Some(run.edge_zero_count()), run.zeros_edge_rescaled.iter().map(|&z| to_f64(z)).collect())
                }
            };
            Ok(SweepRow { kappa, predicted_k, uniform_count, oracle_count, oracle_zeros })
        })
        .collect()
}

/// Closed-form certificates over `(a, b) × α × K × r × {+½, -½}`.
pub fn certificate_grid() -> Result<Vec<Certificate>> {
    let mut out = Vec::new();
    for (a, b) in [(1.0, 3.0), (0.5, 2.0), (2.0, 5.0)] {
        let cp = build_critical_potential(a, b, 1.0, 1)?;
        let fr = conformal_frame(&cp)?;
        for alpha in [0.0, 0.5, 1.3] {
            let model = micro_model(alpha, 1, &[], 3)?;
            for k in [1usize, 2] {
                for rr in [0i64, 1] {
                    for plus in [true, false] {
                        let v = certificate_closed(&cp, &fr, &model, k, rr, plus)?;
                        out.push(Certificate {
                            a,
                            b,
                            alpha,
                            k,
                            r: rr,
                            plus,
                            value: to_f64(v),
                            positive: v > crate::num::zero(),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Relative gap between the two certificate routes at `N`, for `δ = +½`
/// (`K`, `κ = K + ½`) and `δ = -½` (`K`, `κ = K - ½`).
pub fn certificate_dual_route(p: &Pipeline, k: usize, n: f64) -> Result<(f64, f64)> {
    let mk = |kappa: f64| {
        ParametrixSet::with_k(p.cp.clone(), p.frame.clone(), p.model.clone(), dec(kappa), k, r(n), p.config.regime.r)
    };
    let plus = crate::predict::certificate_gap(&mk(k as f64 + 0.5)?)?;
    let minus = crate::predict::certificate_gap(&mk(k as f64 - 0.5)?)?;
    Ok((to_f64(plus), to_f64(minus)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_test_and_expected_slopes() {
        assert!(synthetic_self_test().iter().all(|c| c.pass));
        assert!((expected_residual_slope(1, 1.25) + 1.5).abs() < 1e-12);
        assert!((expected_residual_slope(1, 1.0) + 1.0).abs() < 1e-12);
        assert!((expected_residual_slope(2, 1.25) + 0.75).abs() < 1e-12);
    }

    #[test]
    fn certificates_all_positive() {
        let g = certificate_grid().unwrap();
        assert_eq!(g.len(), 72);
        assert!(g.iter().all(|c| c.positive && c.value.is_finite()));
    }
}
