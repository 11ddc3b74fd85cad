use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hardedge::config::{ExperimentConfig, Pipeline, SCHEMA_VERSION};
use hardedge::experiment::{
    certificate_dual_route, certificate_grid, compare, depth_scan, expected_residual_slope, residual_scan,
    sweep_kappa, synthetic_self_test, FitCheck,
};
use hardedge::num::{cr, dec, to_f64};
use hardedge::oracle::oracle_sweep;
use hardedge::parametrix::ParametrixSet;
use hardedge::predict::{mixing_coefficient, predicted_kernel, predicted_kernel_raw, predicted_zeros, transitional_certificate, KernelPrediction};
use hardedge::spectral::build_critical_potential;
use hardedge::Error;

#[derive(Parser, Debug)]
#[command(name = "hardedge", version, about = "Hard-edge colonization asymptotics and finite-N oracle")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Requested precision in decimal digits.
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// Comma-separated N grid for the command.
    #[arg(long, global = true, value_delimiter = ',')]
    n_grid: Option<Vec<f64>>,
    /// Schlesinger depth p.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Include the long-running oracle sizes.
    #[arg(long, global = true)]
    long: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sampled V and φ profiles for ν = 1..4.
    Potential,
    /// Zero, kernel and certificate predictions.
    Predict,
    /// Finite-N oracle runs.
    Oracle,
    /// Oracle against predictions with rate fits.
    Compare {
        /// Fit planted synthetic rates instead of running the oracle.
        #[arg(long)]
        self_test: bool,
    },
    /// Edge-zero population across κ.
    SweepKappa {
        /// Comma-separated κ values (overrides the configuration).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        kappa: Option<Vec<f64>>,
        /// Also count oracle edge zeros at this N.
        #[arg(long)]
        oracle_n: Option<u64>,
    },
    /// Improved-parametrix residuals for p = 1..depth.
    SchlesingerDepth,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Lib(Error::InvalidInput(msg.into()))
}

struct Output {
    dir: PathBuf,
    config: ExperimentConfig,
    command: &'static str,
}

impl Output {
    fn new(dir: &Path, config: &ExperimentConfig, command: &'static str) -> Result<Self, Failure> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), config: config.clone(), command })
    }

    fn wants(&self, fmt: &str) -> bool {
        self.config.output.formats.iter().any(|f| f == fmt)
    }

    fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<(), Failure> {
        if !self.wants("json") {
            return Ok(());
        }
        let hash = Sha256::digest(self.config.to_json().as_bytes());
        let rec = json!({
            "schema_version": SCHEMA_VERSION,
            "config_hash": format!("{hash:x}"),
            "library_version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "result": result,
        });
        let text = serde_json::to_string_pretty(&rec).map_err(|e| Failure::Io(e.to_string()))?;
        fs::write(self.dir.join(name), text + "\n")?;
        Ok(())
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        if !self.wants("csv") {
            return Ok(());
        }
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:e}"))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(d) = cli.digits {
        cfg.numerics.digits = d;
    }
    if let Some(d) = cli.depth {
        cfg.numerics.depth = d;
    }
    if cli.long {
        cfg.numerics.long = true;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.display().to_string();
    }
    if let Some(g) = &cli.n_grid {
        match cli.cmd {
            Cmd::Oracle | Cmd::Compare { .. } => {
                if g.iter().any(|&v| v.fract() != 0.0 || v < 1.0) {
                    return Err(invalid("oracle N values must be positive integers"));
                }
                cfg.numerics.n_grid = g.iter().map(|&v| v as u64).collect();
            }
            _ => cfg.numerics.parametrix_n_grid = g.clone(),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_checks(checks: &[FitCheck]) {
    for c in checks {
        println!(
            "{:<28} slope {:>8.3}  expected {:>7.3} ± {:<5}  {}{}",
            c.name,
            c.slope(),
            c.expected,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" },
            if c.note.is_empty() { String::new() } else { format!("  ({})", c.note) }
        );
    }
}

fn cmd_potential(cfg: &ExperimentConfig, out: &Output) -> Result<(), Failure> {
    let s = &cfg.spectral;
    let mut summaries = Vec::new();
    for nu in 1..=4u32 {
        let cp = build_critical_potential(s.a, s.b, s.t, nu)?;
        let hi = s.b + (s.b - s.a) / 2.0;
        let mut rows = Vec::new();
        for i in 0..=240 {
            let x = dec(hi * i as f64 / 240.0);
            let phi = cp.effective_potential(x)?;
            rows.push(vec![format!("{:e}", to_f64(x)), format!("{:e}", to_f64(cp.v(x))), format!("{:e}", to_f64(phi))]);
        }
        out.csv(&format!("potential_nu{nu}.csv"), &["x", "V", "phi"], &rows)?;
        println!("ν = {nu}: C = {:.6}, q = {:.6}", to_f64(cp.c), to_f64(cp.q));
        summaries.push(cp.summary());
    }
    out.json("potential.json", &summaries)
}

fn set_report(p: &Pipeline, set: &ParametrixSet) -> Result<Value, Failure> {
    let zeros = predicted_zeros(set)?;
    let kp = KernelPrediction::new(set, true)?;
    let mut kernel = Vec::new();
    for (a, b) in [(0.5, 1.0), (1.0, 2.0), (1.5, 1.5), (2.0, 3.0)] {
        let v = predicted_kernel(set, cr(dec(a)), cr(dec(b)))?;
        let raw = predicted_kernel_raw(set, dec(a), dec(b))?;
        kernel.push(json!({
            "zeta": a,
            "zetap": b,
            "dressed": to_f64(v.re),
            "raw_ln_abs": raw.ln_abs_f64(),
            "raw_phase": to_f64(raw.phase),
        }));
    }
    let half = (to_f64(set.delta).abs() - 0.5).abs() < 1e-12;
    let certificate = if half { Some(transitional_certificate(set)?) } else { None };
    let residual = to_f64(set.boundary_residual_n(p.config.numerics.samples)?);
    Ok(json!({
        "n": to_f64(set.n),
        "kappa": to_f64(set.kappa),
        "k": set.k,
        "delta": to_f64(set.delta),
        "zeros": zeros,
        "kernel_kind": kp.kind,
        "mixing": hardedge::num::cpair(mixing_coefficient(set)?),
        "kernel": kernel,
        "certificate": certificate,
        "boundary_residual": residual,
        "parametrix": set.summary(),
    }))
}

fn cmd_predict(cfg: &ExperimentConfig, out: &Output) -> Result<(), Failure> {
    let p = Pipeline::build(cfg)?;
    let kappa = cfg.regime.kappa;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.numerics.parametrix_n_grid {
        let set = p.set(kappa, n)?;
        let rep = set_report(&p, &set)?;
        let list = |v: &Value| {
            v.as_array().map_or(String::new(), |a| a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"))
        };
        rows.push(vec![
            format!("{n:e}"),
            set.k.to_string(),
            format!("{:e}", to_f64(set.delta)),
            list(&rep["zeros"]["anchored_zeros"]),
            list(&rep["zeros"]["uniform_zeros"]),
            rep["zeros"]["stray"]["closed_form"].as_f64().map_or(String::new(), |x| format!("{x:e}")),
            format!("{:e}", rep["boundary_residual"].as_f64().unwrap_or(f64::NAN)),
        ]);
        println!(
            "N = {n:e}: K = {}, δ = {:+.3}, anchored {}, stray {}, residual {:.3e}",
            set.k,
            to_f64(set.delta),
            rep["zeros"]["anchored_zeros"],
            rep["zeros"]["stray"]["closed_form"],
            rep["boundary_residual"].as_f64().unwrap_or(f64::NAN)
        );
        reports.push(rep);
        let half = (to_f64(set.delta).abs() - 0.5).abs() < 1e-12;
        if half && set.k > 0 {
            let other = ParametrixSet::with_k(
                p.cp.clone(),
                p.frame.clone(),
                p.model.clone(),
                dec(kappa),
                set.k - 1,
                dec(n),
                cfg.regime.r,
            )?;
            reports.push(set_report(&p, &other)?);
        }
    }
    out.csv(
        "predict.csv",
        &["N", "K", "delta", "anchored_zeros", "uniform_zeros", "zeta_away", "boundary_residual"],
        &rows,
    )?;
    out.json("predict.json", &reports)
}

fn cmd_oracle(cfg: &ExperimentConfig, out: &Output) -> Result<(), Failure> {
    let p = Pipeline::build(cfg)?;
    let window = p.window(cfg.regime.kappa)?;
    let grid = cfg.oracle_grid();
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut failure = None;
    for res in oracle_sweep(&p.cp, &p.frame, &window, &grid, cfg.regime.r) {
        match res {
            Ok(run) => {
                let rec = run.record();
                println!("N = {:>5}: {} edge zeros {:?}  ({:.0} ms)", rec.n, rec.edge_zero_count, rec.zeros_edge_rescaled, rec.elapsed_ms);
                rows.push(vec![
                    rec.n.to_string(),
                    rec.edge_zero_count.to_string(),
                    rec.zeros_edge_rescaled.iter().map(|z| format!("{z:e}")).collect::<Vec<_>>().join(";"),
                ]);
                records.push(rec);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    out.csv("oracle.csv", &["N", "edge_count", "edge_zeros"], &rows)?;
    out.json("oracle.json", &records)?;
    failure.map_or(Ok(()), |e| Err(e.into()))
}

fn cmd_compare(cfg: &ExperimentConfig, out: &Output, self_test: bool) -> Result<(), Failure> {
    if self_test {
        let checks = synthetic_self_test();
        print_checks(&checks);
        out.json("compare_self_test.json", &checks)?;
        return if checks.iter().all(|c| c.pass) {
            Ok(())
        } else {
            Err(Failure::Lib(Error::Numerical("synthetic self test failed".into())))
        };
    }
    let p = Pipeline::build(cfg)?;
    let report = compare(&p, cfg.regime.kappa, &cfg.oracle_grid());
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.edge_count.to_string(),
                opt(r.anchored_error),
                opt(r.uniform_error),
                opt(r.stray_ratio),
                opt(r.kernel_oracle),
                format!("{:e}", r.kernel_predicted),
                opt(r.kernel_deviation),
            ]
        })
        .collect();
    for r in &report.rows {
        println!(
            "N = {:>5}: edge {} {:?}  anchored err {}  kernel dev {}",
            r.n,
            r.edge_count,
            r.edge_zeros,
            opt(r.anchored_error),
            opt(r.kernel_deviation)
        );
    }
    print_checks(&report.checks);
    out.csv(
        "compare.csv",
        &["N", "edge_count", "anchored_error", "uniform_error", "stray_ratio", "kernel_oracle", "kernel_predicted", "kernel_deviation"],
        &rows,
    )?;
    out.json("compare.json", &report)?;
    match report.failure {
        Some(msg) => Err(Failure::Lib(Error::Numerical(msg))),
        None => Ok(()),
    }
}

fn cmd_sweep(cfg: &ExperimentConfig, out: &Output, kappa: &Option<Vec<f64>>, oracle_n: Option<u64>) -> Result<(), Failure> {
    let list = kappa.clone().unwrap_or_else(|| cfg.regime.kappa_list.clone());
    if list.is_empty() {
        return Err(invalid("the κ list is empty"));
    }
    let mut cfg = cfg.clone();
    cfg.regime.kappa_list = list.clone();
    cfg.validate()?;
    let p = Pipeline::build(&cfg)?;
    let rows = sweep_kappa(&p, &list, oracle_n)?;
    let mut csv_rows = Vec::new();
    println!("{:>8} {:>4} {:>8} {:>8}", "kappa", "K", "uniform", "oracle");
    for r in &rows {
        let show = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
        println!("{:>8} {:>4} {:>8} {:>8}", r.kappa, r.predicted_k, show(r.uniform_count), show(r.oracle_count));
        csv_rows.push(vec![r.kappa.to_string(), r.predicted_k.to_string(), show(r.uniform_count), show(r.oracle_count)]);
    }
    out.csv("sweep_kappa.csv", &["kappa", "predicted_k", "uniform_count", "oracle_count"], &csv_rows)?;
    out.json("sweep_kappa.json", &rows)
}

fn cmd_depth(cfg: &ExperimentConfig, out: &Output) -> Result<(), Failure> {
    let p = Pipeline::build(cfg)?;
    let n = &cfg.numerics;
    let rep = depth_scan(&p, cfg.regime.kappa, &n.parametrix_n_grid, n.depth, n.samples)?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| vec![r.p.to_string(), format!("{:e}", r.n), format!("{:e}", r.residual)])
        .collect();
    for r in &rep.rows {
        println!("p = {} N = {:e}: residual {:.3e}", r.p, r.n, r.residual);
    }
    print_checks(&rep.checks);
    println!("monotone in p: {}", rep.monotone);
    let scan = residual_scan(|nn| p.set(cfg.regime.kappa, nn), &n.parametrix_n_grid, n.samples)?;
    let base = FitCheck::new(
        "base parametrix",
        scan.iter().map(|r| (r.n, r.residual)).collect(),
        expected_residual_slope(cfg.spectral.nu, cfg.regime.kappa),
        0.15,
    );
    print_checks(std::slice::from_ref(&base));
    out.csv("depth.csv", &["p", "N", "residual"], &rows)?;
    out.json("depth.json", &json!({"depth": rep, "base": base, "residual_scan": scan}))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let dir = PathBuf::from(&cfg.output.dir);
    let name = match cli.cmd {
        Cmd::Potential => "potential",
        Cmd::Predict => "predict",
        Cmd::Oracle => "oracle",
        Cmd::Compare { .. } => "compare",
        Cmd::SweepKappa { .. } => "sweep-kappa",
        Cmd::SchlesingerDepth => "schlesinger-depth",
    };
    let out = Output::new(&dir, &cfg, name)?;
    match &cli.cmd {
        Cmd::Potential => cmd_potential(&cfg, &out),
        Cmd::Predict => {
            cmd_predict(&cfg, &out)?;
            let certs = certificate_grid()?;
            let p = Pipeline::build(&cfg)?;
            let dual = certificate_dual_route(&p, 1, 1e4).ok();
            out.json("certificates.json", &json!({"grid": certs, "dual_route_gap_at_1e4": dual}))
        }
        Cmd::Oracle => cmd_oracle(&cfg, &out),
        Cmd::Compare { self_test } => cmd_compare(&cfg, &out, *self_test),
        Cmd::SweepKappa { kappa, oracle_n } => cmd_sweep(&cfg, &out, kappa, *oracle_n),
        Cmd::SchlesingerDepth => cmd_depth(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
