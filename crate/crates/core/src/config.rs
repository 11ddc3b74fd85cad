//! Experiment configuration, validated before any computation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::micro::{micro_model, MicroModel};
use crate::num::{dec, DIGITS};
use crate::oracle::PerturbationWindow;
use crate::parametrix::{nearest_k, ParametrixSet};
use crate::schlesinger::MAX_DEPTH;
use crate::spectral::{build_critical_potential, conformal_frame, ConformalFrame, CriticalPotential};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub nu: u32,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { a: 1.0, b: 3.0, t: 1.0, nu: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MicroConfig {
    pub alpha: f64,
    /// Fine-tuning coefficients `f_0, f_1, ...` of degree below `ν`.
    pub f: Vec<f64>,
    pub kmax: usize,
}

impl Default for MicroConfig {
    fn default() -> Self {
        MicroConfig { alpha: 0.5, f: Vec::new(), kmax: 4 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeConfig {
    pub kappa: f64,
    pub r: i64,
    /// κ values for the population sweep.
    pub kappa_list: Vec<f64>,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        RegimeConfig { kappa: 1.25, r: 0, kappa_list: vec![0.25, 0.75, 1.25, 1.75] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    /// Requested decimal digits; at most the working precision.
    pub digits: u32,
    /// Oracle degrees `N`.
    pub n_grid: Vec<u64>,
    /// `N` values for parametrix-only experiments.
    pub parametrix_n_grid: Vec<f64>,
    /// Schlesinger depth `p`.
    pub depth: usize,
    /// Points on `∂𝔻` for boundary residuals.
    pub samples: usize,
    /// Disk policy: `auto` halves the radius until the frame is univalent,
    /// a number caps the radius.
    pub disk: DiskPolicy,
    /// Include the long-running `N = 256` oracle run.
    pub long: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum DiskPolicy {
    Auto(String),
    Radius(f64),
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            digits: 40,
            n_grid: vec![16, 32, 64, 128],
            parametrix_n_grid: vec![1e2, 1e3, 1e4, 1e5],
            depth: 3,
            samples: 128,
            disk: DiskPolicy::Auto("auto".into()),
            long: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "results".into(), formats: vec!["json".into(), "csv".into()] }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub spectral: SpectralConfig,
    pub micro: MicroConfig,
    pub regime: RegimeConfig,
    pub numerics: NumericsConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Oracle grid including the optional long run.
    pub fn oracle_grid(&self) -> Vec<u64> {
        let mut g = self.numerics.n_grid.clone();
        if self.numerics.long && !g.contains(&256) {
            g.push(256);
        }
        g
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.spectral;
        if !(s.a.is_finite() && s.b.is_finite() && s.t.is_finite()) {
            return invalid("spectral parameters must be finite");
        }
        if !(s.a > 0.0 && s.b > s.a) {
            return invalid("need 0 < a < b");
        }
        if !(s.t > 0.0) {
            return invalid("T must be positive");
        }
        if !(1..=4).contains(&s.nu) {
            return invalid("ν must lie in 1..=4");
        }
        let m = &self.micro;
        if !(m.alpha > -1.0 && m.alpha.is_finite()) {
            return invalid("α must exceed -1");
        }
        if m.f.len() > s.nu as usize || m.f.iter().any(|x| !x.is_finite()) {
            return invalid("f needs at most ν finite coefficients");
        }
        if m.f.len() == s.nu as usize && m.f.last().is_some_and(|&x| x != 0.0) {
            return invalid("f must have degree below ν");
        }
        let r = &self.regime;
        if !r.kappa.is_finite() || r.kappa_list.iter().any(|k| !k.is_finite()) {
            return invalid("κ must be finite");
        }
        if !(0..=1).contains(&r.r) {
            return invalid("r must be 0 or 1");
        }
        let kneed = r.kappa_list.iter().chain([&r.kappa]).map(|&k| nearest_k(dec(k)).max(0) as usize).max().unwrap_or(0);
        if m.kmax < kneed + 1 || m.kmax > 16 {
            return invalid(format!("kmax must lie in {}..=16 for the configured κ", kneed + 1));
        }
        let n = &self.numerics;
        if n.digits < 10 || n.digits > DIGITS {
            return invalid(format!("digits must lie in 10..={DIGITS}"));
        }
        if n.n_grid.iter().any(|&v| v == 0 || v > 4096) {
            return invalid("oracle N must lie in 1..=4096");
        }
        if n.parametrix_n_grid.iter().any(|&v| !(v >= 1.0) || !v.is_finite()) {
            return invalid("parametrix N must be finite and at least 1");
        }
        if n.depth == 0 || n.depth > MAX_DEPTH {
            return invalid(format!("depth must lie in 1..={MAX_DEPTH}"));
        }
        if n.samples < 4 {
            return invalid("at least 4 boundary samples are needed");
        }
        match &n.disk {
            DiskPolicy::Auto(s) if s == "auto" => {}
            DiskPolicy::Radius(x) if *x > 0.0 && *x < s.a => {}
            _ => return invalid("disk must be \"auto\" or a radius in (0, a)"),
        }
        if self.output.formats.iter().any(|f| f != "json" && f != "csv") {
            return invalid("output formats are json and csv");
        }
        Ok(())
    }
}

/// Spectral data, frame and microscopic model built from one configuration.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub config: ExperimentConfig,
    pub cp: Arc<CriticalPotential>,
    pub frame: Arc<ConformalFrame>,
    pub model: Arc<MicroModel>,
}

impl Pipeline {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let s = &config.spectral;
        let cp = build_critical_potential(s.a, s.b, s.t, s.nu)?;
        let mut frame = conformal_frame(&cp)?;
        if let DiskPolicy::Radius(x) = config.numerics.disk {
            let cap = dec(x);
            if cap < frame.disk_radius {
                frame.disk_radius = cap;
                frame.report.push(format!("radius capped at {x} by configuration"));
            }
        }
        let m = &config.micro;
        let model = micro_model(m.alpha, s.nu, &m.f, m.kmax)?;
        Ok(Pipeline { config: config.clone(), cp: Arc::new(cp), frame: Arc::new(frame), model: Arc::new(model) })
    }

    pub fn set(&self, kappa: f64, n: f64) -> Result<ParametrixSet> {
        ParametrixSet::new(
            self.cp.clone(),
            self.frame.clone(),
            self.model.clone(),
            dec(kappa),
            dec(n),
            self.config.regime.r,
        )
    }

    pub fn window(&self, kappa: f64) -> Result<PerturbationWindow> {
        PerturbationWindow::new(&self.frame, &self.model, dec(kappa))
    }
}
