//! Experiment configuration: JSON schema, validation and built-in presets.

use std::fmt;
use std::path::PathBuf;

use mfg_turnpike::mfg::{DataPreset, Scheme};
use mfg_turnpike::spectral::{critical_coupling, KernelEntry, KernelFile, KernelSpec, ModelParams};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    LinearBvp,
    Solve,
    TurnpikeSweep,
    CriticalSweep,
    Bifurcate,
    Chaos,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::LinearBvp => "linear-bvp",
            Experiment::Solve => "solve",
            Experiment::TurnpikeSweep => "turnpike-sweep",
            Experiment::CriticalSweep => "critical-sweep",
            Experiment::Bifurcate => "bifurcate",
            Experiment::Chaos => "chaos",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelChoice {
    /// K(x) = −cos(2πx).
    Cosine,
    TwoMode { a1: f64, a2: f64 },
    /// K(x) = −cos(2πx₁) on the 2-torus.
    CosineX1_2d,
    /// K(x) = −cos(2πx₁) − cos(2πx₂).
    CosineSum2d,
    Coefficients { dim: usize, coeffs: Vec<KernelEntry> },
}

impl KernelChoice {
    pub fn build(&self) -> mfg_turnpike::Result<KernelSpec> {
        match self {
            KernelChoice::Cosine => Ok(KernelSpec::cosine()),
            KernelChoice::TwoMode { a1, a2 } => KernelSpec::two_mode(*a1, *a2),
            KernelChoice::CosineX1_2d => Ok(KernelSpec::cosine_x1_2d()),
            KernelChoice::CosineSum2d => Ok(KernelSpec::cosine_sum_2d()),
            KernelChoice::Coefficients { dim, coeffs } => {
                KernelSpec::from_file_spec(&KernelFile { dim: *dim, coeffs: coeffs.clone() })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub nu: f64,
    pub kernel: KernelChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_over_gamma_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub nx: usize,
    pub nt: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: Scheme,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { nx: 16, nt: 400, tol: 1e-10, max_iter: 50, scheme: Scheme::Newton }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataBlock {
    pub preset: DataPreset,
    pub epsilon: f64,
}

impl Default for DataBlock {
    fn default() -> Self {
        DataBlock { preset: DataPreset::CosineMode, epsilon: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub mode_cutoff: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// Values of γ/γ_c in (0, 1).
    pub ratios: Vec<f64>,
    #[serde(default = "default_horizon_factor")]
    pub horizon_factor: f64,
}

fn default_horizon_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalBlock {
    pub t_list: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Cubic coefficient for the reduced-model comparison table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_beta: Option<f64>,
}

fn default_dt() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcationBlock {
    /// Offsets (γ − γ_c)/γ_c of the continuation schedule.
    pub offsets: Vec<f64>,
    #[serde(default = "default_eigen_offsets")]
    pub eigen_offsets: Vec<f64>,
}

fn default_eigen_offsets() -> Vec<f64> {
    vec![-0.01, -0.005, 0.0, 0.005, 0.01]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosBlock {
    pub n_list: Vec<usize>,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub model: ModelBlock,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub data: DataBlock,
    /// Horizon T for single solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_plots")]
    pub plots: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<CriticalBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bifurcation: Option<BifurcationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chaos: Option<ChaosBlock>,
}

fn default_plots() -> bool {
    true
}

/// A configuration problem, located at a line of the source text when
/// possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config error at line {l}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

/// Line of the first occurrence of `"key"` in the source text.
fn locate(text: Option<&str>, key: &str) -> Option<usize> {
    let pat = format!("\"{key}\"");
    text?.lines().position(|l| l.contains(&pat)).map(|i| i + 1)
}

/// Fully resolved model and experiment parameters.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: Experiment,
    pub kernel: KernelSpec,
    pub gamma_c: f64,
    /// Present for experiments at a single coupling.
    pub params: Option<ModelParams>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        if text.trim().is_empty() {
            return Err(ConfigError { line: None, message: "empty config".into() });
        }
        serde_json::from_str(text).map_err(|e| ConfigError { line: Some(e.line()), message: e.to_string() })
    }

    /// Checks kind-specific requirements for running as `experiment`.
    /// `text` is the source used to attach line numbers.
    pub fn validate(&self, experiment: Experiment, text: Option<&str>) -> Result<Resolved, ConfigError> {
        let err = |key: &str, message: String| ConfigError { line: locate(text, key), message };
        if self.schema_version != SCHEMA_VERSION {
            return Err(err(
                "schema_version",
                format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(err(
                    "experiment",
                    format!("config is for '{}' but the subcommand is '{}'", e.name(), experiment.name()),
                ));
            }
        }
        let m = &self.model;
        if !(m.nu > 0.0 && m.nu.is_finite()) {
            return Err(err("nu", format!("nu must be positive, got {}", m.nu)));
        }
        let kernel = m.kernel.build().map_err(|e| err("kernel", e.to_string()))?;
        let cc = critical_coupling(m.nu, &kernel);
        let gamma_c = cc.gamma_c;
        let n = &self.numerics;
        if n.nx < 4 || n.nx % 2 != 0 {
            return Err(err("nx", format!("nx must be even and at least 4, got {}", n.nx)));
        }
        if !(n.tol > 0.0) || n.max_iter == 0 {
            return Err(err("tol", "tol must be positive and max_iter nonzero".into()));
        }
        if !(self.data.epsilon >= 0.0 && self.data.epsilon < 1.0) {
            return Err(err("epsilon", format!("epsilon must lie in [0, 1), got {}", self.data.epsilon)));
        }
        let single = matches!(
            experiment,
            Experiment::Spectrum | Experiment::LinearBvp | Experiment::Solve | Experiment::Chaos
        );
        let params = if single {
            let gamma = match (m.gamma, m.gamma_over_gamma_c) {
                (Some(_), Some(_)) => {
                    return Err(err("gamma_over_gamma_c", "give either gamma or gamma_over_gamma_c, not both".into()))
                }
                (Some(g), None) => g,
                (None, Some(r)) => {
                    if !cc.is_finite() {
                        return Err(err(
                            "gamma_over_gamma_c",
                            "gamma_over_gamma_c is undefined: the kernel has no finite threshold".into(),
                        ));
                    }
                    r * gamma_c
                }
                (None, None) => return Err(err("model", format!("'{}' needs gamma or gamma_over_gamma_c", experiment.name()))),
            };
            Some(ModelParams::new(m.nu, gamma, kernel.clone()).map_err(|e| err("gamma", e.to_string()))?)
        } else {
            None
        };
        let needs_threshold = matches!(
            experiment,
            Experiment::TurnpikeSweep | Experiment::CriticalSweep | Experiment::Bifurcate | Experiment::Chaos
        );
        if needs_threshold && !cc.is_finite() {
            return Err(err("kernel", format!("'{}' needs a kernel with a finite threshold", experiment.name())));
        }
        if matches!(experiment, Experiment::CriticalSweep | Experiment::Bifurcate) && cc.is_degenerate() {
            return Err(err("kernel", format!("{} frequency pairs attain the threshold", cc.critical_set.len())));
        }
        if matches!(experiment, Experiment::LinearBvp | Experiment::Solve | Experiment::Chaos) {
            match self.horizon {
                Some(t) if t > 0.0 && t.is_finite() => {}
                _ => return Err(err("horizon", format!("'{}' needs a positive horizon", experiment.name()))),
            }
            if n.nt < 16 {
                return Err(err("nt", format!("nt must be at least 16, got {}", n.nt)));
            }
        }
        match experiment {
            Experiment::Spectrum => {
                if let Some(s) = &self.spectrum {
                    if s.mode_cutoff < 1 {
                        return Err(err("mode_cutoff", "mode_cutoff must be at least 1".into()));
                    }
                }
            }
            Experiment::TurnpikeSweep => {
                let s = self.sweep.as_ref().ok_or_else(|| err("model", "turnpike-sweep needs a 'sweep' block".into()))?;
                if s.ratios.len() < 2 || s.ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
                    return Err(err("ratios", "ratios need at least two values in (0, 1)".into()));
                }
                if !(s.horizon_factor > 0.0) {
                    return Err(err("horizon_factor", "horizon_factor must be positive".into()));
                }
            }
            Experiment::CriticalSweep => {
                let c = self
                    .critical
                    .as_ref()
                    .ok_or_else(|| err("model", "critical-sweep needs a 'critical' block".into()))?;
                if c.t_list.len() < 2 || c.t_list.iter().any(|t| !(*t > 0.0)) {
                    return Err(err("t_list", "t_list needs at least two positive horizons".into()));
                }
                if !(c.dt > 0.0) {
                    return Err(err("dt", "dt must be positive".into()));
                }
                if matches!(c.reduced_beta, Some(b) if !(b > 0.0)) {
                    return Err(err("reduced_beta", "reduced_beta must be positive".into()));
                }
                if !(self.data.epsilon > 0.0) {
                    return Err(err("epsilon", "critical-sweep needs epsilon > 0".into()));
                }
            }
            Experiment::Bifurcate => {
                let b = self
                    .bifurcation
                    .as_ref()
                    .ok_or_else(|| err("model", "bifurcate needs a 'bifurcation' block".into()))?;
                if b.offsets.is_empty() || b.offsets.iter().any(|d| *d < 1e-4) || b.offsets.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err("offsets", "offsets must be increasing and at least 1e-4".into()));
                }
                if b.eigen_offsets.len() < 2 {
                    return Err(err("eigen_offsets", "eigen_offsets needs at least two values".into()));
                }
            }
            Experiment::Chaos => {
                let c = self.chaos.as_ref().ok_or_else(|| err("model", "chaos needs a 'chaos' block".into()))?;
                if c.n_list.is_empty() || c.n_list.iter().any(|&n| n < 2) || c.seeds == 0 {
                    return Err(err("n_list", "n_list needs particle counts >= 2 and seeds > 0".into()));
                }
                if kernel.dim() != 1 {
                    return Err(err("kernel", "chaos diagnostics are one-dimensional".into()));
                }
                let p = params.as_ref().expect("single-coupling experiment");
                if p.gamma >= gamma_c {
                    return Err(err("gamma", "chaos needs a subcritical coupling".into()));
                }
                if self.horizon.unwrap_or(0.0) / n.nt as f64 > 1e-2 {
                    return Err(err("nt", "particle step horizon/nt must not exceed 1e-2".into()));
                }
            }
            Experiment::LinearBvp | Experiment::Solve => {}
        }
        Ok(Resolved { experiment, kernel, gamma_c, params })
    }
}

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
}

fn base(experiment: Experiment, kernel: KernelChoice, nu: f64) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        experiment: Some(experiment),
        model: ModelBlock { nu, kernel, gamma: None, gamma_over_gamma_c: None },
        numerics: Numerics::default(),
        data: DataBlock::default(),
        horizon: None,
        seed: 0,
        output: None,
        plots: true,
        spectrum: None,
        sweep: None,
        critical: None,
        bifurcation: None,
        chaos: None,
    }
}

fn spectrum_preset(name: &'static str, description: &'static str, kernel: KernelChoice, ratio: f64) -> Preset {
    let mut c = base(Experiment::Spectrum, kernel, 1.0);
    c.model.gamma_over_gamma_c = Some(ratio);
    c.spectrum = Some(SpectrumBlock { mode_cutoff: 4 });
    Preset { name, description, experiment: Experiment::Spectrum, config: c }
}

pub fn presets() -> Vec<Preset> {
    let mut out = vec![
        spectrum_preset("cosine-spectrum", "cosine kernel, nu = 1: threshold, C* and mode table", KernelChoice::Cosine, 0.5),
        spectrum_preset(
            "two-mode-threshold",
            "two-mode kernel at a1/a2 = 1/4: both pairs critical",
            KernelChoice::TwoMode { a1: 1.0, a2: 4.0 },
            0.5,
        ),
        spectrum_preset(
            "two-mode-above",
            "two-mode kernel at a1/a2 = 1/3: critical pair +-1",
            KernelChoice::TwoMode { a1: 1.0, a2: 3.0 },
            0.5,
        ),
        spectrum_preset(
            "two-mode-below",
            "two-mode kernel at a1/a2 = 1/5: critical pair +-2",
            KernelChoice::TwoMode { a1: 1.0, a2: 5.0 },
            0.5,
        ),
        spectrum_preset("2d-spectrum", "K = -cos(2 pi x1) on the 2-torus: critical pair +-(1,0)", KernelChoice::CosineX1_2d, 0.5),
    ];
    let mut lin = base(Experiment::LinearBvp, KernelChoice::Cosine, 1.0);
    lin.model.gamma_over_gamma_c = Some(0.5);
    lin.horizon = Some(4.0);
    lin.numerics.nt = 400;
    out.push(Preset {
        name: "cosine-linear",
        description: "linear envelope at gamma = gamma_c/2, T = 4",
        experiment: Experiment::LinearBvp,
        config: lin,
    });
    let mut solve = base(Experiment::Solve, KernelChoice::Cosine, 1.0);
    solve.model.gamma_over_gamma_c = Some(0.5);
    solve.horizon = Some(1.0);
    solve.numerics.nt = 200;
    out.push(Preset {
        name: "cosine-solve",
        description: "nonlinear solve at gamma = gamma_c/2, T = 1",
        experiment: Experiment::Solve,
        config: solve,
    });
    let mut tp = base(Experiment::TurnpikeSweep, KernelChoice::Cosine, 1.0);
    tp.numerics.nt = 1000;
    tp.sweep = Some(SweepBlock { ratios: vec![0.5, 0.7, 0.85, 0.93, 0.97], horizon_factor: 10.0 });
    out.push(Preset {
        name: "cosine-turnpike",
        description: "turnpike rate sweep over gamma/gamma_c in {0.5, ..., 0.97}",
        experiment: Experiment::TurnpikeSweep,
        config: tp,
    });
    let mut cr = base(Experiment::CriticalSweep, KernelChoice::Cosine, 1.0);
    cr.data.epsilon = 0.2;
    cr.critical = Some(CriticalBlock { t_list: vec![8.0, 16.0, 32.0, 64.0], dt: 0.01, reduced_beta: None });
    out.push(Preset {
        name: "cosine-critical",
        description: "midpoint amplitude at gamma = gamma_c for T in {8, 16, 32, 64}",
        experiment: Experiment::CriticalSweep,
        config: cr,
    });
    let mut bf = base(Experiment::Bifurcate, KernelChoice::Cosine, 1.0);
    bf.numerics.nx = 32;
    let offsets = (0..8).map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / 7.0)).collect();
    bf.bifurcation = Some(BifurcationBlock { offsets, eigen_offsets: default_eigen_offsets() });
    out.push(Preset {
        name: "cosine-bifurcation",
        description: "stationary branch for (gamma - gamma_c)/gamma_c in [1e-4, 1e-2]",
        experiment: Experiment::Bifurcate,
        config: bf,
    });
    let mut ch = base(Experiment::Chaos, KernelChoice::Cosine, 0.5);
    ch.model.gamma_over_gamma_c = Some(0.5);
    ch.data.epsilon = 0.3;
    ch.horizon = Some(2.0);
    ch.numerics.nt = 200;
    ch.chaos = Some(ChaosBlock { n_list: vec![100, 1000, 10000], seeds: 20 });
    out.push(Preset {
        name: "chaos-subcritical",
        description: "particles driven by the solved feedback at gamma = gamma_c/2",
        experiment: Experiment::Chaos,
        config: ch,
    });
    out
}

pub fn find_preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}
