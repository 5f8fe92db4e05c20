//! Experiment dispatch and artifact emission.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mfg_turnpike::linear_bvp::{linear_turnpike_envelope, uniform_times};
use mfg_turnpike::mfg::{
    critical_midpoint_experiment, preset_data, solve_mfg, turnpike_report, turnpike_sweep, CriticalRunOptions,
    MfgProblem, SolveOptions, SweepOptions,
};
use mfg_turnpike::particles::chaos_experiment;
use mfg_turnpike::reduced::{midpoint_scaling, ReducedModel};
use mfg_turnpike::spectral::{mode_report, ModelParams};
use mfg_turnpike::stationary::{
    beta_estimates, continue_branch, critical_eigen_tracking, pitchfork_check, subcritical_probe, BranchOptions,
};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Experiment, ExperimentConfig, Resolved};
use crate::svg::{Plot, Series};

pub const FAILURE_MARKER: &str = "FAILED";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug)]
pub enum RunError {
    Solver(String),
    Io(io::Error),
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<mfg_turnpike::Error> for RunError {
    fn from(e: mfg_turnpike::Error) -> Self {
        RunError::Solver(e.to_string())
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Solver(m) => write!(f, "solver failure: {m}"),
            RunError::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

pub struct Artifacts {
    dir: PathBuf,
    pub records: Vec<ArtifactRecord>,
    plots: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl Artifacts {
    pub fn new(dir: &Path, plots: bool) -> Self {
        Artifacts { dir: dir.to_path_buf(), records: Vec::new(), plots }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.records.push(ArtifactRecord { file: name.into(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> io::Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn svg(&mut self, name: &str, plot: &Plot) -> io::Result<()> {
        if self.plots {
            self.write(name, plot.render().as_bytes())
        } else {
            Ok(())
        }
    }
}

fn solve_options(cfg: &ExperimentConfig) -> SolveOptions {
    SolveOptions {
        scheme: cfg.numerics.scheme,
        tol: cfg.numerics.tol,
        max_iter: cfg.numerics.max_iter,
        ..SolveOptions::default()
    }
}

fn problem(cfg: &ExperimentConfig, params: &ModelParams) -> Result<MfgProblem, RunError> {
    let (m0, g) = preset_data(params, &cfg.data.preset, cfg.data.epsilon, cfg.numerics.nx)?;
    Ok(MfgProblem::new(params.clone(), m0, g, cfg.horizon.expect("validated"), cfg.numerics.nt)?)
}

/// Runs one experiment, writing its artifacts; returns a short summary.
pub fn execute(cfg: &ExperimentConfig, res: &Resolved, art: &mut Artifacts) -> Result<Value, RunError> {
    match res.experiment {
        Experiment::Spectrum => spectrum(cfg, res, art),
        Experiment::LinearBvp => linear(cfg, res, art),
        Experiment::Solve => solve(cfg, res, art),
        Experiment::TurnpikeSweep => sweep(cfg, res, art),
        Experiment::CriticalSweep => critical(cfg, res, art),
        Experiment::Bifurcate => bifurcate(cfg, res, art),
        Experiment::Chaos => chaos(cfg, res, art),
    }
}

fn spectrum(cfg: &ExperimentConfig, res: &Resolved, art: &mut Artifacts) -> Result<Value, RunError> {
    let params = res.params.as_ref().expect("validated");
    let cutoff = cfg.spectrum.as_ref().map_or(4, |s| s.mode_cutoff).max(res.kernel.cutoff());
    let rep = mode_report(params, cutoff)?;
    art.csv("modes.csv", |w| rep.write_csv(w))?;
    let summary = json!({
        "nu": rep.nu,
        "gamma": rep.gamma,
        "gamma_c": if rep.gamma_c.is_finite() { json!(rep.gamma_c) } else { json!("inf") },
        "critical_set": rep.critical_set,
        "c_star": rep.c_star,
        "rho_gamma": rep.rho_gamma,
    });
    art.json("spectrum.json", &summary)?;
    let pts = rep.modes.iter().map(|m| (m.k_xi, m.sigma)).collect();
    art.svg("sigma.svg", &Plot::new("dispersion relation", "k_xi", "sigma_xi").with(Series::markers("sigma", pts)))?;
    Ok(summary)
}

fn linear(cfg: &ExperimentConfig, res: &Resolved, art: &mut Artifacts) -> Result<Value, RunError> {
    let params = res.params.as_ref().expect("validated");
    let t_final = cfg.horizon.expect("validated");
    let (m0, g) = preset_data(params, &cfg.data.preset, cfg.data.epsilon, cfg.numerics.nx)?;
    let env = linear_turnpike_envelope(params, &m0, &g, t_final, &uniform_times(t_final, cfg.numerics.nt + 1))?;
    art.csv("envelope.csv", |w| env.write_csv(w))?;
    let summary = env.summary_json();
    art.json("envelope.json", &summary)?;
    let plot = Plot::new("linear envelope", "t", "norm")
        .log_y()
        .with(Series::line("|m - 1|_H-1", env.times.iter().copied().zip(env.h_minus1_m.iter().copied()).collect()))
        .with(Series::line("|grad phi|_L2", env.times.iter().copied().zip(env.l2_grad_phi.iter().copied()).collect()));
    art.svg("envelope.svg", &plot)?;
    Ok(summary)
}

fn solve(cfg: &ExperimentConfig, res: &Resolved, art: &mut Artifacts) -> Result<Value, RunError> {
    let params = res.params.as_ref().expect("validated");
    let prob = problem(cfg, params)?;
    let traj = solve_mfg(&prob, &solve_options(cfg))?;
    art.csv("trajectory.csv", |w| traj.write_csv(w))?;
    art.csv("fields.bin", |w| traj.write_binary(w))?;
    let rep = turnpike_report(&traj, params)?;
    art.csv("energy.csv", |w| rep.write_csv(w))?;
    let summary = json!({
        "iterations": traj.iterations,
        "residual": traj.residual,
        "scheme": traj.scheme,
        "energy_rate": rep.fitted_rate,
        "reference_rate": rep.reference_rate,
        "ratio": rep.ratio,
        "midpoint_energy": rep.midpoint_energy,
    });
    art.json("solve.json", &summary)?;
    let pts = rep.times.iter().copied().zip(rep.energy.iter().copied()).collect();
    art.svg("energy.svg", &Plot::new("turnpike energy", "t", "E(t)").log_y().with(Series::line("E", pts)))?;
    Ok(summary)
}

fn sweep(cfg: &ExperimentConfig, res: &Resolved, art: &mut Artifacts) -> Result<Value, RunError> {
    let block = cfg.sweep.as_ref().expect("validated");
    let opts = SweepOptions {
        nx: cfg.numerics.nx,
        nt: cfg.numerics.nt,
        horizon_factor: block.horizon_factor,
        epsilon: cfg.data.epsilon,
        scheme: cfg.numerics.scheme,
        tol: cfg.numerics.tol,
        max_iter: cfg.numerics.max_iter,
    };
    let table = turnpike_sweep(cfg.model.nu, &res.kernel, &block.ratios, &opts)?;
    art.csv("sweep.csv", |w| table.write_csv(w))?;
    let summary = json!({
        "gamma_c": table.gamma_c,
        "c_star": table.c_star,
        "slope": table.fit.slope,
        "slope_stderr": table.fit.slope_stderr,
        "prefactor": table.fit.intercept.exp(),
        "normalized": table.rows.iter().map(|r| r.normalized).collect::<Vec<_>>(),
    });
    art.json("sweep.json", &summary)?;
    let measured = table.rows.iter().map(|r| (table.gamma_c - r.gamma, r.fitted_rate)).collect();
    let reference = table.rows.iter().map(|r| (table.gamma_c - r.gamma, table.c_star * (table.gamma_c - r.gamma).sqrt())).collect();
    let plot = Plot::new("turnpike rate", "gamma_c - gamma", "rate")
        .log_x()
        .log_y()
        .with(Series::markers("fitted", measured))
        .with(Series::line("C* sqrt(gamma_c - gamma)", reference));
    art.svg("sweep.svg", &plot)?;
    Ok(summary)
}

fn critical(cfg: &ExperimentConfig, res: &Resolved, art: &mut Artifacts) -> Result<Value, RunError> {
    let block = cfg.critical.as_ref().expect("validated");
    let opts = CriticalRunOptions {
        nx: cfg.numerics.nx,
        dt: block.dt,
        scheme: cfg.numerics.scheme,
        tol: cfg.numerics.tol,
        max_iter: cfg.numerics.max_iter,
    };
    let table = critical_midpoint_experiment(cfg.model.nu, &res.kernel, cfg.data.epsilon, &block.t_list, &opts)?;
    art.csv("critical.csv", |w| table.write_csv(w))?;
    let mut plot = Plot::new("critical midpoint amplitude", "T", "|a(T/2)|")
        .log_x()
        .log_y()
        .with(Series::markers("full solver", table.rows.iter().map(|r| (r.t_final, r.a_mid.abs())).collect()));
    let mut summary = json!({
        "gamma_c": table.gamma_c,
        "amplitude_exponent": table.amplitude_fit.slope,
        "amplitude_exponent_stderr": table.amplitude_fit.slope_stderr,
        "stable_rate": table.stable_rate(),
        "c1": table.c1,
    });
    if let Some(beta) = block.reduced_beta {
        let model = ReducedModel::cubic(beta)?;
        let red = midpoint_scaling(&model, cfg.data.epsilon, &block.t_list, 1e-3)?;
        art.csv("reduced.csv", |w| red.write_csv(w))?;
        summary["reduced_exponent"] = json!(red.exponent());
        plot = plot.with(Series::line("reduced cubic", red.rows.iter().map(|r| (r.t_final, r.a_mid.abs())).collect()));
    }
    art.json("critical.json", &summary)?;
    art.svg("midpoint.svg", &plot)?;
    Ok(summary)
}

fn bifurcate(cfg: &ExperimentConfig, res: &Resolved, art: &mut Artifacts) -> Result<Value, RunError> {
    let block = cfg.bifurcation.as_ref().expect("validated");
    let nu = cfg.model.nu;
    let gc = res.gamma_c;
    let schedule: Vec<f64> = block.offsets.iter().map(|d| gc * (1.0 + d)).collect();
    let opts = BranchOptions { nx: cfg.numerics.nx, tol: cfg.numerics.tol.min(1e-10), seed_amplitude: None };
    let diag = continue_branch(nu, &res.kernel, &schedule, &opts)?;
    art.csv("diagram.csv", |w| diag.write_csv(w))?;
    let eig: Vec<f64> = block.eigen_offsets.iter().map(|d| gc * (1.0 + d)).collect();
    let track = critical_eigen_tracking(nu, &res.kernel, &eig, cfg.numerics.nx)?;
    let betas = beta_estimates(&diag, track.alpha_hat);
    let pitchfork = match diag.points.last() {
        Some(p) => {
            let params = ModelParams::new(nu, p.state.gamma, res.kernel.clone())?;
            Some(pitchfork_check(p, &params, &[0.125, 0.25, 0.5, 0.75], 1e-9)?)
        }
        None => None,
    };
    let sub = ModelParams::new(nu, 0.99 * gc, res.kernel.clone())?;
    let sub_amps = subcritical_probe(&sub, &[0.05, 0.1, 0.2], cfg.numerics.nx)?;
    let summary = json!({
        "gamma_c": gc,
        "points": diag.points.len(),
        "exponent": diag.exponent(),
        "alpha_over_beta": diag.alpha_over_beta,
        "alpha_hat": track.alpha_hat,
        "crossing": track.crossing,
        "beta_hat": betas,
        "pitchfork": pitchfork,
        "subcritical_amplitudes": sub_amps,
        "failure": diag.failure,
    });
    art.json("bifurcation.json", &summary)?;
    let pts = diag.points.iter().map(|p| (p.state.gamma - gc, p.amplitude)).collect();
    art.svg(
        "bifurcation.svg",
        &Plot::new("stationary branch", "gamma - gamma_c", "A").log_x().log_y().with(Series::markers("A(gamma)", pts)),
    )?;
    if let Some(f) = diag.failure {
        return Err(RunError::Solver(format!("continuation truncated: {f}")));
    }
    Ok(summary)
}

fn chaos(cfg: &ExperimentConfig, res: &Resolved, art: &mut Artifacts) -> Result<Value, RunError> {
    let block = cfg.chaos.as_ref().expect("validated");
    let params = res.params.as_ref().expect("validated");
    let prob = problem(cfg, params)?;
    let seeds: Vec<u64> = (0..block.seeds as u64).map(|s| cfg.seed + s).collect();
    let rep = chaos_experiment(&prob, &solve_options(cfg), &block.n_list, &seeds)?;
    art.csv("chaos.csv", |w| rep.write_csv(w))?;
    let summary = json!({ "surrogate": rep.surrogate, "summaries": rep.summaries });
    art.json("chaos.json", &summary)?;
    let mut plot = Plot::new("empirical vs mean-field W2", "N", "median W2").log_x().log_y();
    let mut times: Vec<f64> = rep.summaries.iter().map(|s| s.t).collect();
    times.dedup();
    for t in times {
        let pts = rep.summaries.iter().filter(|s| s.t == t).map(|s| (s.n as f64, s.median)).collect();
        plot = plot.with(Series::line(&format!("t = {t}"), pts));
    }
    art.svg("chaos.svg", &plot)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub library_version: &'static str,
    pub experiment: &'static str,
    pub preset: Option<String>,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub status: &'static str,
    pub error: Option<String>,
    pub summary: Option<Value>,
    pub artifacts: Vec<ArtifactRecord>,
}

/// Runs the experiment in `dir` and writes the manifest last. Returns the
/// error when the solver failed; partial artifacts and a failure marker
/// remain on disk.
pub fn run_to_dir(
    cfg: &ExperimentConfig,
    res: &Resolved,
    dir: &Path,
    preset: Option<String>,
    threads: usize,
) -> Result<Value, RunError> {
    let start = Instant::now();
    let mut art = Artifacts::new(dir, cfg.plots);
    let canonical = serde_json::to_string(cfg).map_err(io::Error::other)?;
    art.json("config.json", cfg)?;
    let outcome = execute(cfg, res, &mut art);
    if let Err(e) = &outcome {
        art.write(FAILURE_MARKER, format!("{e}\n").as_bytes())?;
    }
    let manifest = Manifest {
        tool: "turnpike",
        tool_version: env!("CARGO_PKG_VERSION"),
        library_version: mfg_turnpike::VERSION,
        experiment: res.experiment.name(),
        preset,
        config: cfg.clone(),
        config_sha256: sha256_hex(canonical.as_bytes()),
        seed: cfg.seed,
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        status: if outcome.is_ok() { "ok" } else { "failed" },
        error: outcome.as_ref().err().map(|e| e.to_string()),
        summary: outcome.as_ref().ok().cloned(),
        artifacts: art.records.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST), text)?;
    outcome
}
