//! Turnpike diagnostics and the critical midpoint experiment.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{preset_data, solve_mfg, DataPreset, MfgProblem, MfgTrajectory, Scheme, SolveOptions};
use crate::error::{Error, Result};
use crate::numerics::{fit_exponential_window, fit_line, fit_power_law, LineFit};
use crate::spectral::{c_star, critical_coupling, enumerate_modes, rho, sigma_xi, KernelSpec, ModelParams, SpectralOps};

#[derive(Debug, Clone, Serialize)]
pub struct TurnpikeReport {
    pub times: Vec<f64>,
    /// E(t) = ‖m − 1‖²_{H⁻¹} + ‖∇φ‖²_{L²}.
    pub energy: Vec<f64>,
    /// Decay rate of E fitted on [0.2T, 0.5T]; `None` when E ≡ 0.
    pub fitted_rate: Option<f64>,
    /// 2ρ(γ); `None` when the gap is closed.
    pub reference_rate: Option<f64>,
    pub ratio: Option<f64>,
    pub midpoint_energy: f64,
    pub flat: bool,
}

pub fn turnpike_report(traj: &MfgTrajectory, params: &ModelParams) -> Result<TurnpikeReport> {
    let times = traj.times();
    let t_final = traj.t_final;
    let in_window = times.iter().filter(|&&t| t >= 0.2 * t_final && t <= 0.5 * t_final).count();
    if in_window < 3 {
        return Err(Error::Fit(format!("only {in_window} time samples in the fit window")));
    }
    let energy: Vec<f64> = traj
        .diagnostics
        .iter()
        .map(|d| d.h_minus1 * d.h_minus1 + d.l2_grad * d.l2_grad)
        .collect();
    let flat = energy.iter().all(|&e| e == 0.0);
    let fitted_rate = if flat {
        None
    } else {
        Some(-fit_exponential_window(&times, &energy, 0.2 * t_final, 0.5 * t_final)?.slope)
    };
    let reference_rate = rho(params)?.value().map(|r| 2.0 * r);
    let ratio = match (fitted_rate, reference_rate) {
        (Some(f), Some(r)) => Some(f / r),
        _ => None,
    };
    Ok(TurnpikeReport {
        midpoint_energy: energy[traj.nt / 2],
        times,
        energy,
        fitted_rate,
        reference_rate,
        ratio,
        flat,
    })
}

impl TurnpikeReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,energy")?;
        for (t, e) in self.times.iter().zip(&self.energy) {
            writeln!(w, "{t:.17e},{e:.17e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub nx: usize,
    pub nt: usize,
    /// Horizon T = horizon_factor/ρ(γ).
    pub horizon_factor: f64,
    pub epsilon: f64,
    pub scheme: Scheme,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { nx: 16, nt: 1000, horizon_factor: 10.0, epsilon: 1e-3, scheme: Scheme::Newton, tol: 1e-10, max_iter: 50 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub gamma_ratio: f64,
    pub gamma: f64,
    pub t_final: f64,
    /// Half the fitted decay rate of E, comparable with ρ(γ).
    pub fitted_rate: f64,
    pub rho: f64,
    /// fitted_rate/(C*√(γ_c − γ)).
    pub normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub gamma_c: f64,
    pub c_star: f64,
    pub rows: Vec<SweepRow>,
    /// Fit of log fitted_rate against log(γ_c − γ).
    pub fit: LineFit,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "gamma_ratio,gamma,T,fitted_rate,rho,normalized")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.gamma_ratio, r.gamma, r.t_final, r.fitted_rate, r.rho, r.normalized
            )?;
        }
        Ok(())
    }
}

/// Nonlinear solves over subcritical couplings γ = r·γ_c with cosine-mode
/// data, each on the horizon T = horizon_factor/ρ(γ).
pub fn turnpike_sweep(nu: f64, kernel: &KernelSpec, ratios: &[f64], opts: &SweepOptions) -> Result<SweepTable> {
    let cc = critical_coupling(nu, kernel);
    if !cc.is_finite() {
        return Err(Error::NoThreshold);
    }
    let gamma_c = cc.gamma_c;
    let cs = c_star(nu, kernel)?;
    let solve_opts = SolveOptions { scheme: opts.scheme, tol: opts.tol, max_iter: opts.max_iter, ..SolveOptions::default() };
    let rows = ratios
        .par_iter()
        .map(|&r| {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Domain(format!("sweep ratio {r} must lie in (0, 1)")));
            }
            let params = ModelParams::new(nu, r * gamma_c, kernel.clone())?;
            let rho_g = rho(&params)?.value().ok_or(Error::GapClosed { gamma: params.gamma, gamma_c })?;
            let t_final = opts.horizon_factor / rho_g;
            let (m0, g) = preset_data(&params, &DataPreset::CosineMode, opts.epsilon, opts.nx)?;
            let prob = MfgProblem::new(params.clone(), m0, g, t_final, opts.nt)?;
            let traj = solve_mfg(&prob, &solve_opts)?;
            let rep = turnpike_report(&traj, &params)?;
            let fitted = 0.5 * rep.fitted_rate.ok_or_else(|| Error::Fit("flat trajectory".into()))?;
            Ok(SweepRow {
                gamma_ratio: r,
                gamma: params.gamma,
                t_final,
                fitted_rate: fitted,
                rho: rho_g,
                normalized: fitted / (cs * (gamma_c - params.gamma).sqrt()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dg: Vec<f64> = rows.iter().map(|r| gamma_c - r.gamma).collect();
    let rates: Vec<f64> = rows.iter().map(|r| r.fitted_rate).collect();
    let fit = fit_power_law(&dg, &rates)?;
    Ok(SweepTable { gamma_c, c_star: cs, rows, fit })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalRunOptions {
    pub nx: usize,
    /// Time step; n_t = round(T/dt).
    pub dt: f64,
    pub scheme: Scheme,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CriticalRunOptions {
    fn default() -> Self {
        CriticalRunOptions { nx: 16, dt: 0.01, scheme: Scheme::Newton, tol: 1e-10, max_iter: 50 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalRow {
    pub t_final: f64,
    pub midpoint_energy: f64,
    /// Cosine coefficient of the critical mode at T/2.
    pub a_mid: f64,
    pub sine_mid: f64,
    /// L² norm of m(T/2) − 1 with the critical pair removed.
    pub stable_mid: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalTable {
    pub gamma_c: f64,
    pub rows: Vec<CriticalRow>,
    /// Fit of log|a(T/2)| against log T.
    pub amplitude_fit: LineFit,
    /// Fit of log ‖P_s μ(T/2)‖ against T; the decay rate is −slope.
    pub stable_fit: Option<LineFit>,
    /// c₁ = min over ξ ≠ ±ξ₀ of √σ_ξ(γ_c).
    pub c1: f64,
}

impl CriticalTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "T,E_mid,a_mid,stable_mid")?;
        for r in &self.rows {
            writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e}", r.t_final, r.midpoint_energy, r.a_mid, r.stable_mid)?;
        }
        Ok(())
    }

    pub fn stable_rate(&self) -> Option<f64> {
        self.stable_fit.map(|f| -f.slope)
    }
}

/// c₁ = min over ξ ≠ 0, ±ξ₀ with |ξ|∞ ≤ cutoff of √σ_ξ(γ_c).
pub fn stable_complement_rate_bound(nu: f64, kernel: &KernelSpec, cutoff: i64) -> Result<f64> {
    let cc = critical_coupling(nu, kernel);
    let xi0 = cc.critical_mode()?.clone();
    let params = ModelParams::new(nu, cc.gamma_c, kernel.clone())?;
    let mut best = f64::INFINITY;
    for xi in enumerate_modes(kernel.dim(), cutoff.max(kernel.cutoff()).max(2)) {
        if xi == xi0 || xi == xi0.neg() {
            continue;
        }
        best = best.min(sigma_xi(&params, &xi)?);
    }
    Ok(best.max(0.0).sqrt())
}

/// Runs the forward–backward solver at γ = γ_c with cosine data of
/// amplitude ε for each horizon and records the midpoint amplitudes.
pub fn critical_midpoint_experiment(
    nu: f64,
    kernel: &KernelSpec,
    epsilon: f64,
    t_list: &[f64],
    opts: &CriticalRunOptions,
) -> Result<CriticalTable> {
    let cc = critical_coupling(nu, kernel);
    let xi0 = cc.critical_mode()?.clone();
    let params = ModelParams::new(nu, cc.gamma_c, kernel.clone())?;
    let (m0, g) = preset_data(&params, &DataPreset::CosineMode, epsilon, opts.nx)?;
    let ops = SpectralOps::new(kernel.dim(), opts.nx, kernel)?;
    let i0 = m0.index_of(&xi0.0);
    let i0n = m0.index_of(&xi0.neg().0);
    let solve_opts = SolveOptions {
        scheme: opts.scheme,
        tol: opts.tol,
        max_iter: opts.max_iter,
        ..SolveOptions::default()
    };
    let rows: Vec<CriticalRow> = t_list
        .par_iter()
        .map(|&t_final| {
            let nt = ((t_final / opts.dt).round() as usize).max(16);
            let nt = nt + nt % 2;
            let prob = MfgProblem::new(params.clone(), m0.clone(), g.clone(), t_final, nt)?;
            let traj = solve_mfg(&prob, &solve_opts)?;
            let mid = nt / 2;
            let d = traj.diagnostics[mid];
            if d.b_crit.abs() > 1e-8 {
                return Err(Error::Domain(format!(
                    "sine component {:e} of the critical mode violates the phase condition",
                    d.b_crit
                )));
            }
            let mh = ops.forward(&traj.m[mid]);
            let stable_mid = (1..ops.len)
                .filter(|&i| i != i0 && i != i0n)
                .map(|i| mh[i].norm_sqr())
                .sum::<f64>()
                .sqrt();
            Ok(CriticalRow {
                t_final,
                midpoint_energy: d.h_minus1 * d.h_minus1 + d.l2_grad * d.l2_grad,
                a_mid: d.a_crit,
                sine_mid: d.b_crit,
                stable_mid,
                iterations: traj.iterations,
            })
        })
        .collect::<Result<_>>()?;
    let ts: Vec<f64> = rows.iter().map(|r| r.t_final).collect();
    let amps: Vec<f64> = rows.iter().map(|r| r.a_mid.abs()).collect();
    let amplitude_fit = fit_power_law(&ts, &amps)?;
    let stable_fit = if rows.iter().all(|r| r.stable_mid > 0.0) {
        let ls: Vec<f64> = rows.iter().map(|r| r.stable_mid.ln()).collect();
        Some(fit_line(&ts, &ls)?)
    } else {
        None
    };
    let c1 = stable_complement_rate_bound(nu, kernel, (opts.nx / 3) as i64)?;
    Ok(CriticalTable { gamma_c: cc.gamma_c, rows, amplitude_fit, stable_fit, c1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridField;
    use std::f64::consts::PI;

    #[test]
    fn uniform_trajectory_is_flat() {
        let p = ModelParams::new(1.0, 10.0, KernelSpec::cosine()).unwrap();
        let prob = MfgProblem::new(
            p.clone(),
            GridField::constant(1, 16, 1.0).unwrap(),
            GridField::zeros(1, 16).unwrap(),
            1.0,
            40,
        )
        .unwrap();
        let tr = solve_mfg(&prob, &SolveOptions::default()).unwrap();
        let rep = turnpike_report(&tr, &p).unwrap();
        assert!(rep.flat && rep.fitted_rate.is_none());
        assert!(rep.energy.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn c1_for_cosine() {
        // K̂(±2) = 0, so c₁ = νk₂ = 16π²ν
        let c1 = stable_complement_rate_bound(1.0, &KernelSpec::cosine(), 5).unwrap();
        assert!((c1 - 16.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn subcritical_rate_close_to_twice_gap() {
        let gc = 8.0 * PI * PI;
        let p = ModelParams::new(1.0, 0.5 * gc, KernelSpec::cosine()).unwrap();
        let r = rho(&p).unwrap().value().unwrap();
        let t_final = 10.0 / r;
        let (m0, g) = preset_data(&p, &DataPreset::CosineMode, 1e-3, 16).unwrap();
        let prob = MfgProblem::new(p.clone(), m0, g, t_final, 2000).unwrap();
        let tr = solve_mfg(&prob, &SolveOptions { scheme: Scheme::Newton, ..Default::default() }).unwrap();
        let rep = turnpike_report(&tr, &p).unwrap();
        let ratio = rep.ratio.unwrap();
        assert!((0.85..=1.15).contains(&ratio), "{ratio}");
    }
}
