//! Mode-by-mode solution of the linearized forward–backward boundary value
//! problem U' = M_ξ U, μ̂(0) = μ₀, ŵ(T) = g_T, and the resulting linear
//! turnpike envelope.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::fit_exponential_window;
use crate::spectral::dispersion::{critical_coupling, mode_matrix, spectral_gap, Gap};
use crate::spectral::{EigenStructure, Frequency, GridField, ModeMatrix, ModelParams};

/// ρT above which the closed cosh/sinh form is replaced by the split form.
/// The closed form carries an absolute error of order ε·e^{ρT} on the
/// decaying component, so the switch happens early.
pub const SPLIT_THRESHOLD: f64 = 1.0;

/// Relative tolerance deciding σ_ξ = 0.
const NILPOTENT_TOL: f64 = 1e-12;

pub type Mat2 = [[f64; 2]; 2];

/// e^{tM} = cosh(ρt)I + (sinh(ρt)/ρ)M, or I + tM when σ = 0.
pub fn transfer_matrix(mode: &ModeMatrix, t: f64) -> Result<Mat2> {
    let m = &mode.m;
    let (c, s) = match mode.eigen_structure(NILPOTENT_TOL) {
        EigenStructure::Hyperbolic(rho) => ((rho * t).cosh(), (rho * t).sinh() / rho),
        EigenStructure::Nilpotent => (1.0, t),
        EigenStructure::Elliptic(_) => return Err(Error::EllipticMode(mode.sigma)),
    };
    Ok([[c + s * m[0][0], s * m[0][1]], [s * m[1][0], c + s * m[1][1]]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeBvpData {
    pub xi: Frequency,
    pub mu0: Complex64,
    pub g_t: Complex64,
    pub t_final: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BvpForm {
    Closed,
    Split,
}

#[derive(Debug, Clone)]
pub struct ModeTrajectory {
    pub xi: Frequency,
    pub times: Vec<f64>,
    pub w: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    pub rho: f64,
    pub form: BvpForm,
    /// Condition number (∞-norm) of the row-equilibrated 2×2 boundary system.
    pub condition: f64,
}

/// Uniform samples 0, T/(n−1), ..., T.
pub fn uniform_times(t_final: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n).map(|j| t_final * j as f64 / (n - 1) as f64).collect()
}

fn cond2(a: &Mat2) -> f64 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let n_a = (a[0][0].abs() + a[0][1].abs()).max(a[1][0].abs() + a[1][1].abs());
    let n_inv = (a[1][1].abs() + a[0][1].abs()).max(a[1][0].abs() + a[0][0].abs()) / det.abs();
    n_a * n_inv
}

fn equilibrated_cond(a: &Mat2) -> f64 {
    let r0 = a[0][0].abs().max(a[0][1].abs());
    let r1 = a[1][0].abs().max(a[1][1].abs());
    cond2(&[[a[0][0] / r0, a[0][1] / r0], [a[1][0] / r1, a[1][1] / r1]])
}

/// Solves a 2×2 system after row equilibration.
fn solve2(a: &Mat2, b: [Complex64; 2], context: &str) -> Result<[Complex64; 2]> {
    let r0 = a[0][0].abs().max(a[0][1].abs());
    let r1 = a[1][0].abs().max(a[1][1].abs());
    if r0 == 0.0 || r1 == 0.0 {
        return Err(Error::Singular { condition: f64::INFINITY, context: context.into() });
    }
    let a = [[a[0][0] / r0, a[0][1] / r0], [a[1][0] / r1, a[1][1] / r1]];
    let b = [b[0] / r0, b[1] / r1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let condition = cond2(&a);
    if !(condition.is_finite() && condition < 1e14) {
        return Err(Error::Singular { condition, context: context.into() });
    }
    Ok([
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (b[1] * a[0][0] - b[0] * a[1][0]) / det,
    ])
}

/// Solves the two-point problem for one mode and samples it at `times`.
pub fn solve_mode_bvp(
    params: &ModelParams,
    data: &ModeBvpData,
    times: &[f64],
) -> Result<ModeTrajectory> {
    solve_mode_bvp_as(params, data, times, None)
}

fn solve_mode_bvp_as(
    params: &ModelParams,
    data: &ModeBvpData,
    times: &[f64],
    force: Option<BvpForm>,
) -> Result<ModeTrajectory> {
    let t_final = data.t_final;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {t_final}")));
    }
    let mode = mode_matrix(params, &data.xi)?;
    let rho = match mode.eigen_structure(NILPOTENT_TOL) {
        EigenStructure::Hyperbolic(r) => r,
        EigenStructure::Nilpotent => {
            return Err(Error::GapClosed {
                gamma: params.gamma,
                gamma_c: critical_coupling(params.nu, &params.kernel).gamma_c,
            })
        }
        EigenStructure::Elliptic(_) => return Err(Error::EllipticMode(mode.sigma)),
    };
    let ctx = format!("boundary system for mode {}", data.xi);
    let mut w = Vec::with_capacity(times.len());
    let mut mu = Vec::with_capacity(times.len());
    let closed = force.map_or(rho * t_final <= SPLIT_THRESHOLD, |f| f == BvpForm::Closed);
    let (form, condition) = if closed {
        // Unknown U(0) = (w0, μ0); rows: μ(0) = μ0 and [e^{TM}U(0)]_w = g_T.
        let e_t = transfer_matrix(&mode, t_final)?;
        let sys = [[0.0, 1.0], [e_t[0][0], e_t[0][1]]];
        let u0 = solve2(&sys, [data.mu0, data.g_t], &ctx)?;
        for &t in times {
            let e = transfer_matrix(&mode, t)?;
            w.push(e[0][0] * u0[0] + e[0][1] * u0[1]);
            mu.push(e[1][0] * u0[0] + e[1][1] * u0[1]);
        }
        (BvpForm::Closed, equilibrated_cond(&sys))
    } else {
        // U(t) = α e^{ρ(t−T)} v₊ + β e^{−ρt} v₋ with M v± = ±ρ v±.
        let a = mode.m[0][0];
        let c = mode.m[1][0];
        let vp = [rho + a, c];
        let vm = [-rho + a, c];
        let d = (-rho * t_final).exp();
        let sys = [[d * vp[1], vm[1]], [vp[0], d * vm[0]]];
        let [alpha, beta] = solve2(&sys, [data.mu0, data.g_t], &ctx)?;
        for &t in times {
            let up = alpha * (rho * (t - t_final)).exp();
            let dn = beta * (-rho * t).exp();
            w.push(up * vp[0] + dn * vm[0]);
            mu.push(up * vp[1] + dn * vm[1]);
        }
        (BvpForm::Split, equilibrated_cond(&sys))
    };
    if w.iter().chain(&mu).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(format!("mode {} trajectory", data.xi)));
    }
    Ok(ModeTrajectory { xi: data.xi.clone(), times: times.to_vec(), w, mu, rho, form, condition })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeSummary {
    /// `None` when the deviation is identically zero.
    pub fitted_rate: Option<f64>,
    pub rho_gamma: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LinearEnvelope {
    pub times: Vec<f64>,
    pub h_minus1_m: Vec<f64>,
    pub l2_grad_phi: Vec<f64>,
    pub summary: EnvelopeSummary,
}

/// Solves every resolved mode of (m₀ − 1, g − ḡ) and assembles
/// ‖m(t) − 1‖_{H⁻¹} and ‖∇φ(t)‖_{L²}. The interior rate is fitted on
/// log ‖m − 1‖_{H⁻¹} over [0.2T, 0.5T].
pub fn linear_turnpike_envelope(
    params: &ModelParams,
    m0: &GridField,
    g: &GridField,
    t_final: f64,
    times: &[f64],
) -> Result<LinearEnvelope> {
    if m0.dim() != g.dim() || m0.n() != g.n() {
        return Err(Error::Domain("m0 and g live on different grids".into()));
    }
    if !m0.is_density(1e-12) {
        return Err(Error::Domain("m0 must be a density with unit mass".into()));
    }
    let cutoff = ((m0.n() / 2) as i64 - 1).max(params.kernel.cutoff()).max(1);
    let rho_gamma = match spectral_gap(params, cutoff)? {
        Gap::Open(r) => r,
        Gap::Closed => {
            return Err(Error::GapClosed {
                gamma: params.gamma,
                gamma_c: critical_coupling(params.nu, &params.kernel).gamma_c,
            })
        }
    };
    let half = (m0.n() / 2) as i64;
    let modes: Vec<(Frequency, Complex64, Complex64)> = (1..m0.len())
        .filter_map(|i| {
            let xi = m0.freq(i);
            if xi.iter().any(|&v| v == -half) {
                return None;
            }
            let (a, b) = (m0.spectrum()[i], g.spectrum()[i]);
            (a.norm() > 0.0 || b.norm() > 0.0).then(|| (Frequency(xi), a, b))
        })
        .collect();
    let contributions: Vec<(Vec<f64>, Vec<f64>)> = modes
        .par_iter()
        .map(|(xi, mu0, g_t)| {
            let data = ModeBvpData { xi: xi.clone(), mu0: *mu0, g_t: *g_t, t_final };
            let traj = solve_mode_bvp(params, &data, times)?;
            let k = xi.k();
            Ok((
                traj.mu.iter().map(|z| z.norm_sqr() / k).collect(),
                traj.w.iter().map(|z| k * z.norm_sqr()).collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let mut hm = vec![0.0; times.len()];
    let mut gp = vec![0.0; times.len()];
    for (a, b) in &contributions {
        for j in 0..times.len() {
            hm[j] += a[j];
            gp[j] += b[j];
        }
    }
    let h_minus1_m: Vec<f64> = hm.into_iter().map(f64::sqrt).collect();
    let l2_grad_phi: Vec<f64> = gp.into_iter().map(f64::sqrt).collect();
    let fitted_rate = if h_minus1_m.iter().all(|&v| v == 0.0) {
        None
    } else {
        Some(-fit_exponential_window(times, &h_minus1_m, 0.2 * t_final, 0.5 * t_final)?.slope)
    };
    Ok(LinearEnvelope {
        times: times.to_vec(),
        h_minus1_m,
        l2_grad_phi,
        summary: EnvelopeSummary { fitted_rate, rho_gamma, ratio: fitted_rate.map(|r| r / rho_gamma) },
    })
}

impl LinearEnvelope {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,h_minus1_m,l2_grad_phi")?;
        for j in 0..self.times.len() {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", self.times[j], self.h_minus1_m[j], self.l2_grad_phi[j])?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.summary).expect("plain data")
    }
}
