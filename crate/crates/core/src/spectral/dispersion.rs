//! Dispersion relation of the linearized system around the uniform state,
//! the critical coupling and the spectral gap.

use std::io::Write;

use serde::Serialize;

use super::kernel::{Frequency, KernelSpec};
use crate::error::{Error, Result};

/// Relative tolerance below which two mode thresholds count as tied.
pub const TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub nu: f64,
    pub gamma: f64,
    pub kernel: KernelSpec,
}

impl ModelParams {
    pub fn new(nu: f64, gamma: f64, kernel: KernelSpec) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Domain(format!("nu must be positive, got {nu}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be nonnegative, got {gamma}")));
        }
        Ok(ModelParams { nu, gamma, kernel })
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.nu, gamma, self.kernel.clone())
    }
}

fn check_nonzero(xi: &Frequency) -> Result<()> {
    if xi.is_zero() {
        Err(Error::Domain("the zero mode is excluded".into()))
    } else {
        Ok(())
    }
}

/// σ_ξ(γ) = ν²k_ξ² + γ k_ξ K̂(ξ), formed from the same products as M_ξ².
pub fn sigma_xi(params: &ModelParams, xi: &Frequency) -> Result<f64> {
    check_nonzero(xi)?;
    let k = xi.k();
    let nk = params.nu * k;
    Ok(nk * nk + params.gamma * params.kernel.khat(xi) * k)
}

/// Coupling at which a single mode with K̂(ξ) < 0 turns neutral.
pub fn mode_threshold(nu: f64, kernel: &KernelSpec, xi: &Frequency) -> Option<f64> {
    let khat = kernel.khat(xi);
    (khat < 0.0).then(|| nu * nu * xi.k() / khat.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalCoupling {
    /// `f64::INFINITY` when no coefficient is negative.
    pub gamma_c: f64,
    /// One representative per ±ξ pair attaining the minimum.
    pub critical_set: Vec<Frequency>,
}

impl CriticalCoupling {
    pub fn is_finite(&self) -> bool {
        self.gamma_c.is_finite()
    }

    pub fn is_degenerate(&self) -> bool {
        self.critical_set.len() > 1
    }

    /// ξ₀ when the critical set is a single pair.
    pub fn critical_mode(&self) -> Result<&Frequency> {
        match self.critical_set.len() {
            0 => Err(Error::NoThreshold),
            1 => Ok(&self.critical_set[0]),
            n => Err(Error::DegenerateCriticalMode(n)),
        }
    }
}

/// γ_c = min over K̂(ξ)<0 of ν²k_ξ/|K̂(ξ)|, with ties grouped by ±ξ pair.
pub fn critical_coupling(nu: f64, kernel: &KernelSpec) -> CriticalCoupling {
    let mut best = f64::INFINITY;
    let mut thresholds = Vec::new();
    for (xi, _) in kernel.iter() {
        if *xi != xi.pair_representative() {
            continue;
        }
        if let Some(g) = mode_threshold(nu, kernel, xi) {
            best = best.min(g);
            thresholds.push((xi.clone(), g));
        }
    }
    let critical_set = thresholds
        .into_iter()
        .filter(|(_, g)| (g - best).abs() <= TIE_RTOL * best)
        .map(|(xi, _)| xi)
        .collect();
    CriticalCoupling { gamma_c: best, critical_set }
}

/// C* = √(k_{ξ₀}|K̂(ξ₀)|).
pub fn c_star(nu: f64, kernel: &KernelSpec) -> Result<f64> {
    let cc = critical_coupling(nu, kernel);
    let xi0 = cc.critical_mode()?;
    Ok((xi0.k() * kernel.khat(xi0).abs()).sqrt())
}

/// All ξ ∈ ℤ^d with 0 < |ξ|∞ ≤ cutoff.
pub fn enumerate_modes(dim: usize, cutoff: i64) -> Vec<Frequency> {
    let side = (2 * cutoff + 1) as usize;
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut comps = vec![0i64; dim];
            for c in comps.iter_mut().rev() {
                *c = (idx % side) as i64 - cutoff;
                idx /= side;
            }
            Frequency(comps)
        })
        .filter(|f| !f.is_zero())
        .collect()
}

/// Default enumeration cutoff: n/3 (two-thirds boundary), never below the
/// kernel cutoff.
pub fn default_mode_cutoff(kernel: &KernelSpec, points_per_axis: usize) -> i64 {
    ((points_per_axis / 3) as i64).max(kernel.cutoff()).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Gap {
    Open(f64),
    Closed,
}

impl Gap {
    pub fn value(&self) -> Option<f64> {
        match self {
            Gap::Open(r) => Some(*r),
            Gap::Closed => None,
        }
    }
}

/// ρ(γ) = min √σ_ξ(γ) over 0 < |ξ|∞ ≤ mode_cutoff.
pub fn spectral_gap(params: &ModelParams, mode_cutoff: i64) -> Result<Gap> {
    if mode_cutoff < params.kernel.cutoff() {
        return Err(Error::Domain(format!(
            "mode cutoff {mode_cutoff} below kernel cutoff {}",
            params.kernel.cutoff()
        )));
    }
    let mut min_sigma = f64::INFINITY;
    for xi in enumerate_modes(params.kernel.dim(), mode_cutoff.max(1)) {
        min_sigma = min_sigma.min(sigma_xi(params, &xi)?);
    }
    Ok(if min_sigma > 0.0 { Gap::Open(min_sigma.sqrt()) } else { Gap::Closed })
}

/// Spectral gap with the default cutoff.
pub fn rho(params: &ModelParams) -> Result<Gap> {
    spectral_gap(params, params.kernel.cutoff().max(1))
}

/// The 2×2 mode matrix M_ξ acting on (ŵ_ξ, μ̂_ξ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMatrix {
    pub m: [[f64; 2]; 2],
    pub k: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenStructure {
    /// Real pair ±ρ.
    Hyperbolic(f64),
    /// Double zero eigenvalue, nonzero matrix.
    Nilpotent,
    /// Purely imaginary pair ±iω.
    Elliptic(f64),
}

impl ModeMatrix {
    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn square(&self) -> [[f64; 2]; 2] {
        mat_mul(&self.m, &self.m)
    }

    /// Characteristic polynomial λ² − tr λ + det; with zero trace this is λ² − σ.
    pub fn eigen_structure(&self, tol: f64) -> EigenStructure {
        let disc = -self.det();
        let scale = self.k * self.k;
        if disc > tol * scale {
            EigenStructure::Hyperbolic(disc.sqrt())
        } else if disc < -tol * scale {
            EigenStructure::Elliptic((-disc).sqrt())
        } else {
            EigenStructure::Nilpotent
        }
    }

    /// ρ_ξ when the mode is hyperbolic.
    pub fn rate(&self) -> Option<f64> {
        (self.sigma > 0.0).then(|| self.sigma.sqrt())
    }
}

pub(crate) fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn mode_matrix(params: &ModelParams, xi: &Frequency) -> Result<ModeMatrix> {
    check_nonzero(xi)?;
    let k = xi.k();
    let nk = params.nu * k;
    let khat = params.kernel.khat(xi);
    Ok(ModeMatrix {
        m: [[nk, -params.gamma * khat], [-k, -nk]],
        k,
        sigma: sigma_xi(params, xi)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRow {
    pub xi: Frequency,
    pub k_xi: f64,
    pub khat: f64,
    pub sigma: f64,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub nu: f64,
    pub gamma: f64,
    pub modes: Vec<ModeRow>,
    pub gamma_c: f64,
    pub critical_set: Vec<Frequency>,
    pub c_star: Option<f64>,
    /// `None` when the gap is closed.
    pub rho_gamma: Option<f64>,
}

/// Per-mode table over one representative of each ±ξ pair with |ξ|∞ ≤ cutoff.
pub fn mode_report(params: &ModelParams, mode_cutoff: i64) -> Result<ModeReport> {
    let cutoff = mode_cutoff.max(params.kernel.cutoff()).max(1);
    let mut modes = Vec::new();
    for xi in enumerate_modes(params.kernel.dim(), cutoff) {
        if xi != xi.pair_representative() {
            continue;
        }
        let sigma = sigma_xi(params, &xi)?;
        modes.push(ModeRow {
            k_xi: xi.k(),
            khat: params.kernel.khat(&xi),
            rho: (sigma > 0.0).then(|| sigma.sqrt()),
            sigma,
            xi,
        });
    }
    modes.sort_by(|a, b| a.k_xi.total_cmp(&b.k_xi).then(a.xi.cmp(&b.xi)));
    let cc = critical_coupling(params.nu, &params.kernel);
    let c_star = c_star(params.nu, &params.kernel).ok();
    let rho_gamma = spectral_gap(params, cutoff)?.value();
    Ok(ModeReport {
        nu: params.nu,
        gamma: params.gamma,
        modes,
        gamma_c: cc.gamma_c,
        critical_set: cc.critical_set,
        c_star,
        rho_gamma,
    })
}

impl ModeReport {
    /// CSV with columns xi,k_xi,khat,sigma,rho. Multi-dimensional
    /// frequencies are written with `;` between components; `rho` is empty
    /// for non-hyperbolic modes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "xi,k_xi,khat,sigma,rho")?;
        for row in &self.modes {
            let rho = row.rho.map(|r| format!("{r:.17e}")).unwrap_or_default();
            writeln!(w, "{},{:.17e},{:.17e},{:.17e},{}", row.xi, row.k_xi, row.khat, row.sigma, rho)?;
        }
        Ok(())
    }
}
