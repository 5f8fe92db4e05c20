//! Spectral norms, the interaction quadratic form and kernel convolution.

use num_complex::Complex64;

use super::grid::GridField;
use super::kernel::KernelSpec;
use crate::error::{Error, Result};

/// Mean tolerance used when a field must be mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

fn k_of(xi: &[i64]) -> f64 {
    4.0 * std::f64::consts::PI.powi(2) * xi.iter().map(|&v| (v * v) as f64).sum::<f64>()
}

/// ‖μ‖_{H⁻¹} = (Σ_{ξ≠0} |μ̂(ξ)|²/(2π|ξ|)²)^{1/2}.
pub fn h_minus1_norm(field: &GridField) -> Result<f64> {
    let scale = field.sup_norm().max(1.0);
    if !field.is_mean_zero(MEAN_ZERO_TOL * scale) {
        return Err(Error::Domain(format!(
            "H^-1 norm needs a mean-zero field, mean = {:e}",
            field.mean()
        )));
    }
    Ok(h_minus1_norm_unchecked(field))
}

/// H⁻¹ norm of the mean-removed part, without the mean check.
pub fn h_minus1_norm_unchecked(field: &GridField) -> f64 {
    field
        .spectrum()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.norm_sqr() / k_of(&field.freq(i)))
        .sum::<f64>()
        .sqrt()
}

/// Parseval sum Σ K̂(ξ)|μ̂(ξ)|² = ∫ μ (K*μ).
pub fn quadratic_form(kernel: &KernelSpec, mu: &GridField) -> f64 {
    kernel
        .iter()
        .filter(|(xi, _)| resolved(mu, &xi.0))
        .map(|(xi, khat)| khat * mu.coeff(&xi.0).norm_sqr())
        .sum()
}

fn resolved(field: &GridField, xi: &[i64]) -> bool {
    xi.iter().all(|&v| v.abs() < (field.n() / 2) as i64)
}

/// F(m) = (γ/2) ∬ K(x−y) m(x) m(y) dx dy.
pub fn interaction_energy(kernel: &KernelSpec, gamma: f64, m: &GridField) -> f64 {
    0.5 * gamma * quadratic_form(kernel, m)
}

/// K * f via (K*f)^(ξ) = K̂(ξ) f̂(ξ).
pub fn convolve(kernel: &KernelSpec, field: &GridField) -> Result<GridField> {
    if (field.n() / 2) as i64 <= kernel.cutoff() {
        return Err(Error::UnderResolved(format!(
            "{} points per axis cannot carry kernel modes up to {}",
            field.n(),
            kernel.cutoff()
        )));
    }
    Ok(field.map_spectrum(|xi, c| c * kernel.khat_of(xi)))
}

/// Precomputed multiplier array K̂(ξ) in the flat layout of `like`.
pub fn kernel_multiplier(kernel: &KernelSpec, like: &GridField) -> Vec<Complex64> {
    (0..like.len())
        .map(|i| Complex64::new(kernel.khat_of(&like.freq(i)), 0.0))
        .collect()
}
