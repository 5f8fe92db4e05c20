//! Fourier machinery shared by every solver.

pub mod dispersion;
pub mod grid;
pub mod kernel;
pub mod norms;
pub mod ops;

pub use dispersion::{
    c_star, critical_coupling, default_mode_cutoff, enumerate_modes, mode_matrix, mode_report,
    mode_threshold, rho, sigma_xi, spectral_gap, CriticalCoupling, EigenStructure, Gap,
    ModeMatrix, ModeReport, ModeRow, ModelParams,
};
pub use grid::GridField;
pub use kernel::{Frequency, KernelEntry, KernelFile, KernelSpec};
pub use norms::{convolve, h_minus1_norm, interaction_energy, quadratic_form};
pub use ops::SpectralOps;
