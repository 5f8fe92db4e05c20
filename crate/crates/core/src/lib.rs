//! Turnpike and phase-transition experiments for translation-invariant
//! mean-field games on the torus.

pub mod error;
pub mod linear_bvp;
pub mod mfg;
pub mod numerics;
pub mod particles;
pub mod reduced;
pub mod spectral;
pub mod stationary;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
