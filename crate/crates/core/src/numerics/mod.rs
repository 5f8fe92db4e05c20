pub mod banded;
pub mod fit;

pub use banded::{BandLu, BandMatrix};
pub use fit::{fit_exponential_window, fit_line, fit_power_law, LineFit};
