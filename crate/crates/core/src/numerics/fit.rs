//! Least-squares line fits used by every rate and exponent estimate.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub points: usize,
}

impl LineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares y ≈ intercept + slope·x.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::Fit(format!("need at least two points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite fit data".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = if n > 2 { (ss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LineFit { slope, intercept, slope_stderr, rms_residual: (ss / nf).sqrt(), points: n })
}

/// Fits log y ≈ c + p·log x; requires positive data.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|&v| v <= 0.0) {
        return Err(Error::Fit("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

/// Fits log y ≈ c − r·t over the samples with t in [lo, hi]; returns the
/// fit with slope −r.
pub fn fit_exponential_window(t: &[f64], y: &[f64], lo: f64, hi: f64) -> Result<LineFit> {
    let (tw, lw): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(&ti, _)| ti >= lo && ti <= hi)
        .map(|(&ti, &yi)| (ti, yi))
        .unzip();
    if tw.len() < 3 {
        return Err(Error::Fit(format!("only {} samples in fit window [{lo}, {hi}]", tw.len())));
    }
    if lw.iter().any(|&v| v <= 0.0) {
        return Err(Error::Fit("exponential fit needs positive data".into()));
    }
    let ly: Vec<f64> = lw.iter().map(|v| v.ln()).collect();
    fit_line(&tw, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert!(f.rms_residual < 1e-15);
    }

    #[test]
    fn power_and_exponential() {
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert!((fit_power_law(&x, &y).unwrap().slope + 0.5).abs() < 1e-14);
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let e: Vec<f64> = t.iter().map(|s| (-2.5 * s).exp()).collect();
        let f = fit_exponential_window(&t, &e, 0.2, 0.5).unwrap();
        assert!((f.slope + 2.5).abs() < 1e-12);
        assert!(fit_exponential_window(&t, &e, 0.2, 0.25).is_err());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
