//! Real periodic fields on a uniform grid of the unit torus, with a cached
//! Fourier representation normalized as f̂(ξ) = ∫ f(x) e^{−2πiξ·x} dx.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    // One planner per worker thread; plans are cached inside it.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized d-dimensional FFT over a row-major n^d array.
pub(crate) fn fft_nd(dim: usize, n: usize, data: &mut [Complex64], inverse: bool) {
    let fft = plan(n, inverse);
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        for start in 0..total {
            // line origins are the indices whose coordinate on `axis` is 0
            if (start / stride) % n != 0 {
                continue;
            }
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = data[start + j * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (j, v) in line.iter().enumerate() {
                data[start + j * stride] = *v;
            }
        }
    }
}

/// Signed frequency of FFT index `j` on an axis with `n` points. The
/// Nyquist index maps to −n/2.
#[inline]
pub fn signed_freq(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Frequency vector of a flat index.
pub fn index_freq(idx: usize, dim: usize, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; dim];
    let mut rem = idx;
    for a in (0..dim).rev() {
        out[a] = signed_freq(rem % n, n);
        rem /= n;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    dim: usize,
    n: usize,
    values: Vec<f64>,
    spectrum: Vec<Complex64>,
}

impl GridField {
    pub fn new(dim: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("grid dimension must be positive".into()));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::Domain(format!("points per axis must be even and >= 2, got {n}")));
        }
        if values.len() != n.pow(dim as u32) {
            return Err(Error::Domain(format!(
                "expected {} values, got {}",
                n.pow(dim as u32),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid values".into()));
        }
        let spectrum = Self::forward(dim, n, &values);
        Ok(GridField { dim, n, values, spectrum })
    }

    fn forward(dim: usize, n: usize, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(dim, n, &mut data, false);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    /// Samples `f` at the grid points x_j = j/n.
    pub fn from_fn(dim: usize, n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let total = n.pow(dim as u32);
        let mut x = vec![0.0; dim];
        let values = (0..total)
            .map(|idx| {
                let mut rem = idx;
                for a in (0..dim).rev() {
                    x[a] = (rem % n) as f64 / n as f64;
                    rem /= n;
                }
                f(&x)
            })
            .collect();
        Self::new(dim, n, values)
    }

    pub fn constant(dim: usize, n: usize, c: f64) -> Result<Self> {
        Self::new(dim, n, vec![c; n.pow(dim as u32)])
    }

    pub fn zeros(dim: usize, n: usize) -> Result<Self> {
        Self::constant(dim, n, 0.0)
    }

    /// Builds a field from Fourier coefficients. The values are the real
    /// part of the inverse transform, and the cached spectrum is recomputed
    /// from them so the two representations always agree.
    pub fn from_spectrum(dim: usize, n: usize, spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != n.pow(dim as u32) {
            return Err(Error::Domain("spectrum length does not match grid".into()));
        }
        let mut data = spectrum;
        fft_nd(dim, n, &mut data, true);
        let values: Vec<f64> = data.iter().map(|c| c.re).collect();
        Self::new(dim, n, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn freq(&self, idx: usize) -> Vec<i64> {
        index_freq(idx, self.dim, self.n)
    }

    /// Flat index of a frequency vector (components reduced mod n).
    pub fn index_of(&self, xi: &[i64]) -> usize {
        xi.iter().fold(0usize, |acc, &c| acc * self.n + c.rem_euclid(self.n as i64) as usize)
    }

    /// Coefficient f̂(ξ).
    pub fn coeff(&self, xi: &[i64]) -> Complex64 {
        self.spectrum[self.index_of(xi)]
    }

    /// (2π|ξ|)² for every flat index.
    pub fn wavenumbers_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let f = self.freq(i);
                4.0 * PI * PI * f.iter().map(|&c| (c * c) as f64).sum::<f64>()
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.spectrum[0].re
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_mean_zero(&self, tol: f64) -> bool {
        self.mean().abs() <= tol
    }

    /// Mean one within `tol` and strictly positive.
    pub fn is_density(&self, tol: f64) -> bool {
        (self.mean() - 1.0).abs() <= tol && self.min() > 0.0
    }

    fn same_shape(&self, other: &GridField) -> Result<()> {
        if self.dim != other.dim || self.n != other.n {
            return Err(Error::Domain(format!(
                "grid mismatch: {}^{} vs {}^{}",
                self.n, self.dim, other.n, other.dim
            )));
        }
        Ok(())
    }

    /// Applies a spectral multiplier m(ξ).
    pub fn map_spectrum(&self, f: impl Fn(&[i64], Complex64) -> Complex64) -> GridField {
        let spec: Vec<Complex64> = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(i, &c)| f(&self.freq(i), c))
            .collect();
        GridField::from_spectrum(self.dim, self.n, spec).expect("shape preserved")
    }

    /// Multiplies the spectrum by a precomputed array (same flat layout).
    pub fn apply_multiplier(&self, mult: &[Complex64]) -> GridField {
        let spec: Vec<Complex64> = self.spectrum.iter().zip(mult).map(|(c, m)| c * m).collect();
        GridField::from_spectrum(self.dim, self.n, spec).expect("shape preserved")
    }

    pub fn laplacian(&self) -> GridField {
        self.map_spectrum(|xi, c| {
            let k = 4.0 * PI * PI * xi.iter().map(|&v| (v * v) as f64).sum::<f64>();
            -k * c
        })
    }

    /// ∂f/∂x_axis. The Nyquist component is dropped so the result stays real.
    pub fn gradient(&self, axis: usize) -> GridField {
        let n = self.n as i64;
        self.map_spectrum(|xi, c| {
            if xi.iter().any(|&v| v == -n / 2) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, 2.0 * PI * xi[axis] as f64) * c
            }
        })
    }

    /// Two-thirds rule: zeroes every coefficient with |ξ_i| > n/3 on some axis.
    pub fn dealiased(&self) -> GridField {
        let cut = (self.n / 3) as i64;
        self.map_spectrum(|xi, c| {
            if xi.iter().any(|&v| v.abs() > cut) {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        })
    }

    /// Exact spectral translation: returns x ↦ f(x + τ).
    pub fn translate(&self, tau: &[f64]) -> GridField {
        assert_eq!(tau.len(), self.dim);
        self.map_spectrum(|xi, c| {
            let phase: f64 = xi.iter().zip(tau).map(|(&v, &t)| v as f64 * t).sum();
            c * Complex64::from_polar(1.0, 2.0 * PI * phase)
        })
    }

    /// Removes the mean.
    pub fn mean_removed(&self) -> GridField {
        let m = self.mean();
        self.map_values(|v| v - m)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField::new(self.dim, self.n, self.values.iter().map(|&v| f(v)).collect())
            .expect("finite map")
    }

    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        self.same_shape(other)?;
        GridField::new(
            self.dim,
            self.n,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridField) -> Result<GridField> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> GridField {
        self.map_values(|v| v * s)
    }

    /// (∫ f²)^{1/2} by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ‖∇f‖_{L²} = (Σ (2π|ξ|)² |f̂(ξ)|²)^{1/2}, excluding Nyquist components
    /// (consistent with [`GridField::gradient`]).
    pub fn grad_l2_norm(&self) -> f64 {
        let n = self.n as i64;
        (0..self.len())
            .map(|i| {
                let xi = self.freq(i);
                if xi.iter().any(|&v| v == -n / 2) {
                    return 0.0;
                }
                let k = 4.0 * PI * PI * xi.iter().map(|&v| (v * v) as f64).sum::<f64>();
                k * self.spectrum[i].norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trigonometric interpolant evaluated at an arbitrary point. Nyquist
    /// components contribute through their real (cosine) part only.
    pub fn sample(&self, x: &[f64]) -> f64 {
        let n = self.n as i64;
        let mut acc = 0.0;
        for (i, c) in self.spectrum.iter().enumerate() {
            let xi = self.freq(i);
            let phase: f64 = xi.iter().zip(x).map(|(&v, &t)| v as f64 * t).sum();
            let e = Complex64::from_polar(1.0, 2.0 * PI * phase);
            if xi.iter().any(|&v| v == -n / 2) {
                acc += c.re * e.re;
            } else {
                acc += (c * e).re;
            }
        }
        acc
    }

    /// Spectral resampling onto a grid with `n_new` points per axis
    /// (zero-padding or truncation). Nyquist components are dropped.
    pub fn resample(&self, n_new: usize) -> Result<GridField> {
        let total = n_new.pow(self.dim as u32);
        let mut spec = vec![Complex64::new(0.0, 0.0); total];
        let lim = (self.n.min(n_new) / 2) as i64;
        for (i, &c) in self.spectrum.iter().enumerate() {
            let xi = self.freq(i);
            if xi.iter().all(|&v| v.abs() < lim) {
                let j = xi
                    .iter()
                    .fold(0usize, |acc, &v| acc * n_new + v.rem_euclid(n_new as i64) as usize);
                spec[j] = c;
            }
        }
        GridField::from_spectrum(self.dim, n_new, spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cos1(n: usize) -> GridField {
        GridField::from_fn(1, n, |x| (2.0 * PI * x[0]).cos()).unwrap()
    }

    #[test]
    fn cosine_spectrum() {
        let f = cos1(16);
        assert!((f.coeff(&[1]).re - 0.5).abs() < 1e-15);
        assert!((f.coeff(&[-1]).re - 0.5).abs() < 1e-15);
        assert!(f.coeff(&[2]).norm() < 1e-15);
        assert!(f.is_mean_zero(1e-12));
    }

    #[test]
    fn derivatives_of_cosine() {
        let f = cos1(32);
        let d = f.gradient(0);
        let lap = f.laplacian();
        for (i, (&dv, &lv)) in d.values().iter().zip(lap.values()).enumerate() {
            let x = i as f64 / 32.0;
            assert!((dv + 2.0 * PI * (2.0 * PI * x).sin()).abs() < 1e-12);
            assert!((lv + 4.0 * PI * PI * (2.0 * PI * x).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn two_dimensional_transform() {
        let f = GridField::from_fn(2, 8, |x| (2.0 * PI * (x[0] + 2.0 * x[1])).cos()).unwrap();
        assert!((f.coeff(&[1, 2]).re - 0.5).abs() < 1e-14);
        assert!((f.coeff(&[-1, -2]).re - 0.5).abs() < 1e-14);
        assert!(f.coeff(&[2, 1]).norm() < 1e-14);
        let g = f.gradient(1);
        let expect = GridField::from_fn(2, 8, |x| {
            -4.0 * PI * (2.0 * PI * (x[0] + 2.0 * x[1])).sin()
        })
        .unwrap();
        assert!(g.sub(&expect).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn dealias_cuts_top_third() {
        let f = GridField::from_fn(1, 12, |x| (2.0 * PI * 4.0 * x[0]).cos() + (2.0 * PI * 5.0 * x[0]).sin())
            .unwrap();
        assert!((f.dealiased().coeff(&[4]).re - 0.5).abs() < 1e-14);
        assert!(f.dealiased().coeff(&[5]).norm() < 1e-14);
    }

    #[test]
    fn translation_and_sampling() {
        let f = cos1(16);
        let g = f.translate(&[0.25]);
        // cos(2π(x + 1/4)) = −sin(2πx)
        assert!((g.sample(&[0.1]) + (2.0 * PI * 0.1).sin()).abs() < 1e-13);
        assert!((f.sample(&[0.3141]) - (2.0 * PI * 0.3141).cos()).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridField::new(1, 7, vec![0.0; 7]).is_err());
        assert!(GridField::new(1, 8, vec![0.0; 7]).is_err());
        assert!(GridField::new(1, 8, vec![f64::NAN; 8]).is_err());
    }

    proptest! {
        #[test]
        fn spectral_round_trip(vals in proptest::collection::vec(-10.0f64..10.0, 32)) {
            let f = GridField::new(1, 32, vals.clone()).unwrap();
            let g = GridField::from_spectrum(1, 32, f.spectrum().to_vec()).unwrap();
            let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in g.values().iter().zip(&vals) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn norms_translation_invariant(vals in proptest::collection::vec(-1.0f64..1.0, 16), tau in 0.0f64..1.0) {
            let f = GridField::new(1, 16, vals).unwrap().dealiased();
            let g = f.translate(&[tau]);
            prop_assert!((f.l2_norm() - g.l2_norm()).abs() < 1e-12);
            prop_assert!((f.grad_l2_norm() - g.grad_l2_norm()).abs() < 1e-10);
        }
    }
}
