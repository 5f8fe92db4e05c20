//! Precomputed spectral multipliers for repeated operator application on
//! raw value arrays. Used by the time-dependent and stationary solvers.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::{fft_nd, index_freq, GridField};
use super::kernel::KernelSpec;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
pub struct SpectralOps {
    pub dim: usize,
    pub n: usize,
    pub len: usize,
    /// (2π|ξ|)² per flat index, Nyquist included.
    pub k: Vec<f64>,
    /// 2πξ_axis per flat index, zero on Nyquist rows.
    pub dxi: Vec<Vec<f64>>,
    /// True where the two-thirds filter keeps the coefficient.
    pub keep: Vec<bool>,
    /// K̂(ξ) per flat index.
    pub khat: Vec<f64>,
}

impl SpectralOps {
    pub fn new(dim: usize, n: usize, kernel: &KernelSpec) -> Result<Self> {
        if kernel.dim() != dim {
            return Err(Error::Domain(format!(
                "kernel dimension {} does not match grid dimension {dim}",
                kernel.dim()
            )));
        }
        if (n / 2) as i64 <= kernel.cutoff() {
            return Err(Error::UnderResolved(format!(
                "{n} points per axis cannot carry kernel modes up to {}",
                kernel.cutoff()
            )));
        }
        let len = n.pow(dim as u32);
        let half = (n / 2) as i64;
        let cut = (n / 3) as i64;
        let freqs: Vec<Vec<i64>> = (0..len).map(|i| index_freq(i, dim, n)).collect();
        let k = freqs
            .iter()
            .map(|f| 4.0 * PI * PI * f.iter().map(|&v| (v * v) as f64).sum::<f64>())
            .collect();
        let dxi = (0..dim)
            .map(|a| {
                freqs
                    .iter()
                    .map(|f| if f.iter().any(|&v| v == -half) { 0.0 } else { 2.0 * PI * f[a] as f64 })
                    .collect()
            })
            .collect();
        let keep = freqs.iter().map(|f| f.iter().all(|&v| v.abs() <= cut)).collect();
        let khat = freqs.iter().map(|f| kernel.khat_of(f)).collect();
        Ok(SpectralOps { dim, n, len, k, dxi, keep, khat })
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(self.dim, self.n, &mut data, false);
        let s = 1.0 / self.len as f64;
        data.iter_mut().for_each(|c| *c *= s);
        data
    }

    /// Real part of the inverse transform.
    pub fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut data = spec.to_vec();
        fft_nd(self.dim, self.n, &mut data, true);
        data.iter().map(|c| c.re).collect()
    }

    pub fn field(&self, values: Vec<f64>) -> Result<GridField> {
        GridField::new(self.dim, self.n, values)
    }

    /// Two-thirds filter applied in place to a spectrum.
    pub fn filter(&self, spec: &mut [Complex64]) {
        for (c, &keep) in spec.iter_mut().zip(&self.keep) {
            if !keep {
                *c = ZERO;
            }
        }
    }

    /// ∂_axis of the filtered field, in physical space.
    pub fn filtered_derivative(&self, spec: &[Complex64], axis: usize) -> Vec<f64> {
        let d: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if self.keep[i] {
                    Complex64::new(0.0, self.dxi[axis][i]) * c
                } else {
                    ZERO
                }
            })
            .collect();
        self.inverse(&d)
    }

    /// Spectrum of P(½|∇Pφ|²) given φ̂.
    pub fn hamiltonian_hat(&self, phi_hat: &[Complex64]) -> Vec<Complex64> {
        let mut q = vec![0.0; self.len];
        for a in 0..self.dim {
            let g = self.filtered_derivative(phi_hat, a);
            for (qi, gi) in q.iter_mut().zip(&g) {
                *qi += 0.5 * gi * gi;
            }
        }
        let mut qh = self.forward(&q);
        self.filter(&mut qh);
        qh
    }

    /// Spectrum of P(∇Pφ·∇Pv), the derivative of the Hamiltonian at φ in
    /// the direction v.
    pub fn hamiltonian_derivative_hat(&self, phi_hat: &[Complex64], v_hat: &[Complex64]) -> Vec<Complex64> {
        let mut q = vec![0.0; self.len];
        for a in 0..self.dim {
            let g = self.filtered_derivative(phi_hat, a);
            let h = self.filtered_derivative(v_hat, a);
            for i in 0..self.len {
                q[i] += g[i] * h[i];
            }
        }
        let mut qh = self.forward(&q);
        self.filter(&mut qh);
        qh
    }

    /// Spectrum of div(m∇φ) split as mean(m)Δφ + div P((Pm − mean m)∇Pφ).
    /// With `linear` set only the first term is kept, with mean(m) = 1.
    pub fn transport_hat(&self, m_hat: &[Complex64], phi_hat: &[Complex64], linear: bool) -> Vec<Complex64> {
        let mean = if linear { 1.0 } else { m_hat[0].re };
        let mut out: Vec<Complex64> = phi_hat.iter().zip(&self.k).map(|(&c, &k)| -k * mean * c).collect();
        if linear {
            return out;
        }
        let mut fluct = m_hat.to_vec();
        fluct[0] = ZERO;
        self.filter(&mut fluct);
        let pm = self.inverse(&fluct);
        for a in 0..self.dim {
            let g = self.filtered_derivative(phi_hat, a);
            let flux: Vec<f64> = pm.iter().zip(&g).map(|(x, y)| x * y).collect();
            let fh = self.forward(&flux);
            for i in 0..self.len {
                if self.keep[i] {
                    out[i] += Complex64::new(0.0, self.dxi[a][i]) * fh[i];
                }
            }
        }
        out
    }

    /// Applies a real multiplier to a physical array.
    pub fn apply_real_multiplier(&self, values: &[f64], mult: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut s = self.forward(values);
        for (i, c) in s.iter_mut().enumerate() {
            *c *= mult(i);
        }
        self.inverse(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transport_matches_product_rule_for_resolved_fields() {
        let n = 32;
        let ops = SpectralOps::new(1, n, &KernelSpec::cosine()).unwrap();
        let m = GridField::from_fn(1, n, |x| 1.0 + 0.3 * (2.0 * PI * x[0]).cos()).unwrap();
        let phi = GridField::from_fn(1, n, |x| 0.2 * (4.0 * PI * x[0]).sin()).unwrap();
        let got = ops.inverse(&ops.transport_hat(m.spectrum(), phi.spectrum(), false));
        // d/dx(m φ') for band-limited m, φ
        let exact = |x: f64| {
            let m = 1.0 + 0.3 * (2.0 * PI * x).cos();
            let dm = -0.3 * 2.0 * PI * (2.0 * PI * x).sin();
            let dphi = 0.2 * 4.0 * PI * (4.0 * PI * x).cos();
            let ddphi = -0.2 * 16.0 * PI * PI * (4.0 * PI * x).sin();
            dm * dphi + m * ddphi
        };
        for (j, g) in got.iter().enumerate() {
            assert!((g - exact(j as f64 / n as f64)).abs() < 1e-10);
        }
    }

    #[test]
    fn hamiltonian_of_sine() {
        let n = 32;
        let ops = SpectralOps::new(1, n, &KernelSpec::cosine()).unwrap();
        let phi = GridField::from_fn(1, n, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let h = ops.inverse(&ops.hamiltonian_hat(phi.spectrum()));
        for (j, v) in h.iter().enumerate() {
            let x = j as f64 / n as f64;
            let exact = 0.5 * (2.0 * PI * (2.0 * PI * x).cos()).powi(2);
            assert!((v - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_under_resolved() {
        assert!(SpectralOps::new(1, 2, &KernelSpec::cosine()).is_err());
        assert!(SpectralOps::new(2, 8, &KernelSpec::cosine()).is_err());
    }
}
