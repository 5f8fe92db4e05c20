//! Even, mean-zero interaction kernels stored by their Fourier coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer frequency vector ξ ∈ ℤ^d.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(pub Vec<i64>);

impl Frequency {
    pub fn new(components: Vec<i64>) -> Self {
        Frequency(components)
    }

    pub fn d1(xi: i64) -> Self {
        Frequency(vec![xi])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Self {
        Frequency(self.0.iter().map(|c| -c).collect())
    }

    /// |ξ|² (Euclidean).
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&c| (c * c) as f64).sum()
    }

    /// max_i |ξ_i|.
    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// k_ξ = (2π|ξ|)².
    pub fn k(&self) -> f64 {
        4.0 * PI * PI * self.norm_sq()
    }

    /// Canonical representative of the pair {ξ, −ξ}: the one whose first
    /// nonzero component is positive.
    pub fn pair_representative(&self) -> Self {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) if c < 0 => self.neg(),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Interaction kernel K, represented by finitely many real coefficients K̂(ξ).
///
/// Both members of every ±ξ pair are stored; K̂(0) is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    dim: usize,
    coeffs: BTreeMap<Frequency, f64>,
    cutoff: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub xi: Vec<i64>,
    pub khat: f64,
}

/// On-disk kernel description. Only one member of each ±ξ pair is needed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    pub dim: usize,
    pub coeffs: Vec<KernelEntry>,
}

impl KernelSpec {
    /// Builds a kernel from (ξ, K̂(ξ)) entries, completing evenness.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Frequency, f64)>,
    {
        if dim == 0 {
            return Err(Error::InvalidKernel("dimension must be positive".into()));
        }
        let mut coeffs = BTreeMap::new();
        for (xi, khat) in entries {
            if xi.dim() != dim {
                return Err(Error::InvalidKernel(format!(
                    "frequency {xi} has dimension {} but kernel dimension is {dim}",
                    xi.dim()
                )));
            }
            if xi.is_zero() {
                return Err(Error::InvalidKernel(
                    "zero-frequency coefficient given; kernels are mean-zero".into(),
                ));
            }
            if !khat.is_finite() {
                return Err(Error::InvalidKernel(format!("coefficient at {xi} is not finite")));
            }
            for f in [xi.neg(), xi] {
                if let Some(&prev) = coeffs.get(&f) {
                    if prev != khat {
                        return Err(Error::InvalidKernel(format!(
                            "conflicting coefficients {prev} and {khat} for the pair ±{}",
                            f.pair_representative()
                        )));
                    }
                }
                coeffs.insert(f, khat);
            }
        }
        let cutoff = coeffs.keys().map(Frequency::sup_norm).max().unwrap_or(0);
        Ok(KernelSpec { dim, coeffs, cutoff })
    }

    /// K(x) = −cos(2πx) on 𝕋¹: K̂(±1) = −1/2.
    pub fn cosine() -> Self {
        Self::from_entries(1, [(Frequency::d1(1), -0.5)]).expect("valid kernel")
    }

    /// K(x) = −a₁cos(2πx) − a₂cos(4πx): K̂(±1) = −a₁/2, K̂(±2) = −a₂/2.
    pub fn two_mode(a1: f64, a2: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "two-mode amplitudes must be positive, got a1={a1}, a2={a2}"
            )));
        }
        Self::from_entries(1, [(Frequency::d1(1), -a1 / 2.0), (Frequency::d1(2), -a2 / 2.0)])
    }

    /// K(x) = −cos(2πx₁) on 𝕋².
    pub fn cosine_x1_2d() -> Self {
        Self::from_entries(2, [(Frequency::new(vec![1, 0]), -0.5)]).expect("valid kernel")
    }

    /// K(x) = −cos(2πx₁) − cos(2πx₂) on 𝕋².
    pub fn cosine_sum_2d() -> Self {
        Self::from_entries(
            2,
            [(Frequency::new(vec![1, 0]), -0.5), (Frequency::new(vec![0, 1]), -0.5)],
        )
        .expect("valid kernel")
    }

    pub fn from_file_spec(file: &KernelFile) -> Result<Self> {
        Self::from_entries(
            file.dim,
            file.coeffs.iter().map(|e| (Frequency(e.xi.clone()), e.khat)),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: KernelFile = serde_json::from_str(s)?;
        Self::from_file_spec(&file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// One entry per ±ξ pair.
    pub fn to_file_spec(&self) -> KernelFile {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(xi, _)| **xi == xi.pair_representative())
            .map(|(xi, &khat)| KernelEntry { xi: xi.0.clone(), khat })
            .collect();
        KernelFile { dim: self.dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest |ξ|∞ with a stored coefficient.
    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    /// K̂(ξ); zero for frequencies not stored.
    pub fn khat(&self, xi: &Frequency) -> f64 {
        self.coeffs.get(xi).copied().unwrap_or(0.0)
    }

    /// K̂ for a frequency given as a slice.
    pub fn khat_of(&self, xi: &[i64]) -> f64 {
        if self.dim == 1 {
            // avoids an allocation on the hot 1-D path
            return self.coeffs.get(&Frequency(vec![xi[0]])).copied().unwrap_or(0.0);
        }
        self.coeffs.get(&Frequency(xi.to_vec())).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Frequency, f64)> {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().all(|(xi, &v)| self.coeffs.get(&xi.neg()) == Some(&v))
    }

    /// True when every coefficient is nonnegative (Lasry–Lions monotone).
    pub fn is_monotone(&self) -> bool {
        self.coeffs.values().all(|&v| v >= 0.0)
    }

    /// Evaluates K(x) = Σ K̂(ξ) cos(2πξ·x).
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(xi, &v)| {
                let phase: f64 = xi.0.iter().zip(x).map(|(&c, &xc)| c as f64 * xc).sum();
                v * (2.0 * PI * phase).cos()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_coefficients() {
        let k = KernelSpec::cosine();
        assert_eq!(k.khat(&Frequency::d1(1)), -0.5);
        assert_eq!(k.khat(&Frequency::d1(-1)), -0.5);
        for xi in 2..6 {
            assert_eq!(k.khat(&Frequency::d1(xi)), 0.0);
        }
        assert!(k.is_even());
        assert_eq!(k.cutoff(), 1);
    }

    #[test]
    fn two_mode_coefficients() {
        let k = KernelSpec::two_mode(1.0, 1.0).unwrap();
        assert_eq!(k.khat(&Frequency::d1(1)), -0.5);
        assert_eq!(k.khat(&Frequency::d1(-2)), -0.5);
        let k = KernelSpec::two_mode(2.0, 4.0).unwrap();
        assert_eq!(k.khat(&Frequency::d1(-1)), -1.0);
        assert_eq!(k.khat(&Frequency::d1(2)), -2.0);
        assert!(k.is_even());
        assert!(KernelSpec::two_mode(0.0, 1.0).is_err());
    }

    #[test]
    fn rejects_zero_mode_and_conflicts() {
        assert!(KernelSpec::from_entries(1, [(Frequency::d1(0), 1.0)]).is_err());
        assert!(KernelSpec::from_entries(1, [(Frequency::d1(1), 1.0), (Frequency::d1(-1), 2.0)])
            .is_err());
        assert!(KernelSpec::from_entries(1, [(Frequency::d1(1), f64::NAN)]).is_err());
        assert!(KernelSpec::from_entries(2, [(Frequency::d1(1), 1.0)]).is_err());
    }

    #[test]
    fn json_round_trip_completes_evenness() {
        let k = KernelSpec::from_json_str(r#"{"dim": 1, "coeffs": [{"xi": [3], "khat": 0.25}]}"#)
            .unwrap();
        assert_eq!(k.khat(&Frequency::d1(-3)), 0.25);
        let again = KernelSpec::from_file_spec(&k.to_file_spec()).unwrap();
        assert_eq!(again, k);
        assert!(KernelSpec::from_json_str(r#"{"dim": 1}"#).is_err());
    }

    #[test]
    fn eval_matches_cosine() {
        let k = KernelSpec::cosine();
        for x in [0.0, 0.1, 0.37] {
            assert!((k.eval(&[x]) + (2.0 * PI * x).cos()).abs() < 1e-15);
        }
    }
}
