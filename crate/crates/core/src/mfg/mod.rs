//! Finite-horizon MFG solver: semi-implicit Euler in time, pseudospectral
//! in space with two-thirds dealiasing.
//!
//! Time levels are t_n = nT/n_t. The backward step for φ uses the density at
//! the next level; the forward step for m uses φ at the current level. Both
//! the damped Picard sweep and the Newton solver find the same discrete
//! fixed point.

mod newton;
mod report;

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{critical_coupling, Frequency, GridField, ModelParams, SpectralOps};

pub use report::{
    critical_midpoint_experiment, stable_complement_rate_bound, turnpike_report, turnpike_sweep,
    CriticalRow, CriticalRunOptions, CriticalTable, SweepOptions, SweepRow, SweepTable,
    TurnpikeReport,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Tolerance for the density check on m₀.
pub const DENSITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MfgProblem {
    pub params: ModelParams,
    pub m0: GridField,
    pub g: GridField,
    pub t_final: f64,
    pub nt: usize,
}

impl MfgProblem {
    pub fn new(params: ModelParams, m0: GridField, g: GridField, t_final: f64, nt: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {t_final}")));
        }
        if nt < 16 {
            return Err(Error::Domain(format!("need at least 16 time steps, got {nt}")));
        }
        if m0.dim() != params.kernel.dim() || g.dim() != m0.dim() || g.n() != m0.n() {
            return Err(Error::Domain("m0, g and the kernel must share one grid".into()));
        }
        let cutoff = params.kernel.cutoff() as usize;
        if m0.n() < 4 * cutoff {
            return Err(Error::UnderResolved(format!(
                "nx = {} is below 4x the kernel cutoff {cutoff}",
                m0.n()
            )));
        }
        if !m0.is_density(DENSITY_TOL) {
            return Err(Error::Domain("m0 must be a positive density with unit mass".into()));
        }
        Ok(MfgProblem { params, m0, g, t_final, nt })
    }

    pub fn nx(&self) -> usize {
        self.m0.n()
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }
}

/// Initial and terminal data families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataPreset {
    /// m₀ = 1 + ε cos(2πξ₀·x), g = 0.
    CosineMode,
    /// m₀ = 1 + ε Σ random smooth modes up to |ξ|∞ ≤ 3, g = 0.
    RandomSmooth { seed: u64 },
}

/// Critical frequency of the kernel when unique, else the first unit vector.
pub fn reference_mode(params: &ModelParams) -> Frequency {
    let cc = critical_coupling(params.nu, &params.kernel);
    match cc.critical_mode() {
        Ok(xi) => xi.clone(),
        Err(_) => {
            let mut v = vec![0; params.kernel.dim()];
            v[0] = 1;
            Frequency(v)
        }
    }
}

/// Builds (m₀, g) for a data preset on an `nx`-point grid.
pub fn preset_data(params: &ModelParams, preset: &DataPreset, epsilon: f64, nx: usize) -> Result<(GridField, GridField)> {
    let dim = params.kernel.dim();
    let g = GridField::zeros(dim, nx)?;
    let m0 = match preset {
        DataPreset::CosineMode => {
            let xi0 = reference_mode(params);
            GridField::from_fn(dim, nx, |x| {
                let ph: f64 = xi0.0.iter().zip(x).map(|(&c, &v)| c as f64 * v).sum();
                1.0 + epsilon * (2.0 * std::f64::consts::PI * ph).cos()
            })?
        }
        DataPreset::RandomSmooth { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let ops_len = nx.pow(dim as u32);
            let mut spec = vec![ZERO; ops_len];
            let probe = GridField::zeros(dim, nx)?;
            for i in 1..ops_len {
                let xi = probe.freq(i);
                let rep = Frequency(xi.clone()).pair_representative();
                if rep.0 != xi || xi.iter().any(|v| v.abs() > 3) || (nx / 2) as i64 <= rep.sup_norm() {
                    continue;
                }
                let decay = 1.0 / (1.0 + rep.norm_sq());
                let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * decay * 0.5;
                spec[i] = c;
                spec[probe.index_of(&rep.neg().0)] = c.conj();
            }
            let base = GridField::from_spectrum(dim, nx, spec)?;
            let amp = base.sup_norm();
            base.map_values(|v| 1.0 + epsilon * v / amp)
        }
    };
    Ok((m0, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Picard,
    Newton,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub scheme: Scheme,
    /// Initial Picard damping ω.
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Drops the quadratic terms, giving the discrete linearized system.
    pub linearized: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { scheme: Scheme::Picard, omega: 0.5, tol: 1e-10, max_iter: 500, linearized: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceDiagnostics {
    pub t: f64,
    pub h_minus1: f64,
    pub l2_grad: f64,
    pub mass: f64,
    pub min_m: f64,
    /// Cosine coefficient 2·Re m̂(ξ₀).
    pub a_crit: f64,
    /// Sine coefficient −2·Im m̂(ξ₀).
    pub b_crit: f64,
}

#[derive(Debug, Clone)]
pub struct MfgTrajectory {
    pub dim: usize,
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    pub xi0: Frequency,
    pub phi: Vec<Vec<f64>>,
    pub m: Vec<Vec<f64>>,
    pub diagnostics: Vec<SliceDiagnostics>,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
    pub scheme: Scheme,
}

impl MfgTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    pub fn m_field(&self, j: usize) -> Result<GridField> {
        GridField::new(self.dim, self.nx, self.m[j].clone())
    }

    pub fn phi_field(&self, j: usize) -> Result<GridField> {
        GridField::new(self.dim, self.nx, self.phi[j].clone())
    }

    /// CSV: t,h_minus1,l2_grad,mass,min_m,a_crit.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,h_minus1,l2_grad,mass,min_m,a_crit")?;
        for d in &self.diagnostics {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                d.t, d.h_minus1, d.l2_grad, d.mass, d.min_m, d.a_crit
            )?;
        }
        Ok(())
    }

    /// Binary dump: header (dim, nx, nt, T) then the n_t+1 density slices
    /// followed by the n_t+1 potential slices, all little-endian f64 in
    /// row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for h in [self.dim as f64, self.nx as f64, self.nt as f64, self.t_final] {
            w.write_all(&h.to_le_bytes())?;
        }
        for slice in self.m.iter().chain(&self.phi) {
            for v in slice {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Reads a dump written by [`MfgTrajectory::write_binary`]; returns
/// (dim, nx, nt, T, m slices, φ slices).
#[allow(clippy::type_complexity)]
pub fn read_binary(bytes: &[u8]) -> Result<(usize, usize, usize, f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if vals.len() < 4 {
        return Err(Error::Domain("truncated trajectory dump".into()));
    }
    let (dim, nx, nt, t) = (vals[0] as usize, vals[1] as usize, vals[2] as usize, vals[3]);
    let len = nx.pow(dim as u32);
    if vals.len() != 4 + 2 * (nt + 1) * len {
        return Err(Error::Domain("trajectory dump has the wrong length".into()));
    }
    let slices: Vec<Vec<f64>> = vals[4..].chunks(len).map(|c| c.to_vec()).collect();
    let (m, phi) = slices.split_at(nt + 1);
    Ok((dim, nx, nt, t, m.to_vec(), phi.to_vec()))
}

pub(crate) struct StepContext<'a> {
    pub ops: &'a SpectralOps,
    pub dt: f64,
    pub nu: f64,
    pub gamma: f64,
    pub linear: bool,
}

impl StepContext<'_> {
    /// φⁿ from φⁿ⁺¹ and mⁿ⁺¹, optionally with the mean removed.
    pub fn hjb(&self, phi_next: &[f64], m_next: &[f64], remove_mean: bool) -> Vec<f64> {
        let ops = self.ops;
        let ph = ops.forward(phi_next);
        let mh = ops.forward(m_next);
        let ham = if self.linear { None } else { Some(ops.hamiltonian_hat(&ph)) };
        let mut out: Vec<Complex64> = (0..ops.len)
            .map(|i| {
                let mut rhs = ph[i] + self.dt * self.gamma * ops.khat[i] * mh[i];
                if let Some(h) = &ham {
                    rhs -= self.dt * h[i];
                }
                rhs / (1.0 + self.dt * self.nu * ops.k[i])
            })
            .collect();
        if remove_mean {
            out[0] = ZERO;
        }
        ops.inverse(&out)
    }

    /// mⁿ⁺¹ from mⁿ and φⁿ.
    pub fn fp(&self, m_prev: &[f64], phi: &[f64]) -> Vec<f64> {
        let ops = self.ops;
        let mh = ops.forward(m_prev);
        let ph = ops.forward(phi);
        let tr = ops.transport_hat(&mh, &ph, self.linear);
        let out: Vec<Complex64> = (0..ops.len)
            .map(|i| (mh[i] + self.dt * tr[i]) / (1.0 + self.dt * self.nu * ops.k[i]))
            .collect();
        ops.inverse(&out)
    }

    pub fn hjb_sweep(&self, m: &[Vec<f64>], g: &[f64]) -> Vec<Vec<f64>> {
        let nt = m.len() - 1;
        let mut phi = vec![Vec::new(); nt + 1];
        phi[nt] = g.to_vec();
        for n in (0..nt).rev() {
            phi[n] = self.hjb(&phi[n + 1], &m[n + 1], true);
        }
        phi
    }

    pub fn fp_sweep(&self, phi: &[Vec<f64>], m0: &[f64]) -> Result<Vec<Vec<f64>>> {
        let nt = phi.len() - 1;
        let mut m = Vec::with_capacity(nt + 1);
        m.push(m0.to_vec());
        for n in 0..nt {
            let next = self.fp(&m[n], &phi[n]);
            check_slice(&next, n + 1, !self.linear)?;
            m.push(next);
        }
        Ok(m)
    }
}

fn check_slice(values: &[f64], step: usize, positivity: bool) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("density at time index {step}")));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if positivity && min <= 0.0 {
        return Err(Error::PositivityLost { min, step });
    }
    Ok(())
}

fn ops_for(params: &ModelParams, field: &GridField) -> Result<SpectralOps> {
    SpectralOps::new(field.dim(), field.n(), &params.kernel)
}

/// One backward step −(φⁿ⁺¹ − φⁿ)/Δt − νΔφⁿ + ½|∇φⁿ⁺¹|² = γK*m, with the
/// diffusion implicit and the Hamiltonian and coupling explicit.
pub fn hjb_backward_step(phi_next: &GridField, m_slice: &GridField, dt: f64, params: &ModelParams) -> Result<GridField> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let ops = ops_for(params, phi_next)?;
    let ctx = StepContext { ops: &ops, dt, nu: params.nu, gamma: params.gamma, linear: false };
    let out = ctx.hjb(phi_next.values(), m_slice.values(), false);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("HJB step".into()));
    }
    GridField::new(phi_next.dim(), phi_next.n(), out)
}

/// One forward step (mⁿ⁺¹ − mⁿ)/Δt − νΔmⁿ⁺¹ = div(mⁿ∇φⁿ).
pub fn fp_forward_step(m_prev: &GridField, phi_slice: &GridField, dt: f64, params: &ModelParams) -> Result<GridField> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let ops = ops_for(params, m_prev)?;
    let ctx = StepContext { ops: &ops, dt, nu: params.nu, gamma: params.gamma, linear: false };
    let out = ctx.fp(m_prev.values(), phi_slice.values());
    check_slice(&out, 1, true)?;
    GridField::new(m_prev.dim(), m_prev.n(), out)
}

fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// sup over time of the L² distance between two density trajectories.
pub(crate) fn sup_l2_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| l2_diff(x, y)).fold(0.0, f64::max)
}

/// Solves the discrete forward–backward system.
pub fn solve_mfg(problem: &MfgProblem, opts: &SolveOptions) -> Result<MfgTrajectory> {
    let ops = ops_for(&problem.params, &problem.m0)?;
    let ctx = StepContext {
        ops: &ops,
        dt: problem.dt(),
        nu: problem.params.nu,
        gamma: problem.params.gamma,
        linear: opts.linearized,
    };
    let (phi, m, iterations, residual, history) = match opts.scheme {
        Scheme::Picard => picard(problem, &ctx, opts)?,
        Scheme::Newton => newton::solve(problem, &ctx, opts)?,
    };
    Ok(assemble(problem, &ops, phi, m, iterations, residual, history, opts.scheme))
}

type Solution = (Vec<Vec<f64>>, Vec<Vec<f64>>, usize, f64, Vec<f64>);

fn picard(problem: &MfgProblem, ctx: &StepContext, opts: &SolveOptions) -> Result<Solution> {
    let nt = problem.nt;
    let len = ctx.ops.len;
    let mut m_cur: Vec<Vec<f64>> = vec![vec![1.0; len]; nt + 1];
    m_cur[0] = problem.m0.values().to_vec();
    let mut omega = opts.omega;
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let phi = ctx.hjb_sweep(&m_cur, problem.g.values());
        let m_new = ctx.fp_sweep(&phi, problem.m0.values())?;
        let res = sup_l2_diff(&m_new, &m_cur);
        if !res.is_finite() {
            return Err(Error::NonFinite("Picard residual".into()));
        }
        if history.last().is_some_and(|&prev| res > prev) {
            omega = (omega * 0.5).max(1e-4);
        }
        history.push(res);
        if res <= opts.tol {
            return Ok((phi, m_new, it, res, history));
        }
        for (cur, new) in m_cur.iter_mut().zip(&m_new).skip(1) {
            for (c, n) in cur.iter_mut().zip(new) {
                *c = (1.0 - omega) * *c + omega * n;
            }
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    problem: &MfgProblem,
    ops: &SpectralOps,
    phi: Vec<Vec<f64>>,
    m: Vec<Vec<f64>>,
    iterations: usize,
    residual: f64,
    history: Vec<f64>,
    scheme: Scheme,
) -> MfgTrajectory {
    let xi0 = reference_mode(&problem.params);
    let i0 = problem.m0.index_of(&xi0.0);
    let diagnostics = (0..=problem.nt)
        .map(|j| {
            let mh = ops.forward(&m[j]);
            let ph = ops.forward(&phi[j]);
            let h_minus1 = (1..ops.len).map(|i| mh[i].norm_sqr() / ops.k[i]).sum::<f64>().sqrt();
            let l2_grad = (0..ops.len)
                .map(|i| {
                    let d: f64 = ops.dxi.iter().map(|dx| dx[i] * dx[i]).sum();
                    d * ph[i].norm_sqr()
                })
                .sum::<f64>()
                .sqrt();
            SliceDiagnostics {
                t: problem.t_final * j as f64 / problem.nt as f64,
                h_minus1,
                l2_grad,
                mass: mh[0].re,
                min_m: m[j].iter().copied().fold(f64::INFINITY, f64::min),
                a_crit: 2.0 * mh[i0].re,
                b_crit: -2.0 * mh[i0].im,
            }
        })
        .collect();
    MfgTrajectory {
        dim: problem.m0.dim(),
        nx: problem.nx(),
        nt: problem.nt,
        t_final: problem.t_final,
        xi0,
        phi,
        m,
        diagnostics,
        iterations,
        residual,
        history,
        scheme,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::KernelSpec;
    use std::f64::consts::PI;

    fn params(gamma: f64) -> ModelParams {
        ModelParams::new(1.0, gamma, KernelSpec::cosine()).unwrap()
    }

    fn cos_field(n: usize, amp: f64, base: f64) -> GridField {
        GridField::from_fn(1, n, |x| base + amp * (2.0 * PI * x[0]).cos()).unwrap()
    }

    #[test]
    fn hjb_step_examples() {
        let p = params(10.0);
        let one = GridField::constant(1, 16, 1.0).unwrap();
        let c = GridField::constant(1, 16, 2.5).unwrap();
        let out = hjb_backward_step(&c, &one, 0.01, &p).unwrap();
        assert!(out.sub(&c).unwrap().sup_norm() < 1e-14);
        // γ = 0, small amplitude: mode 1 multiplied by 1/(1 + dt·4π²)
        let dt = 0.01;
        let eps = 1e-8;
        let phi = cos_field(16, eps, 0.0);
        let out = hjb_backward_step(&phi, &one, dt, &params(0.0)).unwrap();
        let ratio = out.coeff(&[1]).re / phi.coeff(&[1]).re;
        assert!((ratio - 1.0 / (1.0 + dt * 4.0 * PI * PI)).abs() < 1e-7);
    }

    #[test]
    fn fp_step_examples() {
        let p = params(10.0);
        let dt = 0.01;
        let k = 4.0 * PI * PI;
        let m = cos_field(16, 0.2, 1.0);
        let zero = GridField::zeros(1, 16).unwrap();
        let out = fp_forward_step(&m, &zero, dt, &p).unwrap();
        assert!((out.coeff(&[1]).re / m.coeff(&[1]).re - 1.0 / (1.0 + dt * k)).abs() < 1e-14);
        // mass conservation with a nontrivial potential
        let phi = GridField::from_fn(1, 16, |x| 0.3 * (4.0 * PI * x[0]).sin()).unwrap();
        let out = fp_forward_step(&m, &phi, dt, &p).unwrap();
        assert!((out.mean() - m.mean()).abs() < 1e-14);
        // linear response to φ = ε cos at m ≡ 1
        let eps = 1e-7;
        let one = GridField::constant(1, 16, 1.0).unwrap();
        let out = fp_forward_step(&one, &cos_field(16, eps, 0.0), dt, &p).unwrap();
        let expect = dt * (-k) * (eps / 2.0) / (1.0 + dt * k);
        assert!((out.coeff(&[1]).re - expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn uniform_equilibrium_one_iteration() {
        let p = params(30.0);
        let prob = MfgProblem::new(
            p,
            GridField::constant(1, 16, 1.0).unwrap(),
            GridField::constant(1, 16, 4.0).unwrap(),
            1.0,
            32,
        )
        .unwrap();
        let tr = solve_mfg(&prob, &SolveOptions::default()).unwrap();
        assert_eq!(tr.iterations, 1);
        assert!(tr.m.iter().all(|s| s.iter().all(|&v| (v - 1.0).abs() < 1e-15)));
        assert!(tr.phi[..32].iter().all(|s| s.iter().all(|&v| v.abs() < 1e-15)));
        assert!((tr.phi[32][0] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn problem_validation() {
        let p = params(1.0);
        let m0 = cos_field(16, 0.1, 1.0);
        let g = GridField::zeros(1, 16).unwrap();
        assert!(MfgProblem::new(p.clone(), m0.clone(), g.clone(), 1.0, 8).is_err());
        assert!(MfgProblem::new(p.clone(), m0.clone(), g.clone(), -1.0, 32).is_err());
        assert!(MfgProblem::new(p.clone(), cos_field(16, 0.1, 2.0), g.clone(), 1.0, 32).is_err());
        assert!(MfgProblem::new(p.clone(), cos_field(16, 1.5, 1.0), g, 1.0, 32).is_err());
        let two = ModelParams::new(1.0, 1.0, KernelSpec::from_entries(1, [(Frequency::d1(5), -0.5)]).unwrap()).unwrap();
        assert!(MfgProblem::new(two, cos_field(16, 0.1, 1.0), GridField::zeros(1, 16).unwrap(), 1.0, 32).is_err());
    }

    #[test]
    fn picard_and_newton_agree_with_invariants() {
        let gc = 8.0 * PI * PI;
        let p = params(0.5 * gc);
        let (m0, g) = preset_data(&p, &DataPreset::CosineMode, 0.05, 16).unwrap();
        let g = g.add(&cos_field(16, 0.01, 0.3)).unwrap();
        let prob = MfgProblem::new(p, m0, g.clone(), 0.3, 60).unwrap();
        let a = solve_mfg(&prob, &SolveOptions::default()).unwrap();
        let b = solve_mfg(&prob, &SolveOptions { scheme: Scheme::Newton, ..Default::default() }).unwrap();
        assert!(sup_l2_diff(&a.m, &b.m) < 1e-9);
        assert!(sup_l2_diff(&a.phi, &b.phi) < 1e-8);
        for tr in [&a, &b] {
            assert!(tr.diagnostics.iter().all(|d| (d.mass - 1.0).abs() < 1e-12 && d.min_m > 0.0));
            assert_eq!(tr.m[0], prob.m0.values());
            let gt = &tr.phi[60];
            assert!(gt.iter().zip(g.values()).all(|(x, y)| (x - y).abs() < 1e-8));
        }
    }

    #[test]
    fn picard_residual_decreases() {
        let gc = 8.0 * PI * PI;
        let p = params(0.5 * gc);
        let (m0, g) = preset_data(&p, &DataPreset::CosineMode, 1e-2, 32).unwrap();
        let prob = MfgProblem::new(p, m0, g, 6.0, 1200).unwrap();
        let tr = solve_mfg(&prob, &SolveOptions::default()).unwrap();
        let h = &tr.history;
        assert!(h.len() > 2);
        for w in h.windows(2) {
            assert!(w[1] <= w[0], "{h:?}");
        }
    }

    #[test]
    fn deterministic_and_dump_round_trip() {
        let p = params(20.0);
        let (m0, g) = preset_data(&p, &DataPreset::RandomSmooth { seed: 7 }, 0.1, 16).unwrap();
        assert!(m0.is_density(1e-12));
        let prob = MfgProblem::new(p, m0, g, 0.2, 20).unwrap();
        let a = solve_mfg(&prob, &SolveOptions::default()).unwrap();
        let b = solve_mfg(&prob, &SolveOptions::default()).unwrap();
        assert_eq!(a.m, b.m);
        assert_eq!(a.phi, b.phi);
        let mut buf = Vec::new();
        a.write_binary(&mut buf).unwrap();
        let (dim, nx, nt, t, m, phi) = read_binary(&buf).unwrap();
        assert_eq!((dim, nx, nt, t), (1, 16, 20, 0.2));
        assert_eq!(m, a.m);
        assert_eq!(phi, a.phi);
        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 22);
    }
}
