//! Stationary states m = 1 + μ, φ = w with ergodic constant λ:
//!
//! Φ₁ = −νΔw + ½|∇w|² − γK*μ + λ = 0,
//! Φ₂ = −νΔμ − div((1+μ)∇w) = 0,
//!
//! with ∫μ = ∫w = 0 and the phase condition ∫μ sin(2πξ₀·x) = 0. The
//! Newton system appends one unfolding unknown s multiplying sin(2πξ₀·x) in
//! the second equation so the bordered system stays square; s vanishes at
//! every solution.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fit_line, fit_power_law, LineFit};
use crate::spectral::{critical_coupling, Frequency, GridField, KernelSpec, ModelParams, SpectralOps};

/// Residual bound for an accepted state.
pub const ACCEPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct StationaryState {
    pub mu: GridField,
    pub w: GridField,
    pub lambda: f64,
    pub gamma: f64,
    pub residual: f64,
}

impl StationaryState {
    pub fn uniform(dim: usize, nx: usize, gamma: f64) -> Result<Self> {
        Ok(StationaryState {
            mu: GridField::zeros(dim, nx)?,
            w: GridField::zeros(dim, nx)?,
            lambda: 0.0,
            gamma,
            residual: 0.0,
        })
    }

    /// μ = A cos(2πξ₀·x), w = −νA cos(2πξ₀·x), λ = 0.
    pub fn cosine_seed(xi0: &Frequency, nu: f64, amplitude: f64, nx: usize, gamma: f64) -> Result<Self> {
        let c = cos_field(xi0, nx)?;
        Ok(StationaryState {
            mu: c.scale(amplitude),
            w: c.scale(-nu * amplitude),
            lambda: 0.0,
            gamma,
            residual: f64::NAN,
        })
    }

    pub fn translate(&self, tau: &[f64]) -> Self {
        StationaryState {
            mu: self.mu.translate(tau),
            w: self.w.translate(tau),
            ..self.clone()
        }
    }

    /// Cosine coefficient 2·Re μ̂(ξ₀).
    pub fn amplitude(&self, xi0: &Frequency) -> f64 {
        2.0 * self.mu.coeff(&xi0.0).re
    }

    pub fn min_density(&self) -> f64 {
        1.0 + self.mu.min()
    }

    /// Distance between two states: max of the sup-norm differences and the
    /// λ difference.
    pub fn distance(&self, other: &StationaryState) -> f64 {
        let dm = self.mu.sub(&other.mu).map(|f| f.sup_norm()).unwrap_or(f64::INFINITY);
        let dw = self.w.sub(&other.w).map(|f| f.sup_norm()).unwrap_or(f64::INFINITY);
        dm.max(dw).max((self.lambda - other.lambda).abs())
    }
}

fn phase_arg(xi0: &Frequency, x: &[f64]) -> f64 {
    2.0 * PI * xi0.0.iter().zip(x).map(|(&c, &v)| c as f64 * v).sum::<f64>()
}

fn cos_field(xi0: &Frequency, nx: usize) -> Result<GridField> {
    GridField::from_fn(xi0.dim(), nx, |x| phase_arg(xi0, x).cos())
}

fn sin_field(xi0: &Frequency, nx: usize) -> Result<GridField> {
    GridField::from_fn(xi0.dim(), nx, |x| phase_arg(xi0, x).sin())
}

#[derive(Debug, Clone)]
pub struct StationaryResidual {
    pub r1: GridField,
    pub r2: GridField,
    /// ∫(1+μ) − 1.
    pub mass: f64,
    pub w_mean: f64,
    /// ∫μ sin(2πξ₀·x).
    pub phase: f64,
}

impl StationaryResidual {
    /// Sup-norm over both equations.
    pub fn sup(&self) -> f64 {
        self.r1.sup_norm().max(self.r2.sup_norm())
    }
}

/// Evaluates Φ spectrally with two-thirds dealiasing of every product.
struct Operator {
    ops: SpectralOps,
    nu: f64,
    gamma: f64,
    sin: Vec<f64>,
}

impl Operator {
    fn new(params: &ModelParams, nx: usize) -> Result<Self> {
        let dim = params.kernel.dim();
        let ops = SpectralOps::new(dim, nx, &params.kernel)?;
        let xi0 = phase_mode(params)?;
        if (nx / 3) as i64 <= xi0.sup_norm() {
            return Err(Error::UnderResolved(format!("nx = {nx} does not resolve the critical mode")));
        }
        let sin = sin_field(&xi0, nx)?.values().to_vec();
        Ok(Operator { ops, nu: params.nu, gamma: params.gamma, sin })
    }

    fn phi1_hat(&self, mu_h: &[Complex64], w_h: &[Complex64], lambda: f64) -> Vec<Complex64> {
        let ops = &self.ops;
        let ham = ops.hamiltonian_hat(w_h);
        let mut out: Vec<Complex64> = (0..ops.len)
            .map(|i| self.nu * ops.k[i] * w_h[i] + ham[i] - self.gamma * ops.khat[i] * mu_h[i])
            .collect();
        out[0] += lambda;
        out
    }

    fn phi2_hat(&self, mu_h: &[Complex64], w_h: &[Complex64]) -> Vec<Complex64> {
        let ops = &self.ops;
        let mut m_h = mu_h.to_vec();
        m_h[0] += 1.0;
        let tr = ops.transport_hat(&m_h, w_h, false);
        (0..ops.len).map(|i| self.nu * ops.k[i] * mu_h[i] - tr[i]).collect()
    }

    fn residual(&self, mu: &[f64], w: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>) {
        let mu_h = self.ops.forward(mu);
        let w_h = self.ops.forward(w);
        (
            self.ops.inverse(&self.phi1_hat(&mu_h, &w_h, lambda)),
            self.ops.inverse(&self.phi2_hat(&mu_h, &w_h)),
        )
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn phase(&self, mu: &[f64]) -> f64 {
        mu.iter().zip(&self.sin).map(|(a, b)| a * b).sum::<f64>() / mu.len() as f64
    }

    /// Bordered residual [E₁; E₂; ∫w; ∫μ sin] at x = (μ, w, λ, s).
    fn system(&self, x: &[f64]) -> Vec<f64> {
        let n = self.ops.len;
        let (mu, rest) = x.split_at(n);
        let (w, tail) = rest.split_at(n);
        let (lambda, s) = (tail[0], tail[1]);
        let mu_h = self.ops.forward(mu);
        let w_h = self.ops.forward(w);
        let e1 = self.ops.inverse(&self.phi1_hat(&mu_h, &w_h, lambda));
        let mut p2 = self.phi2_hat(&mu_h, &w_h);
        p2[0] = mu_h[0];
        let mut e2 = self.ops.inverse(&p2);
        for (e, sn) in e2.iter_mut().zip(&self.sin) {
            *e += s * sn;
        }
        let mut out = e1;
        out.extend(e2);
        out.push(Self::mean(w));
        out.push(self.phase(mu));
        out
    }

    fn column(&self, f: impl Fn(&[Complex64]) -> Vec<Complex64>, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.ops.len];
        e[j] = 1.0;
        self.ops.inverse(&f(&self.ops.forward(&e)))
    }

    /// Exact Jacobian of [`Operator::system`].
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.ops.len;
        let ops = &self.ops;
        let mu_h = ops.forward(&x[..n]);
        let w_h = ops.forward(&x[n..2 * n]);
        let mut m_h = mu_h.clone();
        m_h[0] += 1.0;
        let size = 2 * n + 2;
        let mut jac = DMatrix::zeros(size, size);
        for j in 0..n {
            // μ direction
            let c1 = self.column(|v| (0..n).map(|i| -self.gamma * ops.khat[i] * v[i]).collect(), j);
            let c2 = self.column(
                |v| {
                    let tr = ops.transport_hat(v, &w_h, false);
                    let mut out: Vec<Complex64> = (0..n).map(|i| self.nu * ops.k[i] * v[i] - tr[i]).collect();
                    out[0] = v[0];
                    out
                },
                j,
            );
            for i in 0..n {
                jac[(i, j)] = c1[i];
                jac[(n + i, j)] = c2[i];
            }
            jac[(2 * n + 1, j)] = self.sin[j] / n as f64;
            // w direction
            let c1 = self.column(
                |v| {
                    let hd = ops.hamiltonian_derivative_hat(&w_h, v);
                    (0..n).map(|i| self.nu * ops.k[i] * v[i] + hd[i]).collect()
                },
                j,
            );
            let c2 = self.column(
                |v| {
                    let tr = ops.transport_hat(&m_h, v, false);
                    let mut out: Vec<Complex64> = tr.iter().map(|t| -t).collect();
                    out[0] = Complex64::new(0.0, 0.0);
                    out
                },
                j,
            );
            for i in 0..n {
                jac[(i, n + j)] = c1[i];
                jac[(n + i, n + j)] = c2[i];
            }
            jac[(2 * n, n + j)] = 1.0 / n as f64;
        }
        for i in 0..n {
            jac[(i, 2 * n)] = 1.0;
            jac[(n + i, 2 * n + 1)] = self.sin[i];
        }
        jac
    }

    fn pack(state: &StationaryState) -> Vec<f64> {
        let mut x = state.mu.values().to_vec();
        x.extend_from_slice(state.w.values());
        x.push(state.lambda);
        x.push(0.0);
        x
    }

    fn unpack(&self, x: &[f64], gamma: f64) -> Result<StationaryState> {
        let n = self.ops.len;
        let mu = self.ops.field(x[..n].to_vec())?;
        let w = self.ops.field(x[n..2 * n].to_vec())?;
        let (r1, r2) = self.residual(mu.values(), w.values(), x[2 * n]);
        let residual = r1.iter().chain(&r2).fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(StationaryState { mu, w, lambda: x[2 * n], gamma, residual })
    }
}

/// Critical mode ξ₀ used for phase fixing.
pub fn phase_mode(params: &ModelParams) -> Result<Frequency> {
    Ok(critical_coupling(params.nu, &params.kernel).critical_mode()?.clone())
}

/// Evaluates both stationary equations and the three scalar constraints.
pub fn stationary_residual(state: &StationaryState, params: &ModelParams) -> Result<StationaryResidual> {
    let op = Operator::new(params, state.mu.n())?;
    let (r1, r2) = op.residual(state.mu.values(), state.w.values(), state.lambda);
    Ok(StationaryResidual {
        r1: op.ops.field(r1)?,
        r2: op.ops.field(r2)?,
        mass: state.mu.mean(),
        w_mean: state.w.mean(),
        phase: op.phase(state.mu.values()),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-11, max_iter: 40 }
    }
}

/// Largest/smallest |pivot| ratio accepted before the bordered Jacobian is
/// declared singular.
const SINGULAR_RATIO: f64 = 1e13;

/// Newton iteration on the bordered system. The returned state carries
/// the coupling of `params`.
pub fn newton_solve(initial: &StationaryState, params: &ModelParams, opts: &NewtonOptions) -> Result<StationaryState> {
    let op = Operator::new(params, initial.mu.n())?;
    let mut x = Operator::pack(initial);
    let mut history = Vec::new();
    for _ in 0..opts.max_iter {
        let r = op.system(&x);
        let rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        history.push(rn);
        if !rn.is_finite() {
            return Err(Error::NonFinite("stationary residual".into()));
        }
        if rn <= opts.tol {
            return op.unpack(&x, params.gamma);
        }
        let lu = op.jacobian(&x).lu();
        let diag = lu.u().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
        if lo == 0.0 || hi / lo > SINGULAR_RATIO {
            return Err(Error::Singular {
                condition: hi / lo,
                context: "bordered stationary Jacobian (at or too near criticality)".into(),
            });
        }
        let dx = lu
            .solve(&DVector::from_iterator(r.len(), r.iter().map(|v| -v)))
            .ok_or_else(|| Error::Singular {
                condition: f64::INFINITY,
                context: "bordered stationary Jacobian".into(),
            })?;
        for (xi, d) in x.iter_mut().zip(dx.iter()) {
            *xi += d;
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub state: StationaryState,
    pub amplitude: f64,
    /// ‖μ − A cos(2πξ₀·x)‖ in the H² grid norm (weights (1 + k_ξ)²).
    pub remainder_norm: f64,
}

impl BranchPoint {
    pub fn new(state: StationaryState, xi0: &Frequency) -> Result<Self> {
        let amplitude = state.amplitude(xi0);
        let rem = state.mu.sub(&cos_field(xi0, state.mu.n())?.scale(amplitude))?;
        let remainder_norm = rem
            .spectrum()
            .iter()
            .zip(rem.wavenumbers_sq())
            .map(|(c, k)| (1.0 + k).powi(2) * c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(BranchPoint { state, amplitude, remainder_norm })
    }
}

/// Checks every accepted-state condition; returns a description of the
/// first violation.
pub fn acceptance_violation(state: &StationaryState, params: &ModelParams) -> Result<Option<String>> {
    let res = stationary_residual(state, params)?;
    let xi0 = phase_mode(params)?;
    Ok(if res.sup() > ACCEPT_TOL {
        Some(format!("residual {:e}", res.sup()))
    } else if res.mass.abs() > 1e-12 {
        Some(format!("mass defect {:e}", res.mass))
    } else if res.w_mean.abs() > 1e-12 {
        Some(format!("potential mean {:e}", res.w_mean))
    } else if res.phase.abs() > 1e-10 {
        Some(format!("sine component {:e}", res.phase))
    } else if state.amplitude(&xi0) < 0.0 {
        Some("negative cosine coefficient".into())
    } else if state.min_density() <= 0.0 {
        Some("density not positive".into())
    } else {
        None
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchOptions {
    pub nx: usize,
    pub tol: f64,
    /// Seed amplitude for the first point; `None` uses 0.5·√((γ−γ_c)/γ_c).
    pub seed_amplitude: Option<f64>,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions { nx: 32, tol: 1e-11, seed_amplitude: None }
    }
}

#[derive(Debug, Clone)]
pub struct BifurcationDiagram {
    pub gamma_c: f64,
    pub points: Vec<BranchPoint>,
    /// Fit of log A against log(γ − γ_c).
    pub fit: Option<LineFit>,
    /// c² where A ≈ c(γ − γ_c)^p.
    pub alpha_over_beta: Option<f64>,
    pub failure: Option<String>,
}

impl BifurcationDiagram {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn prefactor(&self) -> Option<f64> {
        self.fit.map(|f| f.intercept.exp())
    }

    /// CSV: gamma,gamma_minus_gc,A,remainder_norm,lambda,residual,min_m.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "gamma,gamma_minus_gc,A,remainder_norm,lambda,residual,min_m")?;
        for p in &self.points {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                p.state.gamma,
                p.state.gamma - self.gamma_c,
                p.amplitude,
                p.remainder_norm,
                p.state.lambda,
                p.state.residual,
                p.state.min_density()
            )?;
        }
        Ok(())
    }
}

/// Newton from a cosine seed, retrying when it lands on the uniform state
/// (seed doubled) or on the negative branch (half-period shift).
fn solve_from_seed(
    seed: StationaryState,
    params: &ModelParams,
    xi0: &Frequency,
    opts: &NewtonOptions,
) -> Result<StationaryState> {
    let mut seed = seed;
    for _ in 0..6 {
        let st = newton_solve(&seed, params, opts)?;
        let a = st.amplitude(xi0);
        let scale = seed.mu.sup_norm();
        if a.abs() > 1e-3 * scale {
            return Ok(if a < 0.0 { half_period_shift(&st, xi0) } else { st });
        }
        seed = StationaryState { mu: seed.mu.scale(2.0), w: seed.w.scale(2.0), ..seed };
    }
    Err(Error::NotConverged { iterations: 6, residual: 0.0, history: Vec::new() })
}

/// Translation by ξ₀/(2|ξ₀|²), which flips the sign of cos(2πξ₀·x).
pub fn half_period_shift(state: &StationaryState, xi0: &Frequency) -> StationaryState {
    let nsq = xi0.norm_sq();
    let tau: Vec<f64> = xi0.0.iter().map(|&c| c as f64 / (2.0 * nsq)).collect();
    state.translate(&tau)
}

/// Follows the nontrivial branch over an increasing γ schedule above γ_c.
pub fn continue_branch(nu: f64, kernel: &KernelSpec, gamma_schedule: &[f64], opts: &BranchOptions) -> Result<BifurcationDiagram> {
    let cc = critical_coupling(nu, kernel);
    let xi0 = cc.critical_mode()?.clone();
    let gamma_c = cc.gamma_c;
    if gamma_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("gamma schedule must be strictly increasing".into()));
    }
    if let Some(&g0) = gamma_schedule.first() {
        if g0 < gamma_c * (1.0 + 1e-4) * (1.0 - 1e-12) {
            return Err(Error::Domain(format!("schedule must start at or above gamma_c(1 + 1e-4), got {g0}")));
        }
    }
    let newton = NewtonOptions { tol: opts.tol, ..NewtonOptions::default() };
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut failure = None;
    for &gamma in gamma_schedule {
        let params = ModelParams::new(nu, gamma, kernel.clone())?;
        let seed = match points.last() {
            None => {
                let a0 = opts.seed_amplitude.unwrap_or(0.5 * ((gamma - gamma_c) / gamma_c).sqrt());
                StationaryState::cosine_seed(&xi0, nu, a0, opts.nx, gamma)?
            }
            Some(prev) => {
                let r = ((gamma - gamma_c) / (prev.state.gamma - gamma_c)).sqrt();
                StationaryState {
                    mu: prev.state.mu.scale(r),
                    w: prev.state.w.scale(r),
                    lambda: prev.state.lambda * r * r,
                    ..prev.state.clone()
                }
            }
        };
        let outcome = solve_from_seed(seed, &params, &xi0, &newton).and_then(|st| {
            match acceptance_violation(&st, &params)? {
                Some(msg) => Err(Error::Domain(msg)),
                None => Ok(st),
            }
        });
        match outcome {
            Ok(st) => points.push(BranchPoint::new(st, &xi0)?),
            Err(e) => {
                failure = Some(format!("gamma = {gamma}: {e}"));
                break;
            }
        }
    }
    let fit = if points.len() >= 2 {
        let dg: Vec<f64> = points.iter().map(|p| p.state.gamma - gamma_c).collect();
        let a: Vec<f64> = points.iter().map(|p| p.amplitude).collect();
        Some(fit_power_law(&dg, &a)?)
    } else {
        None
    };
    Ok(BifurcationDiagram {
        gamma_c,
        alpha_over_beta: fit.map(|f| (2.0 * f.intercept).exp()),
        points,
        fit,
        failure,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PitchforkReport {
    pub amplitude: f64,
    pub shifted_amplitude: f64,
    pub shifted_residual: f64,
    /// (τ, residual) for each probe translation.
    pub orbit: Vec<(f64, f64)>,
    pub passed: bool,
}

/// Verifies the half-period sign flip and the translation orbit.
pub fn pitchfork_check(point: &BranchPoint, params: &ModelParams, shifts: &[f64], tol: f64) -> Result<PitchforkReport> {
    let xi0 = phase_mode(params)?;
    let flipped = half_period_shift(&point.state, &xi0);
    let shifted_residual = stationary_residual(&flipped, params)?.sup();
    let shifted_amplitude = flipped.amplitude(&xi0);
    let dim = xi0.dim();
    let orbit = shifts
        .iter()
        .map(|&tau| {
            let mut v = vec![0.0; dim];
            v[0] = tau;
            Ok((tau, stationary_residual(&point.state.translate(&v), params)?.sup()))
        })
        .collect::<Result<Vec<_>>>()?;
    let flip_ok = (shifted_amplitude + point.amplitude).abs() <= 1e-10 * (1.0 + point.amplitude.abs());
    let passed = flip_ok && shifted_residual <= tol && orbit.iter().all(|&(_, r)| r <= tol);
    Ok(PitchforkReport { amplitude: point.amplitude, shifted_amplitude, shifted_residual, orbit, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenTrack {
    /// (γ, critical eigenvalue).
    pub rows: Vec<(f64, f64)>,
    /// Zero of the affine fit through the rows.
    pub crossing: f64,
    /// Central-difference derivative of the eigenvalue at γ_c.
    pub alpha_hat: f64,
    /// RMS residual of the affine fit.
    pub affine_residual: f64,
}

/// Critical eigenvalue of the linearization at the uniform state: the
/// potential is eliminated through the second equation (its w-block is −Δ,
/// invertible on mean-zero functions) and the resulting Schur complement
/// is evaluated on the unit-norm critical cosine.
pub fn critical_eigenvalue(params: &ModelParams, nx: usize) -> Result<f64> {
    let op = Operator::new(params, nx)?;
    let n = op.ops.len;
    let uniform = StationaryState::uniform(params.kernel.dim(), nx, params.gamma)?;
    let jac = op.jacobian(&Operator::pack(&uniform));
    let a = jac.view((0, 0), (n, n)).into_owned();
    let b = jac.view((0, n), (n, n)).into_owned();
    let c = jac.view((n, 0), (n, n)).into_owned();
    // the w-block with the mean row regularized by the mean projector
    let mut d = jac.view((n, n), (n, n)).into_owned();
    d.add_scalar_mut(1.0 / n as f64);
    // the μ-block's mean row encodes the mass constraint; drop it
    let mut c = c;
    let cm = DMatrix::from_fn(n, n, |i, j| c[(i, j)] - (0..n).map(|r| c[(r, j)]).sum::<f64>() / n as f64);
    c.copy_from(&cm);
    let x = d.lu().solve(&c).ok_or_else(|| Error::Singular {
        condition: f64::INFINITY,
        context: "w-block of the uniform linearization".into(),
    })?;
    let schur = a - b * x;
    let xi0 = phase_mode(params)?;
    let cosv = DVector::from_vec(cos_field(&xi0, nx)?.values().to_vec());
    Ok(cosv.dot(&(&schur * &cosv)) / cosv.dot(&cosv))
}

pub fn critical_eigen_tracking(nu: f64, kernel: &KernelSpec, gamma_list: &[f64], nx: usize) -> Result<EigenTrack> {
    let rows = gamma_list
        .iter()
        .map(|&g| Ok((g, critical_eigenvalue(&ModelParams::new(nu, g, kernel.clone())?, nx)?)))
        .collect::<Result<Vec<_>>>()?;
    let gs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ls: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fit = fit_line(&gs, &ls)?;
    let gamma_c = critical_coupling(nu, kernel).gamma_c;
    let h = 1e-3 * gamma_c;
    let lp = critical_eigenvalue(&ModelParams::new(nu, gamma_c + h, kernel.clone())?, nx)?;
    let lm = critical_eigenvalue(&ModelParams::new(nu, gamma_c - h, kernel.clone())?, nx)?;
    Ok(EigenTrack {
        rows,
        crossing: -fit.intercept / fit.slope,
        alpha_hat: (lp - lm) / (2.0 * h),
        affine_residual: fit.rms_residual,
    })
}

/// β̂ = α̂(γ − γ_c)/A² at every branch point.
pub fn beta_estimates(diagram: &BifurcationDiagram, alpha_hat: f64) -> Vec<f64> {
    diagram
        .points
        .iter()
        .map(|p| alpha_hat * (p.state.gamma - diagram.gamma_c) / (p.amplitude * p.amplitude))
        .collect()
}

/// Runs Newton from `seeds` perturbations of an accepted state and returns
/// the largest pairwise distance among the converged states. Perturbations
/// have size `relative_size·A/j²` in harmonic j = 1, 2, 3.
pub fn local_uniqueness_probe(
    point: &BranchPoint,
    params: &ModelParams,
    seeds: usize,
    relative_size: f64,
    rng_seed: u64,
) -> Result<f64> {
    let xi0 = phase_mode(params)?;
    let size = relative_size * point.amplitude.abs();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let nx = point.state.mu.n();
    let dim = point.state.mu.dim();
    let mut states = Vec::with_capacity(seeds);
    for _ in 0..seeds {
        let coeffs: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bump = GridField::from_fn(dim, nx, |x| {
            let t = phase_arg(&xi0, x);
            size * (coeffs[0] * t.cos() + coeffs[1] * (2.0 * t).cos() / 4.0 + coeffs[2] * (3.0 * t).cos() / 9.0)
        })?;
        let wbump = GridField::from_fn(dim, nx, |x| {
            let t = phase_arg(&xi0, x);
            size * (coeffs[3] * t.cos() + coeffs[4] * (2.0 * t).cos() / 4.0 + coeffs[5] * (3.0 * t).cos() / 9.0)
        })?;
        let seed = StationaryState {
            mu: point.state.mu.add(&bump)?,
            w: point.state.w.add(&wbump)?,
            ..point.state.clone()
        };
        states.push(newton_solve(&seed, params, &NewtonOptions::default())?);
    }
    let mut worst: f64 = 0.0;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            worst = worst.max(states[i].distance(&states[j]));
        }
        worst = worst.max(states[i].distance(&point.state));
    }
    Ok(worst)
}

/// Newton from nontrivial cosine seeds at a coupling below γ_c; returns the
/// final cosine amplitudes.
pub fn subcritical_probe(params: &ModelParams, seed_amplitudes: &[f64], nx: usize) -> Result<Vec<f64>> {
    let xi0 = phase_mode(params)?;
    seed_amplitudes
        .iter()
        .map(|&a0| {
            let seed = StationaryState::cosine_seed(&xi0, params.nu, a0, nx, params.gamma)?;
            Ok(newton_solve(&seed, params, &NewtonOptions::default())?.amplitude(&xi0))
        })
        .collect()
}
