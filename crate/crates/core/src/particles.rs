//! Interacting particles on the circle driven by a mean-field feedback and
//! quadratic Wasserstein diagnostics for their empirical measures.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mfg::{solve_mfg, MfgProblem, MfgTrajectory, SolveOptions};
use crate::spectral::{critical_coupling, GridField};

/// Real trigonometric polynomial c₀ + 2 Re Σ_{ξ=1}^{K} c_ξ e^{2πiξx}.
#[derive(Debug, Clone)]
pub struct TrigSeries {
    pub coeffs: Vec<Complex64>,
}

impl TrigSeries {
    /// Interpolant of a one-dimensional field without its Nyquist mode.
    pub fn from_field(field: &GridField) -> Result<Self> {
        if field.dim() != 1 {
            return Err(Error::Unsupported("trigonometric series are one-dimensional".into()));
        }
        let half = field.n() / 2;
        Ok(TrigSeries { coeffs: field.spectrum()[..half].to_vec() })
    }

    pub fn derivative(&self) -> TrigSeries {
        TrigSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| Complex64::new(0.0, 2.0 * PI * k as f64) * c)
                .collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let e1 = Complex64::from_polar(1.0, 2.0 * PI * x);
        let mut e = e1;
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs[1..] {
            acc += c * e;
            e *= e1;
        }
        self.coeffs[0].re + 2.0 * acc.re
    }
}

/// Probability density on the circle given by a positive trigonometric
/// polynomial of unit mass.
#[derive(Debug, Clone)]
pub struct TrigDensity {
    series: TrigSeries,
}

impl TrigDensity {
    pub fn uniform() -> Self {
        TrigDensity { series: TrigSeries { coeffs: vec![Complex64::new(1.0, 0.0)] } }
    }

    /// Normalizes the interpolant of `field` to unit mass; fails unless its
    /// grid values are positive.
    pub fn from_field(field: &GridField) -> Result<Self> {
        let mut series = TrigSeries::from_field(field)?;
        let mass = series.coeffs[0].re;
        if !(field.min() > 0.0 && mass > 0.0) {
            return Err(Error::Domain("density must be positive".into()));
        }
        series.coeffs.iter_mut().for_each(|c| *c /= mass);
        Ok(TrigDensity { series })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.series.eval(x)
    }

    /// Lifted distribution function with G(0) = 0 and G(x + 1) = G(x) + 1.
    pub fn cdf(&self, x: f64) -> f64 {
        let e1 = Complex64::from_polar(1.0, 2.0 * PI * x);
        let mut e = e1;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.series.coeffs.iter().enumerate().skip(1) {
            acc += c * (e - 1.0) / Complex64::new(0.0, 2.0 * PI * k as f64);
            e *= e1;
        }
        x + 2.0 * acc.re
    }

    /// Lifted quantile function Q = G⁻¹ on the real line.
    pub fn quantile(&self, u: f64) -> f64 {
        let shift = u.floor();
        let v = u - shift;
        if self.series.coeffs.len() == 1 {
            return u;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut y = v;
        for _ in 0..100 {
            let g = self.cdf(y) - v;
            if g.abs() <= 1e-15 {
                break;
            }
            if g > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let next = y - g / self.pdf(y);
            y = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-16 {
                break;
            }
        }
        y + shift
    }

    /// ∫_{z₀}^{z₁} z² ρ(x + z) dz.
    fn second_moment(&self, x: f64, z0: f64, z1: f64) -> f64 {
        let mut acc = (z1.powi(3) - z0.powi(3)) / 3.0;
        let mut osc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.series.coeffs.iter().enumerate().skip(1) {
            let a = Complex64::new(0.0, 2.0 * PI * k as f64);
            let prim = |z: f64| (a * z).exp() * (z * z / a - 2.0 * z / (a * a) + 2.0 / (a * a * a));
            osc += c * (a * x).exp() * (prim(z1) - prim(z0));
        }
        acc += 2.0 * osc.re;
        acc
    }
}

/// Target measure of a circular Wasserstein computation.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Uniform,
    Density(&'a TrigDensity),
    Empirical(&'a [f64]),
}

fn wrap(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = samples.iter().map(|&x| wrap(x)).collect();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// ∫₀¹ (Q_F(u + α) − Q_G(u))² du for sorted samples s (quantile Q_F).
fn shifted_cost(s: &[f64], alpha: f64, reference: &Reference, reference_sorted: &[f64]) -> f64 {
    let n = s.len();
    let nf = n as f64;
    let j0 = (alpha * nf).floor() as i64;
    let mut cost = 0.0;
    let mut k = 0usize;
    let mut q_prev: Option<f64> = None;
    let mut j = j0;
    loop {
        let a = (j as f64 / nf - alpha).max(0.0);
        if a >= 1.0 {
            break;
        }
        let b = ((j + 1) as f64 / nf - alpha).min(1.0);
        if b > a {
            let x = s[j.rem_euclid(n as i64) as usize] + j.div_euclid(n as i64) as f64;
            cost += match reference {
                Reference::Uniform => ((x - a).powi(3) - (x - b).powi(3)) / 3.0,
                Reference::Density(d) => {
                    let ya = *q_prev.get_or_insert_with(|| d.quantile(a));
                    let yb = d.quantile(b);
                    q_prev = Some(yb);
                    d.second_moment(x, ya - x, yb - x)
                }
                Reference::Empirical(_) => {
                    let t = reference_sorted;
                    let m = t.len() as f64;
                    let mut acc = 0.0;
                    let mut lo = a;
                    while lo < b {
                        while ((k + 1) as f64) / m <= lo && k + 1 < t.len() {
                            k += 1;
                        }
                        let hi = (((k + 1) as f64) / m).min(b);
                        acc += (x - t[k]).powi(2) * (hi - lo);
                        if hi <= lo {
                            break;
                        }
                        lo = hi;
                    }
                    acc
                }
            };
        }
        j += 1;
    }
    cost
}

const GOLDEN_TOL: f64 = 1e-13;

/// Quadratic Wasserstein distance on the unit circle between the empirical
/// measure of `samples` and `reference`, via the shifted quantile coupling
/// minimized over the shift by golden-section search.
pub fn w2_circle(samples: &[f64], reference: &Reference) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    let s = sorted(samples);
    let t = match reference {
        Reference::Empirical(r) if r.is_empty() => return Err(Error::Domain("empty reference".into())),
        Reference::Empirical(r) => sorted(r),
        _ => Vec::new(),
    };
    let f = |alpha: f64| shifted_cost(&s, alpha, reference, &t);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    let alpha = 0.5 * (lo + hi);
    let mut best = f(alpha).min(f1).min(f2);
    // the cost is piecewise linear between empirical breakpoints j/N − k/M
    if !t.is_empty() {
        let (nf, mf) = (s.len() as f64, t.len() as f64);
        let mut kinks: Vec<f64> = (0..=t.len())
            .map(|k| ((alpha + k as f64 / mf) * nf).round() / nf - k as f64 / mf)
            .collect();
        kinks.sort_by(|a, b| (a - alpha).abs().total_cmp(&(b - alpha).abs()));
        for &kk in kinks.iter().take(8) {
            best = best.min(f(kk));
        }
    }
    Ok(best.max(0.0).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ParticleEnsemble {
    pub positions: Vec<f64>,
    pub seed: u64,
    pub time: f64,
}

/// Time-indexed feedback −∂ₓφ.
#[derive(Debug, Clone)]
pub enum Drift {
    Zero,
    Slices { gradients: Vec<TrigSeries>, dt: f64 },
}

impl Drift {
    pub fn from_trajectory(traj: &MfgTrajectory) -> Result<Self> {
        if traj.dim != 1 {
            return Err(Error::Unsupported("particle drift is one-dimensional".into()));
        }
        let gradients = (0..=traj.nt)
            .map(|j| Ok(TrigSeries::from_field(&traj.phi_field(j)?)?.derivative()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Drift::Slices { gradients, dt: traj.t_final / traj.nt as f64 })
    }

    fn slice(&self, t: f64) -> Option<&TrigSeries> {
        match self {
            Drift::Zero => None,
            Drift::Slices { gradients, dt } => {
                let j = ((t / dt + 1e-9).floor() as usize).min(gradients.len() - 1);
                Some(&gradients[j])
            }
        }
    }
}

/// Samples `n` points from `density` (uniform when `None`).
pub fn sample_initial(n: usize, density: Option<&TrigDensity>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            match density {
                Some(d) => wrap(d.quantile(u)),
                None => u,
            }
        })
        .collect()
}

fn particle_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Euler–Maruyama X ← X − ∂ₓφ(t, X)dt + √(2ν dt)ζ with periodic wrapping.
/// Initial positions are drawn from `initial` on the same random stream.
/// Returns the ensemble after each step count in `snapshot_steps`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_particles(
    n: usize,
    nu: f64,
    drift: &Drift,
    initial: Option<&TrigDensity>,
    dt: f64,
    steps: usize,
    seed: u64,
    snapshot_steps: &[usize],
) -> Result<Vec<ParticleEnsemble>> {
    if n < 2 {
        return Err(Error::Domain("need at least two particles".into()));
    }
    if !(dt > 0.0 && dt <= 1e-2) {
        return Err(Error::Domain(format!("dt must lie in (0, 1e-2], got {dt}")));
    }
    let mut rng = particle_rng(seed, n as u64);
    let mut x = sample_initial(n, initial, &mut rng);
    let noise = (2.0 * nu * dt).sqrt();
    let mut out = Vec::new();
    let push = |x: &[f64], step: usize, out: &mut Vec<ParticleEnsemble>| {
        if snapshot_steps.contains(&step) {
            out.push(ParticleEnsemble { positions: x.to_vec(), seed, time: step as f64 * dt });
        }
    };
    push(&x, 0, &mut out);
    for step in 0..steps {
        let grad = drift.slice(step as f64 * dt);
        for xi in x.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            let v = grad.map_or(0.0, |g| g.eval(*xi));
            *xi = wrap(*xi - v * dt + noise * z);
        }
        push(&x, step + 1, &mut out);
    }
    Ok(out)
}

/// Largest deviation between joint and product Fourier coefficients of
/// disjoint particle pairs, over frequencies 1 ≤ |a|, |b| ≤ `modes`.
pub fn pair_marginal_proxy(positions: &[f64], modes: i64) -> f64 {
    let pairs: Vec<(f64, f64)> = positions.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let np = pairs.len() as f64;
    let e = |k: i64, x: f64| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x);
    let mut worst: f64 = 0.0;
    for a in 1..=modes {
        for b in (-modes..=modes).filter(|&b| b != 0) {
            let mut joint = Complex64::new(0.0, 0.0);
            let mut ma = Complex64::new(0.0, 0.0);
            let mut mb = Complex64::new(0.0, 0.0);
            for &(x, y) in &pairs {
                joint += e(a, x) * e(b, y);
                ma += e(a, x);
                mb += e(b, y);
            }
            worst = worst.max((joint / np - ma / np * (mb / np)).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChaosRow {
    pub n: usize,
    pub seed: u64,
    pub t: f64,
    pub w2_to_mf: f64,
    pub w2_to_uniform: f64,
    pub pair_proxy: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChaosSummary {
    pub n: usize,
    pub t: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub median_pair_proxy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChaosReport {
    /// Particles follow the solved mean-field feedback, not a finite-N
    /// equilibrium.
    pub surrogate: &'static str,
    pub rows: Vec<ChaosRow>,
    pub summaries: Vec<ChaosSummary>,
}

impl ChaosReport {
    /// CSV: N,seed,t,w2_to_mf,w2_to_uniform.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "N,seed,t,w2_to_mf,w2_to_uniform")?;
        for r in &self.rows {
            writeln!(w, "{},{},{:.17e},{:.17e},{:.17e}", r.n, r.seed, r.t, r.w2_to_mf, r.w2_to_uniform)?;
        }
        Ok(())
    }

    pub fn summary(&self, n: usize, t: f64) -> Option<&ChaosSummary> {
        self.summaries.iter().find(|s| s.n == n && (s.t - t).abs() < 1e-12)
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < v.len() {
        v[i] * (1.0 - f) + v[i + 1] * f
    } else {
        v[i]
    }
}

/// Median, first and third quartile.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    (quantile_sorted(&v, 0.5), quantile_sorted(&v, 0.25), quantile_sorted(&v, 0.75))
}

/// Solves the MFG system, then simulates particles driven by its feedback
/// for every (N, seed) and compares their empirical measures with m(t) at
/// t = T/2 and t = T.
pub fn chaos_experiment(problem: &MfgProblem, solve_opts: &SolveOptions, n_list: &[usize], seeds: &[u64]) -> Result<ChaosReport> {
    let params = &problem.params;
    if params.kernel.dim() != 1 {
        return Err(Error::Unsupported("Wasserstein diagnostics are one-dimensional".into()));
    }
    let gc = critical_coupling(params.nu, &params.kernel).gamma_c;
    if params.gamma >= gc {
        return Err(Error::Domain(format!("chaos experiment needs gamma < gamma_c = {gc}")));
    }
    let traj = solve_mfg(problem, solve_opts)?;
    let drift = Drift::from_trajectory(&traj)?;
    let nt = traj.nt;
    let dt = problem.dt();
    let m0 = TrigDensity::from_field(&problem.m0)?;
    let snaps = [nt / 2, nt];
    let targets: Vec<TrigDensity> = snaps
        .iter()
        .map(|&j| TrigDensity::from_field(&traj.m_field(j)?))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, u64)> = n_list.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let rows: Vec<Vec<ChaosRow>> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let ens = simulate_particles(n, params.nu, &drift, Some(&m0), dt, nt, seed, &snaps)?;
            ens.iter()
                .zip(&targets)
                .map(|(e, target)| {
                    Ok(ChaosRow {
                        n,
                        seed,
                        t: e.time,
                        w2_to_mf: w2_circle(&e.positions, &Reference::Density(target))?,
                        w2_to_uniform: w2_circle(&e.positions, &Reference::Uniform)?,
                        pair_proxy: pair_marginal_proxy(&e.positions, 2),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ChaosRow> = rows.into_iter().flatten().collect();
    let mut summaries = Vec::new();
    for &n in n_list {
        for &j in &snaps {
            let t = j as f64 * dt;
            let sel: Vec<&ChaosRow> = rows.iter().filter(|r| r.n == n && (r.t - t).abs() < 1e-12).collect();
            let w: Vec<f64> = sel.iter().map(|r| r.w2_to_mf).collect();
            let p: Vec<f64> = sel.iter().map(|r| r.pair_proxy).collect();
            let (median, q1, q3) = quartiles(&w);
            summaries.push(ChaosSummary { n, t, median, q1, q3, median_pair_proxy: quartiles(&p).0 });
        }
    }
    Ok(ChaosReport { surrogate: "mean-field feedback particles", rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfg::Scheme;
    use crate::spectral::{KernelSpec, ModelParams};
    use proptest::prelude::*;
    use rand::Rng;

    /// Exhaustive search over cyclic rotations of the sorted samples with
    /// the circular distance.
    fn brute_force(a: &[f64], b: &[f64]) -> f64 {
        let (a, b) = (sorted(a), sorted(b));
        let n = a.len();
        let d = |x: f64, y: f64| {
            let r = (x - y).abs();
            r.min(1.0 - r)
        };
        (0..n)
            .map(|k| (0..n).map(|i| d(a[i], b[(i + k) % n]).powi(2)).sum::<f64>() / n as f64)
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    fn uniform_samples(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random()).collect()
    }

    #[test]
    fn atoms() {
        let a = [0.1, 0.6];
        assert_eq!(w2_circle(&a, &Reference::Empirical(&a)).unwrap(), 0.0);
        assert_eq!(w2_circle(&[0.0, 0.5], &Reference::Empirical(&[0.5, 0.0])).unwrap(), 0.0);
        let w = w2_circle(&[0.0], &Reference::Empirical(&[0.5])).unwrap();
        assert!((w - 0.5).abs() < 1e-12, "{w}");
    }

    #[test]
    fn matches_rotation_oracle() {
        for (i, n) in [1usize, 2, 3, 7, 50, 200].into_iter().enumerate() {
            let a = uniform_samples(n, 10 + i as u64);
            let b: Vec<f64> = uniform_samples(n, 100 + i as u64).iter().map(|x| x * x * 0.4 + 0.3).collect();
            let w = w2_circle(&a, &Reference::Empirical(&b)).unwrap();
            let o = brute_force(&a, &b);
            assert!((w - o).abs() < 1e-9, "n = {n}: {w} vs {o}");
        }
    }

    #[test]
    fn uniform_reference_matches_flat_density() {
        let a = uniform_samples(300, 3);
        let flat = TrigDensity::uniform();
        let w1 = w2_circle(&a, &Reference::Uniform).unwrap();
        let w2 = w2_circle(&a, &Reference::Density(&flat)).unwrap();
        assert!((w1 - w2).abs() < 1e-12);
    }

    #[test]
    fn density_reference_matches_fine_quantization() {
        // quantile atoms at midpoints (k + ½)/M converge to the density
        let field = GridField::from_fn(1, 16, |x| 1.0 + 0.4 * (2.0 * PI * x[0]).cos() + 0.1 * (4.0 * PI * x[0]).sin()).unwrap();
        let d = TrigDensity::from_field(&field).unwrap();
        let a = uniform_samples(40, 5);
        let m = 20000;
        let atoms: Vec<f64> = (0..m).map(|k| wrap(d.quantile((k as f64 + 0.5) / m as f64))).collect();
        let exact = w2_circle(&a, &Reference::Density(&d)).unwrap();
        let approx = w2_circle(&a, &Reference::Empirical(&atoms)).unwrap();
        assert!((exact - approx).abs() < 1e-4, "{exact} vs {approx}");
    }

    #[test]
    fn quantile_inverts_cdf() {
        let field = GridField::from_fn(1, 16, |x| 1.0 + 0.8 * (2.0 * PI * x[0]).cos()).unwrap();
        let d = TrigDensity::from_field(&field).unwrap();
        for u in [-0.3, 0.0, 0.1, 0.5, 0.77, 1.0, 2.4] {
            assert!((d.cdf(d.quantile(u)) - u).abs() < 1e-13);
        }
    }

    #[test]
    fn iid_uniform_median_decreases() {
        let med = |n: usize| {
            let w: Vec<f64> = (0..50).map(|s| w2_circle(&uniform_samples(n, s), &Reference::Uniform).unwrap()).collect();
            quartiles(&w).0
        };
        let (a, b) = (med(100), med(10000));
        assert!(a / b >= 3.0, "{a} {b}");
    }

    #[test]
    fn frozen_and_deterministic_particles() {
        let r = simulate_particles(10, 0.0, &Drift::Zero, None, 1e-2, 50, 1, &[0, 50]).unwrap();
        assert_eq!(r[0].positions, r[1].positions);
        let a = simulate_particles(100, 0.5, &Drift::Zero, None, 1e-2, 20, 9, &[20]).unwrap();
        let b = simulate_particles(100, 0.5, &Drift::Zero, None, 1e-2, 20, 9, &[20]).unwrap();
        assert_eq!(a[0].positions, b[0].positions);
        assert!(a[0].positions.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn brownian_particles_equidistribute() {
        let atom = TrigDensity::from_field(&GridField::from_fn(1, 16, |x| 1.0 + 0.9 * (2.0 * PI * x[0]).cos()).unwrap()).unwrap();
        let r = simulate_particles(5000, 1.0, &Drift::Zero, Some(&atom), 1e-2, 200, 2, &[0, 200]).unwrap();
        let w0 = w2_circle(&r[0].positions, &Reference::Uniform).unwrap();
        let w1 = w2_circle(&r[1].positions, &Reference::Uniform).unwrap();
        assert!(w1 < 0.02 && w1 < 0.25 * w0, "{w0} {w1}");
    }

    #[test]
    fn independent_diffusions_converge_to_heat_flow() {
        let p = ModelParams::new(0.2, 0.0, KernelSpec::cosine()).unwrap();
        let m0 = GridField::from_fn(1, 16, |x| 1.0 + 0.5 * (2.0 * PI * x[0]).cos()).unwrap();
        let prob = MfgProblem::new(p, m0, GridField::zeros(1, 16).unwrap(), 1.0, 100).unwrap();
        let opts = SolveOptions { scheme: Scheme::Newton, ..Default::default() };
        let rep = chaos_experiment(&prob, &opts, &[100, 1000, 10000], &[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        let meds: Vec<f64> = [100, 1000, 10000].iter().map(|&n| rep.summary(n, 0.5).unwrap().median).collect();
        assert!(meds.windows(2).all(|w| w[1] < w[0]), "{meds:?}");
    }

    #[test]
    fn relabeling_leaves_diagnostics_invariant() {
        let a = uniform_samples(64, 11);
        let mut b = a.clone();
        b.reverse();
        b.swap(3, 40);
        assert_eq!(w2_circle(&a, &Reference::Uniform).unwrap(), w2_circle(&b, &Reference::Uniform).unwrap());
        let pa = pair_marginal_proxy(&sorted(&a), 2);
        let pb = pair_marginal_proxy(&sorted(&b), 2);
        assert_eq!(pa, pb);
    }

    proptest! {
        #[test]
        fn metric_properties(sa in 0u64..1000, sb in 0u64..1000, sc in 0u64..1000, n in 1usize..40) {
            let (a, b, c) = (uniform_samples(n, sa), uniform_samples(n, sb + 5000), uniform_samples(n, sc + 9000));
            let ab = w2_circle(&a, &Reference::Empirical(&b)).unwrap();
            let ba = w2_circle(&b, &Reference::Empirical(&a)).unwrap();
            let bc = w2_circle(&b, &Reference::Empirical(&c)).unwrap();
            let ac = w2_circle(&a, &Reference::Empirical(&c)).unwrap();
            prop_assert!(ab >= 0.0 && ab <= 0.5 + 1e-12);
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert!(w2_circle(&a, &Reference::Uniform).unwrap() <= 0.5 + 1e-12);
        }
    }
}
