//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 4 12`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mfg_turnpike::linear_bvp::{linear_turnpike_envelope, solve_mode_bvp, uniform_times, ModeBvpData};
use mfg_turnpike::mfg::{
    critical_midpoint_experiment, preset_data, solve_mfg, turnpike_sweep, CriticalRunOptions, DataPreset, MfgProblem,
    Scheme, SolveOptions, SweepOptions,
};
use mfg_turnpike::particles::{chaos_experiment, w2_circle, Reference};
use mfg_turnpike::reduced::{integrate_reduced, midpoint_scaling, ReducedModel};
use mfg_turnpike::spectral::{
    c_star, critical_coupling, mode_matrix, quadratic_form, rho, EigenStructure, Frequency, GridField, KernelSpec,
    ModelParams,
};
use mfg_turnpike::stationary::{
    beta_estimates, continue_branch, critical_eigen_tracking, pitchfork_check, subcritical_probe, BranchOptions,
    ACCEPT_TOL,
};

/// Criteria whose target is not met by the faithful implementation.
const EXPECTED_FAIL: &[u32] = &[9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { pass, detail })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

type Check = fn() -> Result<Outcome, String>;

fn gc_cos(nu: f64) -> f64 {
    8.0 * PI * PI * nu * nu
}

fn cosine_field(n: usize, eps: f64, modes: &[i64]) -> GridField {
    GridField::from_fn(1, n, |x| 1.0 + eps * modes.iter().map(|&j| (2.0 * PI * j as f64 * x[0]).cos()).sum::<f64>())
        .unwrap()
}

fn c01_threshold() -> Result<Outcome, String> {
    let k = KernelSpec::cosine();
    let mut worst: f64 = 0.0;
    for nu in [0.5, 1.0, 2.0] {
        let gc = critical_coupling(nu, &k).gamma_c;
        worst = worst.max((gc - gc_cos(nu)).abs() / gc_cos(nu));
        let cs = c_star(nu, &k).map_err(err)?;
        worst = worst.max((cs - PI * 2f64.sqrt()).abs() / (PI * 2f64.sqrt()));
    }
    outcome(worst <= 1e-12, format!("max relative error {worst:.1e}"))
}

fn c02_mode_identities() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut counts) = (0.0f64, [0usize; 3]);
    for case in 0..100 {
        let dim = 1 + case % 2;
        let nu = rng.random_range(0.1..2.0);
        let mut entries = Vec::new();
        for j in 1..=2i64 {
            let mut v = vec![0; dim];
            v[0] = j;
            entries.push((Frequency::new(v), rng.random_range(-1.0..1.0)));
        }
        if dim == 2 {
            entries.push((Frequency::new(vec![1, 1]), rng.random_range(-1.0..1.0)));
        }
        let kernel = KernelSpec::from_entries(dim, entries.clone()).map_err(err)?;
        let (xi, khat) = entries[rng.random_range(0..entries.len())].clone();
        let k = 4.0 * PI * PI * xi.0.iter().map(|v| (v * v) as f64).sum::<f64>();
        // every third case sits on the mode threshold when one exists
        let gamma = if case % 3 == 0 && khat < 0.0 {
            nu * nu * k / -khat
        } else {
            rng.random_range(0.0..3.0) * nu * nu * k
        };
        let sigma = nu * nu * k * k + gamma * k * khat;
        let mm = mode_matrix(&ModelParams::new(nu, gamma, kernel).map_err(err)?, &xi).map_err(err)?;
        let scale = (nu * k).powi(2) + (gamma * k * khat).abs();
        if (mm.sigma - sigma).abs() > 1e-14 * scale {
            return outcome(false, format!("case {case}: reported sigma {} vs formula {sigma}", mm.sigma));
        }
        let sq = mm.square();
        let dev = [sq[0][0] - mm.sigma, sq[0][1], sq[1][0], sq[1][1] - mm.sigma]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            / (1.0 + mm.sigma.abs());
        worst = worst.max(dev);
        let ok = match mm.eigen_structure(1e-12) {
            EigenStructure::Hyperbolic(r) => {
                counts[0] += 1;
                sigma > 1e-12 * scale && (r - sigma.sqrt()).abs() <= 1e-10 * r
            }
            EigenStructure::Nilpotent => {
                counts[1] += 1;
                sigma.abs() <= 1e-10 * scale && mm.m.iter().flatten().any(|&v| v != 0.0)
            }
            EigenStructure::Elliptic(w) => {
                counts[2] += 1;
                sigma < -1e-12 * scale && (w - (-sigma).sqrt()).abs() <= 1e-10 * w
            }
        };
        if !ok {
            return outcome(false, format!("case {case}: eigen structure disagrees with sigma = {sigma:e}"));
        }
    }
    outcome(
        worst <= 1e-12,
        format!(
            "max |M^2 - sigma I|/(1+|sigma|) = {worst:.1e}; hyperbolic/nilpotent/elliptic = {}/{}/{}",
            counts[0], counts[1], counts[2]
        ),
    )
}

fn c03_two_mode() -> Result<Outcome, String> {
    let set = |a1: f64| -> Result<Vec<i64>, String> {
        let cc = critical_coupling(1.0, &KernelSpec::two_mode(a1, 1.0).map_err(err)?);
        let mut s: Vec<i64> = cc.critical_set.iter().map(|f| f.0[0].abs()).collect();
        s.sort();
        Ok(s)
    };
    let (a, b, c) = (set(0.3)?, set(0.2)?, set(0.25)?);
    outcome(
        a == [1] && b == [2] && c == [1, 2],
        format!("a1/a2 = 0.3 -> {a:?}, 0.2 -> {b:?}, 0.25 -> {c:?}"),
    )
}

/// Two-sided fine-step RK4 shooting for U' = MU, U = (w, mu), matched at T/2.
fn shooting_oracle(m: [[f64; 2]; 2], mu0: Complex64, g: Complex64, t_final: f64, times: &[f64]) -> Vec<[Complex64; 2]> {
    let rho = (m[0][0] * m[0][0] + m[0][1] * m[1][0]).abs().sqrt().max(1.0);
    let f = |u: [Complex64; 2]| [u[0] * m[0][0] + u[1] * m[0][1], u[0] * m[1][0] + u[1] * m[1][1]];
    let step = |u: [Complex64; 2], h: f64| {
        let ax = |a: [Complex64; 2], b: [Complex64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
        let k1 = f(u);
        let k2 = f(ax(u, k1, 0.5 * h));
        let k3 = f(ax(u, k2, 0.5 * h));
        let k4 = f(ax(u, k3, h));
        [
            u[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
            u[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
        ]
    };
    let flow = |u: [Complex64; 2], from: f64, to: f64| {
        if from == to {
            return u;
        }
        let n = ((rho * (to - from).abs() / 2e-3).ceil() as usize).max(10);
        let h = (to - from) / n as f64;
        (0..n).fold(u, |u, _| step(u, h))
    };
    let half = 0.5 * t_final;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // forward from (w0, mu0), backward from (g, muT); solve for w0 and muT
    let fa = flow([one, zero], 0.0, half);
    let fb = flow([zero, mu0], 0.0, half);
    let ba = flow([zero, one], t_final, half);
    let bb = flow([g, zero], t_final, half);
    // w0*fa + fb = muT*ba + bb
    let (a00, a01, a10, a11) = (fa[0], -ba[0], fa[1], -ba[1]);
    let (r0, r1) = (bb[0] - fb[0], bb[1] - fb[1]);
    let det = a00 * a11 - a01 * a10;
    let w0 = (r0 * a11 - a01 * r1) / det;
    let mut_t = (a00 * r1 - r0 * a10) / det;
    times
        .iter()
        .map(|&t| if t <= half { flow([w0, mu0], 0.0, t) } else { flow([g, mut_t], t_final, t) })
        .collect()
}

fn c04_linear_bvp() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut bc) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let nu = rng.random_range(0.2..1.5);
        let khat = rng.random_range(-1.0..1.0);
        let xi = Frequency::d1(rng.random_range(1..=3));
        let k = xi.k();
        let kernel = KernelSpec::from_entries(1, [(xi.clone(), khat)]).map_err(err)?;
        let gamma = if khat < 0.0 {
            rng.random_range(0.0..0.95) * nu * nu * k / -khat
        } else {
            rng.random_range(0.0..5.0) * nu * nu * k
        };
        let sigma = nu * nu * k * k + gamma * k * khat;
        let rho = sigma.sqrt();
        let t_final = rng.random_range(0.1..20.0) / rho;
        let mu0 = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let g = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let times = uniform_times(t_final, 41);
        let params = ModelParams::new(nu, gamma, kernel).map_err(err)?;
        let tr = solve_mode_bvp(&params, &ModeBvpData { xi, mu0, g_t: g, t_final }, &times).map_err(err)?;
        let m = [[nu * k, -gamma * khat], [-k, -nu * k]];
        let oracle = shooting_oracle(m, mu0, g, t_final, &times);
        let scale = oracle.iter().fold(0.0f64, |s, u| s.max(u[0].norm()).max(u[1].norm()));
        for (j, u) in oracle.iter().enumerate() {
            worst = worst.max(((tr.w[j] - u[0]).norm()).max((tr.mu[j] - u[1]).norm()) / scale);
        }
        bc = bc.max((tr.mu[0] - mu0).norm()).max((tr.w[40] - g).norm());
    }
    let p = ModelParams::new(1.0, 10.0, KernelSpec::cosine()).map_err(err)?;
    let r = mode_matrix(&p, &Frequency::d1(1)).map_err(err)?.rate().unwrap();
    let t_huge = 1e4 / r;
    let one = Complex64::new(1.0, 0.0);
    let big = solve_mode_bvp(
        &p,
        &ModeBvpData { xi: Frequency::d1(1), mu0: one, g_t: one, t_final: t_huge },
        &uniform_times(t_huge, 101),
    )
    .map_err(err)?;
    let finite = big.w.iter().chain(&big.mu).all(|z| z.re.is_finite() && z.im.is_finite());
    outcome(
        worst <= 1e-6 && bc <= 1e-10 && finite,
        format!("max relative deviation {worst:.1e}, boundary residual {bc:.1e}, rho*T = 1e4 finite: {finite}"),
    )
}

fn c05_linear_rate() -> Result<Outcome, String> {
    let p = ModelParams::new(1.0, 0.5 * gc_cos(1.0), KernelSpec::cosine()).map_err(err)?;
    let t_final = 4.0;
    let env = linear_turnpike_envelope(
        &p,
        &cosine_field(16, 0.01, &[1]),
        &GridField::zeros(1, 16).map_err(err)?,
        t_final,
        &uniform_times(t_final, 801),
    )
    .map_err(err)?;
    let rate = env.summary.fitted_rate.ok_or("flat envelope")?;
    let r = rho(&p).map_err(err)?.value().ok_or("gap closed")?;
    let rel = (rate / r - 1.0).abs();
    outcome(rel <= 0.02, format!("fitted {rate:.6}, rho {r:.6}, relative gap {rel:.1e}"))
}

fn c06_nonlinear_linear() -> Result<Outcome, String> {
    let p = ModelParams::new(1.0, 0.5 * gc_cos(1.0), KernelSpec::cosine()).map_err(err)?;
    let opts = |linearized| SolveOptions { scheme: Scheme::Newton, tol: 1e-13, max_iter: 50, linearized, ..Default::default() };
    let mut devs = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let (m0, g) = preset_data(&p, &DataPreset::CosineMode, eps, 16).map_err(err)?;
        let prob = MfgProblem::new(p.clone(), m0, g, 1.0, 200).map_err(err)?;
        let nl = solve_mfg(&prob, &opts(false)).map_err(err)?;
        let lin = solve_mfg(&prob, &opts(true)).map_err(err)?;
        let l2 = |a: &[f64], b: &[f64]| (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt();
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for j in 0..nl.m.len() {
            num = num.max(l2(&nl.m[j], &lin.m[j]));
            den = den.max(l2(&lin.m[j], &vec![1.0; lin.m[j].len()]));
        }
        devs.push(num / den);
    }
    let ratios = [devs[0] / devs[1], devs[1] / devs[2]];
    outcome(
        ratios.iter().all(|r| (5.0..=20.0).contains(r)),
        format!("relative deviations {:.2e} {:.2e} {:.2e}; decade ratios {:.2} {:.2}", devs[0], devs[1], devs[2], ratios[0], ratios[1]),
    )
}

fn c07_sweep() -> Result<Outcome, String> {
    let table = turnpike_sweep(1.0, &KernelSpec::cosine(), &[0.5, 0.7, 0.85, 0.93, 0.97], &SweepOptions::default())
        .map_err(err)?;
    let slope = table.fit.slope;
    let near: Vec<f64> = table.rows.iter().rev().take(2).map(|r| r.normalized).collect();
    outcome(
        (slope - 0.5).abs() <= 0.05 && near.iter().all(|v| (0.8..=1.2).contains(v)),
        format!("slope {slope:.4}; normalized rate at 0.97, 0.93: {:.4}, {:.4}", near[0], near[1]),
    )
}

fn c08_reduced() -> Result<Outcome, String> {
    let model = ReducedModel::cubic(1.0).map_err(err)?;
    let a0 = 3.0;
    let ts: Vec<f64> = (0..7).map(|i| 10f64.powf(1.0 + i as f64 / 3.0)).collect();
    let table = midpoint_scaling(&model, a0, &ts, 1e-3).map_err(err)?;
    let exp = table.exponent();
    let traj = integrate_reduced(&model, a0, 1000.0, 1e-3).map_err(err)?;
    let cf_err = traj
        .times
        .iter()
        .zip(&traj.amplitudes)
        .map(|(&t, &a)| {
            let exact = a0 / (1.0 + 2.0 * a0 * a0 * t).sqrt();
            ((a - exact) / exact).abs()
        })
        .fold(0.0, f64::max);
    outcome(
        (exp + 0.5).abs() <= 0.01 && cf_err <= 1e-8,
        format!("a0 = {a0}: exponent {exp:.4}; closed-form deviation {cf_err:.1e}"),
    )
}

fn c09_critical_full() -> Result<Outcome, String> {
    let table = critical_midpoint_experiment(1.0, &KernelSpec::cosine(), 0.2, &[8.0, 16.0, 32.0, 64.0], &CriticalRunOptions::default())
        .map_err(err)?;
    let slope = table.amplitude_fit.slope;
    let rate = table.stable_rate().unwrap_or(f64::NAN);
    outcome(
        (slope + 0.5).abs() <= 0.15 && rate >= 0.5 * table.c1,
        format!("amplitude slope {slope:.4}; stable-complement rate {rate:.4} vs 0.5*c1 = {:.4}", 0.5 * table.c1),
    )
}

fn branch_schedule() -> Vec<f64> {
    (0..8).map(|i| gc_cos(1.0) * (1.0 + 10f64.powf(-4.0 + 2.0 * i as f64 / 7.0))).collect()
}

fn c10_branch() -> Result<Outcome, String> {
    let kernel = KernelSpec::cosine();
    let opts = BranchOptions { nx: 32, ..BranchOptions::default() };
    let diag = continue_branch(1.0, &kernel, &branch_schedule(), &opts).map_err(err)?;
    if let Some(f) = &diag.failure {
        return outcome(false, format!("continuation truncated: {f}"));
    }
    let converged = diag.points.len() == 8 && diag.points.iter().all(|p| p.state.residual <= ACCEPT_TOL);
    let max_res = diag.points.iter().fold(0.0f64, |m, p| m.max(p.state.residual));
    let min_m = diag.points.iter().fold(f64::INFINITY, |m, p| m.min(p.state.min_density()));
    let exp = diag.exponent().ok_or("no fit")?;
    let last = diag.points.last().ok_or("empty branch")?;
    let params = ModelParams::new(1.0, last.state.gamma, kernel.clone()).map_err(err)?;
    let pf = pitchfork_check(last, &params, &[0.25, 0.5], ACCEPT_TOL).map_err(err)?;
    let flipped = pf.shifted_amplitude * pf.amplitude < 0.0 && pf.shifted_residual <= ACCEPT_TOL;
    let sub = ModelParams::new(1.0, 0.99 * gc_cos(1.0), kernel).map_err(err)?;
    let sub_amp = subcritical_probe(&sub, &[0.05, 0.1, 0.2], 32).map_err(err)?.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    outcome(
        converged && (exp - 0.5).abs() <= 0.05 && min_m > 0.0 && flipped && sub_amp <= 1e-9,
        format!(
            "{} points, max residual {max_res:.1e}, exponent {exp:.4}, min m {min_m:.4}, shift residual {:.1e}, subcritical |A| {sub_amp:.1e}",
            diag.points.len(),
            pf.shifted_residual
        ),
    )
}

fn c11_beta() -> Result<Outcome, String> {
    let kernel = KernelSpec::cosine();
    let gc = gc_cos(1.0);
    let diag = continue_branch(1.0, &kernel, &branch_schedule(), &BranchOptions { nx: 32, ..BranchOptions::default() })
        .map_err(err)?;
    let eig: Vec<f64> = [-0.01, -0.005, 0.0, 0.005, 0.01].iter().map(|d| gc * (1.0 + d)).collect();
    let track = critical_eigen_tracking(1.0, &kernel, &eig, 32).map_err(err)?;
    let betas = beta_estimates(&diag, track.alpha_hat);
    let from_fit = track.alpha_hat / diag.alpha_over_beta.ok_or("no fit")?;
    let lo = betas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = betas.iter().cloned().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let vs_fit = betas.iter().map(|b| (b / from_fit - 1.0).abs()).fold(0.0, f64::max);
    outcome(
        spread <= 0.1 && vs_fit <= 0.1,
        format!(
            "alpha {:.6}; beta in [{lo:.4}, {hi:.4}] (spread {spread:.1e}); fit beta {from_fit:.4} (max deviation {vs_fit:.1e})",
            track.alpha_hat
        ),
    )
}

fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Exhaustive cyclic-rotation assignment between equal-size samples.
fn rotation_oracle(x: &[f64], y: &[f64]) -> f64 {
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let n = xs.len();
    (0..n)
        .map(|r| (0..n).map(|i| circ(xs[i], ys[(i + r) % n]).powi(2)).sum::<f64>() / n as f64)
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

fn c12_wasserstein() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst, mut max_w2) = (0.0f64, 0.0f64);
    for trial in 0..60 {
        let n = [1, 2, 3, 7, 20, 64, 150, 200][trial % 8];
        let clustered = trial % 3 == 0;
        let mut draw = |c: f64| -> Vec<f64> {
            (0..n)
                .map(|_| if clustered { (c + 0.1 * rng.random::<f64>()).rem_euclid(1.0) } else { rng.random::<f64>() })
                .collect()
        };
        let x = draw(0.0);
        let y = draw(0.5);
        let w = w2_circle(&x, &Reference::Empirical(&y)).map_err(err)?;
        worst = worst.max((w - rotation_oracle(&x, &y)).abs());
        max_w2 = max_w2.max(w).max(w2_circle(&x, &Reference::Uniform).map_err(err)?);
    }
    let antipodal = w2_circle(&[0.0], &Reference::Empirical(&[0.5])).map_err(err)?;
    outcome(
        worst <= 1e-9 && max_w2 <= 0.5 && (antipodal - 0.5).abs() <= 1e-12,
        format!("max deviation from rotation oracle {worst:.1e}; max W2 {max_w2:.4}; antipodal atoms {antipodal}"),
    )
}

fn c13_chaos() -> Result<Outcome, String> {
    let p = ModelParams::new(0.5, 0.5 * gc_cos(0.5), KernelSpec::cosine()).map_err(err)?;
    let (m0, g) = preset_data(&p, &DataPreset::CosineMode, 0.3, 16).map_err(err)?;
    let prob = MfgProblem::new(p, m0, g, 2.0, 200).map_err(err)?;
    let opts = SolveOptions { scheme: Scheme::Newton, tol: 1e-10, max_iter: 50, ..Default::default() };
    let seeds: Vec<u64> = (0..20).collect();
    let rep = chaos_experiment(&prob, &opts, &[100, 1000, 10000], &seeds).map_err(err)?;
    let med: Vec<f64> = [100, 1000, 10000]
        .iter()
        .map(|&n| rep.summary(n, 1.0).map(|s| s.median).ok_or("missing summary"))
        .collect::<Result<_, _>>()?;
    let factor = med[0] / med[2];
    outcome(
        med[0] > med[1] && med[1] > med[2] && factor >= 3.0,
        format!("median W2 at T/2: {:.4e}, {:.4e}, {:.4e}; N=100 / N=10000 = {factor:.2}", med[0], med[1], med[2]),
    )
}

fn c14_monotone() -> Result<Outcome, String> {
    let kernel = KernelSpec::from_entries(
        1,
        [(Frequency::d1(1), 0.5), (Frequency::d1(2), 0.0), (Frequency::d1(3), 0.5)],
    )
    .map_err(err)?;
    let infinite = !critical_coupling(1.0, &kernel).is_finite();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut min_q = f64::INFINITY;
    for _ in 0..100 {
        let v: Vec<f64> = (0..32).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = GridField::new(1, 32, v).map_err(err)?.mean_removed();
        min_q = min_q.min(quadratic_form(&kernel, &f));
    }
    let strong = ModelParams::new(1.0, 1e3, kernel.clone()).map_err(err)?;
    let rho0 = rho(&ModelParams::new(1.0, 0.0, kernel).map_err(err)?).map_err(err)?.value().ok_or("gap closed")?;
    let t_final = 0.2;
    let env = linear_turnpike_envelope(
        &strong,
        &cosine_field(16, 0.01, &[1, 2, 3]),
        &GridField::zeros(1, 16).map_err(err)?,
        t_final,
        &uniform_times(t_final, 401),
    )
    .map_err(err)?;
    let rate = env.summary.fitted_rate.ok_or("flat envelope")?;
    outcome(
        infinite && min_q >= 0.0 && rate >= 0.9 * rho0,
        format!("gamma_c infinite: {infinite}; min quadratic form {min_q:.3e}; rate at gamma = 1e3 {rate:.3} vs rho(0) {rho0:.3}"),
    )
}

fn main() {
    let criteria: [(u32, &str, f64, Check); 14] = [
        (1, "threshold exactness", 1.0, c01_threshold),
        (2, "mode-identity suite", 1.0, c02_mode_identities),
        (3, "two-mode switch", 1.0, c03_two_mode),
        (4, "linear BVP vs shooting", 10.0, c04_linear_bvp),
        (5, "linear turnpike rate", 5.0, c05_linear_rate),
        (6, "nonlinear-linear consistency", 300.0, c06_nonlinear_linear),
        (7, "rate degeneration law", 900.0, c07_sweep),
        (8, "reduced midpoint scaling", 10.0, c08_reduced),
        (9, "full-solver midpoint scaling", 1800.0, c09_critical_full),
        (10, "bifurcation branch", 600.0, c10_branch),
        (11, "two-estimator beta", 300.0, c11_beta),
        (12, "Wasserstein oracle", 30.0, c12_wasserstein),
        (13, "qualitative chaos", 1200.0, c13_chaos),
        (14, "monotone-kernel null result", 10.0, c14_monotone),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, limit, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && secs <= limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let expected = EXPECTED_FAIL.contains(&id);
        let tag = match (pass, expected) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag}: {name} [{secs:.1} s, limit {limit} s] {detail}");
        if !pass && !expected {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
