//! Reduced critical amplitude dynamics ȧ = −βa³ + r(a) with |r(a)| ≤ C₀|a|⁵.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fit_line, fit_power_law, LineFit};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReducedModel {
    pub beta: f64,
    /// Coefficient of the quintic term r(a) = C₀a⁵.
    pub quintic: f64,
    pub a_star: f64,
}

impl ReducedModel {
    pub fn cubic(beta: f64) -> Result<Self> {
        Self::new(beta, 0.0, f64::INFINITY)
    }

    pub fn new(beta: f64, quintic: f64, a_star: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        if !(quintic >= 0.0) || !(a_star > 0.0) {
            return Err(Error::Domain("quintic bound must be >= 0 and a_star > 0".into()));
        }
        Ok(ReducedModel { beta, quintic, a_star })
    }

    pub fn rhs(&self, a: f64) -> f64 {
        let a2 = a * a;
        a * a2 * (-self.beta + self.quintic * a2)
    }

    /// a0/√(1 + 2βa0²t) for the pure cubic.
    pub fn closed_form(&self, a0: f64, t: f64) -> f64 {
        a0 / (1.0 + 2.0 * self.beta * a0 * a0 * t).sqrt()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Pure-cubic closed form at the same times; `None` when C₀ > 0.
    pub closed_form: Option<Vec<f64>>,
    pub within_radius: bool,
}

impl ReducedTrajectory {
    pub fn final_amplitude(&self) -> f64 {
        *self.amplitudes.last().expect("trajectory has at least one sample")
    }

    /// Largest relative deviation from the closed form.
    pub fn closed_form_error(&self) -> Option<f64> {
        self.closed_form.as_ref().map(|cf| {
            self.amplitudes
                .iter()
                .zip(cf)
                .map(|(a, c)| if *c == 0.0 { a.abs() } else { ((a - c) / c).abs() })
                .fold(0.0, f64::max)
        })
    }
}

/// Classical RK4 with n = ⌈T/dt⌉ equal steps ending exactly at T.
pub fn integrate_reduced(model: &ReducedModel, a0: f64, t_final: f64, dt: f64) -> Result<ReducedTrajectory> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::Domain("need dt > 0 and T >= 0".into()));
    }
    if a0.abs() > model.a_star {
        return Err(Error::Domain(format!("|a0| = {} exceeds a_star = {}", a0.abs(), model.a_star)));
    }
    let steps = ((t_final / dt).ceil() as usize).max(1);
    let h = t_final / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut amps = Vec::with_capacity(steps + 1);
    let mut a = a0;
    let mut within = true;
    times.push(0.0);
    amps.push(a);
    for i in 1..=steps {
        let k1 = model.rhs(a);
        let k2 = model.rhs(a + 0.5 * h * k1);
        let k3 = model.rhs(a + 0.5 * h * k2);
        let k4 = model.rhs(a + h * k3);
        a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        within &= a.abs() <= model.a_star;
        times.push(i as f64 * h);
        amps.push(a);
    }
    let closed_form = (model.quintic == 0.0).then(|| times.iter().map(|&t| model.closed_form(a0, t)).collect());
    Ok(ReducedTrajectory { times, amplitudes: amps, closed_form, within_radius: within })
}

/// Linear fit of a⁻² against t; the slope estimates 2β.
pub fn inverse_square_law_check(traj: &ReducedTrajectory) -> Result<LineFit> {
    if traj.amplitudes.iter().any(|a| a.abs() < 1e-8) {
        return Err(Error::Domain("amplitude below 1e-8; inverse square undefined".into()));
    }
    let y: Vec<f64> = traj.amplitudes.iter().map(|a| 1.0 / (a * a)).collect();
    fit_line(&traj.times, &y)
}

#[derive(Debug, Clone, Serialize)]
pub struct MidpointTable {
    pub rows: Vec<MidpointRow>,
    /// Fit of log|a(T/2)| against log T.
    pub fit: LineFit,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MidpointRow {
    pub t_final: f64,
    pub a_mid: f64,
    pub closed_form_a_mid: f64,
}

impl MidpointTable {
    pub fn exponent(&self) -> f64 {
        self.fit.slope
    }

    pub fn prefactor(&self) -> f64 {
        self.fit.intercept.exp()
    }

    /// CSV: T,a_mid,closed_form_a_mid.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "T,a_mid,closed_form_a_mid")?;
        for r in &self.rows {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", r.t_final, r.a_mid, r.closed_form_a_mid)?;
        }
        Ok(())
    }
}

pub fn midpoint_scaling(model: &ReducedModel, a0: f64, t_list: &[f64], dt: f64) -> Result<MidpointTable> {
    let rows = t_list
        .iter()
        .map(|&t| {
            let traj = integrate_reduced(model, a0, 0.5 * t, dt)?;
            Ok(MidpointRow {
                t_final: t,
                a_mid: traj.final_amplitude(),
                closed_form_a_mid: model.closed_form(a0, 0.5 * t),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ts: Vec<f64> = rows.iter().map(|r| r.t_final).collect();
    let amps: Vec<f64> = rows.iter().map(|r| r.a_mid.abs()).collect();
    let fit = fit_power_law(&ts, &amps)?;
    Ok(MidpointTable { rows, fit })
}
