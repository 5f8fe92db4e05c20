//! Newton's method on the full space-time discrete system.
//!
//! Unknowns are grouped in slabs [φⁿ; mⁿ⁺¹] for n = 0..n_t−1. Slab n holds
//! the forward equation FPₙ in its first half and the backward equation
//! HJBₙ in its second half, which makes the Jacobian banded with both
//! bandwidths 2N−1 (N grid values per slice).

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_slice, sup_l2_diff, MfgProblem, Solution, SolveOptions, StepContext, ZERO};
use crate::error::{Error, Result};
use crate::numerics::BandMatrix;

type Block = Vec<f64>;

struct System<'a> {
    ctx: &'a StepContext<'a>,
    m0: &'a [f64],
    g: &'a [f64],
    nt: usize,
    len: usize,
}

impl System<'_> {
    fn dt(&self) -> f64 {
        self.ctx.dt
    }

    fn phi<'b>(&'b self, x: &'b [f64], n: usize) -> &'b [f64] {
        if n == self.nt {
            self.g
        } else {
            &x[2 * self.len * n..2 * self.len * n + self.len]
        }
    }

    fn m<'b>(&'b self, x: &'b [f64], n: usize) -> &'b [f64] {
        if n == 0 {
            self.m0
        } else {
            let s = 2 * self.len * (n - 1) + self.len;
            &x[s..s + self.len]
        }
    }

    fn heat_hat(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let ops = self.ctx.ops;
        spec.iter()
            .zip(&ops.k)
            .map(|(&c, &k)| c * (1.0 + self.dt() * self.ctx.nu * k))
            .collect()
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let len = self.len;
        let mut r = vec![0.0; 2 * len * self.nt];
        r.par_chunks_mut(2 * len).enumerate().for_each(|(n, out)| {
            let (fp_out, hjb_out) = out.split_at_mut(len);
            fp_out.copy_from_slice(&self.fp_residual(x, n));
            hjb_out.copy_from_slice(&self.hjb_residual(x, n));
        });
        r
    }

    fn fp_residual(&self, x: &[f64], n: usize) -> Vec<f64> {
        let ops = self.ctx.ops;
        let mn = ops.forward(self.m(x, n));
        let mn1 = ops.forward(self.m(x, n + 1));
        let ph = ops.forward(self.phi(x, n));
        let tr = ops.transport_hat(&mn, &ph, self.ctx.linear);
        let heat = self.heat_hat(&mn1);
        let spec: Vec<Complex64> = (0..ops.len).map(|i| heat[i] - mn[i] - self.dt() * tr[i]).collect();
        ops.inverse(&spec)
    }

    fn hjb_residual(&self, x: &[f64], n: usize) -> Vec<f64> {
        let ops = self.ctx.ops;
        let ph = ops.forward(self.phi(x, n));
        let ph1 = ops.forward(self.phi(x, n + 1));
        let mh1 = ops.forward(self.m(x, n + 1));
        let ham = if self.ctx.linear { None } else { Some(ops.hamiltonian_hat(&ph1)) };
        let heat = self.heat_hat(&ph);
        let spec: Vec<Complex64> = (0..ops.len)
            .map(|i| {
                if i == 0 {
                    return ph[0];
                }
                let mut rhs = ph1[i] + self.dt() * self.ctx.gamma * ops.khat[i] * mh1[i];
                if let Some(h) = &ham {
                    rhs -= self.dt() * h[i];
                }
                heat[i] - rhs
            })
            .collect();
        ops.inverse(&spec)
    }

    /// Dense block of a linear map given on spectra; column j is the image
    /// of the j-th unit vector. Stored row-major.
    fn block(&self, op: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Block {
        let ops = self.ctx.ops;
        let len = self.len;
        let mut out = vec![0.0; len * len];
        let mut e = vec![0.0; len];
        for j in 0..len {
            e[j] = 1.0;
            let col = ops.inverse(&op(&ops.forward(&e)));
            e[j] = 0.0;
            for i in 0..len {
                out[i * len + j] = col[i];
            }
        }
        out
    }

    fn assemble(&self, x: &[f64]) -> BandMatrix {
        let len = self.len;
        let nt = self.nt;
        let dt = self.dt();
        let ops = self.ctx.ops;
        let linear = self.ctx.linear;
        let heat = self.block(|s| self.heat_hat(s));
        let coupling = self.block(|s| {
            s.iter().zip(&ops.khat).map(|(&c, &k)| -dt * self.ctx.gamma * k * c).collect()
        });
        // per-slab state-dependent blocks: (∂FPₙ/∂mⁿ, ∂FPₙ/∂φⁿ, ∂HJBₙ/∂φⁿ⁺¹)
        let slabs: Vec<(Option<Block>, Block, Option<Block>)> = (0..nt)
            .into_par_iter()
            .map(|n| {
                let mh = ops.forward(self.m(x, n));
                let ph = ops.forward(self.phi(x, n));
                let d_m = (n > 0).then(|| {
                    self.block(|v| {
                        let tr = if linear { vec![ZERO; len] } else { ops.transport_hat(v, &ph, false) };
                        v.iter().zip(&tr).map(|(&a, &t)| -a - dt * t).collect()
                    })
                });
                let d_phi = self.block(|v| {
                    ops.transport_hat(&mh, v, linear).iter().map(|&t| -dt * t).collect()
                });
                let d_next = (n + 1 < nt).then(|| {
                    let ph1 = ops.forward(self.phi(x, n + 1));
                    self.block(|v| {
                        let hd = if linear { vec![ZERO; len] } else { ops.hamiltonian_derivative_hat(&ph1, v) };
                        let mut out: Vec<Complex64> = v.iter().zip(&hd).map(|(&a, &h)| -a + dt * h).collect();
                        out[0] = ZERO;
                        out
                    })
                });
                (d_m, d_phi, d_next)
            })
            .collect();
        let bw = 2 * len - 1;
        let mut a = BandMatrix::zeros(2 * len * nt, bw, bw);
        let put = |a: &mut BandMatrix, row0: usize, col0: usize, b: &Block| {
            for i in 0..len {
                for j in 0..len {
                    let v = b[i * len + j];
                    if v != 0.0 {
                        a.set(row0 + i, col0 + j, v);
                    }
                }
            }
        };
        for (n, (d_m, d_phi, d_next)) in slabs.iter().enumerate() {
            let fp_row = 2 * len * n;
            let hjb_row = fp_row + len;
            let phi_col = 2 * len * n;
            let m_col = phi_col + len;
            if let Some(b) = d_m {
                put(&mut a, fp_row, m_col - 2 * len, b);
            }
            put(&mut a, fp_row, phi_col, d_phi);
            put(&mut a, fp_row, m_col, &heat);
            put(&mut a, hjb_row, phi_col, &heat);
            put(&mut a, hjb_row, m_col, &coupling);
            if let Some(b) = d_next {
                put(&mut a, hjb_row, phi_col + 2 * len, b);
            }
        }
        a
    }

    fn unpack(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let phi = (0..=self.nt).map(|n| self.phi(x, n).to_vec()).collect();
        let m = (0..=self.nt).map(|n| self.m(x, n).to_vec()).collect();
        (phi, m)
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(super) fn solve(problem: &MfgProblem, ctx: &StepContext, opts: &SolveOptions) -> Result<Solution> {
    let len = ctx.ops.len;
    let nt = problem.nt;
    let sys = System { ctx, m0: problem.m0.values(), g: problem.g.values(), nt, len };
    let mut x = vec![0.0; 2 * len * nt];
    for n in 0..nt {
        x[2 * len * n + len..2 * len * (n + 1)].iter_mut().for_each(|v| *v = 1.0);
    }
    let mut r = sys.residual(&x);
    let mut rn = norm2(&r);
    let mut history = Vec::new();
    // residual level attributable to rounding
    let floor = 1e-14 * (x.len() as f64).sqrt();
    for it in 1..=opts.max_iter {
        let lu = sys.assemble(&x).factorize()?;
        let mut dx: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut dx);
        let mut t = 1.0;
        let (x_new, r_new, rn_new) = loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            let ok = (1..=nt).all(|n| check_slice(sys.m(&trial, n), n, !ctx.linear).is_ok());
            if ok {
                let rt = sys.residual(&trial);
                let rtn = norm2(&rt);
                if rtn <= (1.0 - 1e-4 * t) * rn || rtn <= floor {
                    break (trial, rt, rtn);
                }
            }
            t *= 0.5;
            if t < 1e-8 {
                return Err(Error::NotConverged {
                    iterations: it,
                    residual: rn,
                    history,
                });
            }
        };
        let (_, m_old) = sys.unpack(&x);
        let (phi, m) = sys.unpack(&x_new);
        let step = sup_l2_diff(&m, &m_old);
        history.push(step);
        x = x_new;
        r = r_new;
        rn = rn_new;
        if step <= opts.tol {
            return Ok((phi, m, it, step, history));
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}
