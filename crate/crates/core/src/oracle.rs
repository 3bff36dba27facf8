//! Brute-force verifier: discretize the penalized maximum-likelihood
//! objective directly over nodal values of the log-density and minimize it
//! by gradient descent. Slow and simple on purpose — it shares no code with
//! the boundary-value solver, so agreement between the two is meaningful
//! evidence. Desk-scale instances only.
//!
//! The objective, for samples t_i with multiplicities m_i summing to n:
//!
//! ```text
//! J(v) = -(1/n) sum_i m_i v(t_i) + log \int e^v
//!        + (alpha/n) \int vdot^2 + (alpha beta^2/n) \int (v - w)^2
//! ```
//!
//! Integrals use trapezoid quadrature on a uniform grid that must contain
//! every sample as a node; vdot uses forward differences per interval. With
//! no samples the empirical-likelihood block (the first two terms) is an
//! empty average and drops out, leaving the penalties with unit weight.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::samples::SampleSet;

/// Iteration cap for the descent loop.
pub const ITERATION_CAP: usize = 1_000_000;

/// Minimizer output.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub v: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Uniform grid of `count` nodes spanning [0,1].
pub fn uniform_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 / (count - 1) as f64).collect()
}

fn sample_node_indices(samples: &SampleSet, grid: &[f64]) -> Result<Vec<usize>> {
    samples
        .points()
        .iter()
        .map(|&p| {
            let guess = (p * (grid.len() - 1) as f64).round() as usize;
            for idx in [guess.saturating_sub(1), guess, guess + 1] {
                if idx < grid.len() && (grid[idx] - p).abs() <= 1e-12 {
                    return Ok(idx);
                }
            }
            Err(Error::SampleOffGrid { value: p })
        })
        .collect()
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = grid[k + 1] - grid[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

/// The discretized objective at nodal values `v`.
pub fn objective(
    v: &[f64],
    samples: &SampleSet,
    params: &ModelParams,
    grid: &[f64],
) -> Result<f64> {
    let ctx = Context::prepare(samples, params, grid, v.len())?;
    Ok(ctx.objective(v))
}

/// Gradient of `objective` with respect to the nodal values.
pub fn gradient(
    v: &[f64],
    samples: &SampleSet,
    params: &ModelParams,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let ctx = Context::prepare(samples, params, grid, v.len())?;
    Ok(ctx.gradient(v))
}

struct Context<'g> {
    grid: &'g [f64],
    quad: Vec<f64>,
    w_values: Vec<f64>,
    sample_idx: Vec<usize>,
    sample_mult: Vec<f64>,
    total: f64,
    alpha: f64,
    beta2: f64,
}

impl<'g> Context<'g> {
    fn prepare(
        samples: &SampleSet,
        params: &ModelParams,
        grid: &'g [f64],
        v_len: usize,
    ) -> Result<Self> {
        if v_len != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: v_len });
        }
        let w_values: Result<Vec<f64>> = grid.iter().map(|&t| params.w.eval(t)).collect();
        Ok(Self {
            grid,
            quad: trapezoid_weights(grid),
            w_values: w_values?,
            sample_idx: sample_node_indices(samples, grid)?,
            sample_mult: samples.multiplicities().to_vec(),
            total: samples.total_weight(),
            alpha: params.alpha,
            beta2: params.beta * params.beta,
        })
    }

    /// 1/n, or 1 for the empty dataset (so the penalties keep unit weight).
    fn scale(&self) -> f64 {
        if self.total > 0.0 {
            1.0 / self.total
        } else {
            1.0
        }
    }

    fn objective(&self, v: &[f64]) -> f64 {
        let scale = self.scale();
        let mut obj = 0.0;
        if self.total > 0.0 {
            for (&idx, &m) in self.sample_idx.iter().zip(&self.sample_mult) {
                obj -= scale * m * v[idx];
            }
            let integral: f64 = self.quad.iter().zip(v).map(|(&q, &vk)| q * vk.exp()).sum();
            obj += integral.ln();
        }
        let mut roughness = 0.0;
        for k in 0..v.len() - 1 {
            let h = self.grid[k + 1] - self.grid[k];
            let d = v[k + 1] - v[k];
            roughness += d * d / h;
        }
        obj += self.alpha * scale * roughness;
        let structure: f64 = self
            .quad
            .iter()
            .zip(v)
            .zip(&self.w_values)
            .map(|((&q, &vk), &wk)| q * (vk - wk) * (vk - wk))
            .sum();
        obj + self.alpha * self.beta2 * scale * structure
    }

    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let scale = self.scale();
        let n = v.len();
        let mut g = vec![0.0; n];
        if self.total > 0.0 {
            for (&idx, &m) in self.sample_idx.iter().zip(&self.sample_mult) {
                g[idx] -= scale * m;
            }
            let weighted: Vec<f64> =
                self.quad.iter().zip(v).map(|(&q, &vk)| q * vk.exp()).collect();
            let integral: f64 = weighted.iter().sum();
            for k in 0..n {
                g[k] += weighted[k] / integral;
            }
        }
        for k in 0..n - 1 {
            let h = self.grid[k + 1] - self.grid[k];
            let d = 2.0 * (v[k + 1] - v[k]) / h * self.alpha * scale;
            g[k] -= d;
            g[k + 1] += d;
        }
        for k in 0..n {
            g[k] += 2.0 * self.alpha * self.beta2 * scale * self.quad[k] * (v[k] - self.w_values[k]);
        }
        g
    }
}

/// Gradient descent with Armijo backtracking from v = 0, until the gradient
/// infinity norm falls below `tol`.
pub fn minimize(
    samples: &SampleSet,
    params: &ModelParams,
    node_count: usize,
    tol: f64,
) -> Result<OracleResult> {
    if node_count < samples.len() + 2 {
        return Err(Error::InvalidParameter(format!(
            "oracle grid needs at least {} nodes, got {node_count}",
            samples.len() + 2
        )));
    }
    let grid = uniform_grid(node_count);
    let ctx = Context::prepare(samples, params, &grid, node_count)?;

    let mut v = vec![0.0; node_count];
    let mut obj = ctx.objective(&v);
    let mut step = 1.0;
    for iter in 0..ITERATION_CAP {
        let g = ctx.gradient(&v);
        let grad_norm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if grad_norm <= tol {
            return Ok(OracleResult { v, objective: obj, iterations: iter, grad_norm });
        }
        let g2: f64 = g.iter().map(|x| x * x).sum();
        loop {
            let trial: Vec<f64> = v.iter().zip(&g).map(|(&vk, &gk)| vk - step * gk).collect();
            let trial_obj = ctx.objective(&trial);
            if trial_obj.is_finite() && trial_obj <= obj - 1e-4 * step * g2 {
                v = trial;
                obj = trial_obj;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                return Err(Error::IterationCap { cap: iter, grad_norm });
            }
        }
        step = (step * 2.0).min(1e6);
    }
    let g = ctx.gradient(&v);
    let grad_norm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Err(Error::IterationCap { cap: ITERATION_CAP, grad_norm })
}

/// Normalizes nodal log-density values so the trapezoid integral of e^v is
/// one, the same normalization the boundary-value problem imposes.
pub fn normalize(v: &[f64], grid: &[f64]) -> Vec<f64> {
    let quad = trapezoid_weights(grid);
    let integral: f64 = quad.iter().zip(v).map(|(&q, &vk)| q * vk.exp()).sum();
    let shift = integral.ln();
    v.iter().map(|&vk| vk - shift).collect()
}
