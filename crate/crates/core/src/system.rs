//! The discretized boundary-value system: stepping residuals for the Euler
//! and trapezoidal schemes, the four boundary rows, and the exact sparse
//! Jacobian of the whole map.
//!
//! Unknowns are the node values (y1, y2, y3) at each of the L+1 grid nodes
//! plus the scalar multiplier gamma, flattened node-major: the unknown
//! 3k + j is component j at node k, and gamma sits at index 3L + 3. Residual
//! rows follow the same node-major order for the 3L stepping equations and
//! end with the four boundary rows [y1(0), y1(L) - 1, y3(0), y3(L)].

use crate::error::{Error, Result};
use crate::model::{ModelParams, Scheme};
use crate::partition::Partition;

/// Largest y2 for which exp(y2) is considered evaluable; beyond this the
/// iterate is reported divergent rather than letting the residual overflow.
pub const EXP_OVERFLOW_LIMIT: f64 = 700.0;

/// Node values of the three state components plus the multiplier gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub y3: Vec<f64>,
    pub gamma: f64,
}

impl StateVector {
    pub fn zeros(node_count: usize) -> Self {
        Self {
            y1: vec![0.0; node_count],
            y2: vec![0.0; node_count],
            y3: vec![0.0; node_count],
            gamma: 0.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.y1.len()
    }

    /// Total unknown count 3(L+1) + 1.
    pub fn dim(&self) -> usize {
        3 * self.node_count() + 1
    }

    /// Returns the state shifted by `scale * delta`, with `delta` in the
    /// flattened unknown order.
    pub fn add_scaled(&self, delta: &[f64], scale: f64) -> Self {
        debug_assert_eq!(delta.len(), self.dim());
        let n = self.node_count();
        let mut out = self.clone();
        for k in 0..n {
            out.y1[k] += scale * delta[3 * k];
            out.y2[k] += scale * delta[3 * k + 1];
            out.y3[k] += scale * delta[3 * k + 2];
        }
        out.gamma += scale * delta[3 * n];
        out
    }

    fn check_sized_for(&self, grid: &Partition) -> Result<()> {
        let expected = grid.node_count();
        if self.y1.len() != expected || self.y2.len() != expected || self.y3.len() != expected {
            return Err(Error::SizeMismatch { expected, got: self.y1.len() });
        }
        Ok(())
    }
}

/// Residual vector and its infinity norm.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub values: Vec<f64>,
    pub inf_norm: f64,
}

impl ResidualReport {
    fn new(values: Vec<f64>) -> Self {
        let inf_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self { values, inf_norm }
    }
}

/// Right-hand side of the y3 equation: `beta^2 (y2 - w) + gamma e^{y2}`,
/// with `w` the reference value at the evaluation point.
pub fn rhs_f(y2: f64, t: f64, params: &ModelParams, gamma: f64) -> Result<f64> {
    rhs_f_at(y2, params.w.eval(t)?, params.beta, gamma)
}

/// Same right-hand side with the reference value supplied directly.
pub fn rhs_f_at(y2: f64, w_value: f64, beta: f64, gamma: f64) -> Result<f64> {
    Ok(rhs_with_w(y2, w_value, beta, gamma, checked_exp(y2, 0)?))
}

#[inline]
fn rhs_with_w(y2: f64, w: f64, beta: f64, gamma: f64, exp_y2: f64) -> f64 {
    beta * beta * (y2 - w) + gamma * exp_y2
}

#[inline]
fn checked_exp(y2: f64, node: usize) -> Result<f64> {
    if y2 > EXP_OVERFLOW_LIMIT || !y2.is_finite() {
        return Err(Error::DivergentIterate { node, value: y2 });
    }
    Ok(y2.exp())
}

/// Per-step jump sizes: `mult/alpha` on steps leaving a data node, zero
/// elsewhere.
fn jump_sizes(grid: &Partition, alpha: f64) -> Vec<f64> {
    let mut jumps = vec![0.0; grid.interval_count()];
    for (&idx, &mult) in grid.data_indices().iter().zip(grid.jump_multiplicities()) {
        jumps[idx] = mult / alpha;
    }
    jumps
}

/// Residual of the Euler discretization.
pub fn residual_euler(
    state: &StateVector,
    grid: &Partition,
    params: &ModelParams,
) -> Result<ResidualReport> {
    residual(state, grid, params, Scheme::Euler)
}

/// Residual of the trapezoidal discretization.
pub fn residual_trapezoid(
    state: &StateVector,
    grid: &Partition,
    params: &ModelParams,
) -> Result<ResidualReport> {
    residual(state, grid, params, Scheme::Trapezoid)
}

/// Residual of the chosen scheme: 3L stepping rows then the boundary rows.
pub fn residual(
    state: &StateVector,
    grid: &Partition,
    params: &ModelParams,
    scheme: Scheme,
) -> Result<ResidualReport> {
    state.check_sized_for(grid)?;
    let l = grid.interval_count();
    let w = params.w.values_on(grid)?;
    let jumps = jump_sizes(grid, params.alpha);
    let gamma = state.gamma;

    let mut exp_y2 = Vec::with_capacity(l + 1);
    for (node, &v) in state.y2.iter().enumerate() {
        exp_y2.push(checked_exp(v, node)?);
    }

    let mut values = Vec::with_capacity(3 * l + 4);
    for k in 0..l {
        let h = grid.steps()[k];
        let jump = jumps[k];
        let (d1, d2, d3) = match scheme {
            Scheme::Euler => (
                h * exp_y2[k],
                h * (state.y3[k] - jump),
                -jump + h * rhs_with_w(state.y2[k], w[k], params.beta, gamma, exp_y2[k]),
            ),
            Scheme::Trapezoid => {
                let f_k = rhs_with_w(state.y2[k], w[k], params.beta, gamma, exp_y2[k]);
                let f_k1 = rhs_with_w(state.y2[k + 1], w[k + 1], params.beta, gamma, exp_y2[k + 1]);
                (
                    0.5 * h * (exp_y2[k] + exp_y2[k + 1]),
                    0.5 * h * (state.y3[k] - jump + state.y3[k + 1]),
                    -jump + 0.5 * h * (f_k + f_k1),
                )
            }
        };
        values.push(state.y1[k + 1] - state.y1[k] - d1);
        values.push(state.y2[k + 1] - state.y2[k] - d2);
        values.push(state.y3[k + 1] - state.y3[k] - d3);
    }
    values.push(state.y1[0]);
    values.push(state.y1[l] - 1.0);
    values.push(state.y3[0]);
    values.push(state.y3[l]);
    Ok(ResidualReport::new(values))
}

/// Sparse matrix in triplet form, rows ordered like the residual and columns
/// like the flattened unknowns. Entries are structural: a slot belonging to
/// the stencil appears even when its current value is zero.
#[derive(Debug, Clone)]
pub struct SparseJacobian {
    pub nrows: usize,
    pub ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SparseJacobian {
    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    /// Dense copy, for small-system tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for &(i, j, v) in &self.triplets {
            dense[i][j] += v;
        }
        dense
    }
}

/// Exact Jacobian of `residual` with respect to every unknown including
/// gamma.
pub fn jacobian(
    state: &StateVector,
    grid: &Partition,
    params: &ModelParams,
    scheme: Scheme,
) -> Result<SparseJacobian> {
    state.check_sized_for(grid)?;
    let l = grid.interval_count();
    // w enters the residual affinely, so it never appears in the Jacobian;
    // evaluating it here only validates a tabulated reference's length.
    params.w.values_on(grid)?;
    let gamma = state.gamma;
    let beta2 = params.beta * params.beta;

    let mut exp_y2 = Vec::with_capacity(l + 1);
    for (node, &v) in state.y2.iter().enumerate() {
        exp_y2.push(checked_exp(v, node)?);
    }

    let gamma_col = 3 * (l + 1);
    let y1 = |k: usize| 3 * k;
    let y2 = |k: usize| 3 * k + 1;
    let y3 = |k: usize| 3 * k + 2;

    let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(13 * l + 4);
    for k in 0..l {
        let h = grid.steps()[k];
        let (r1, r2, r3) = (3 * k, 3 * k + 1, 3 * k + 2);
        match scheme {
            Scheme::Euler => {
                t.push((r1, y1(k), -1.0));
                t.push((r1, y1(k + 1), 1.0));
                t.push((r1, y2(k), -h * exp_y2[k]));

                t.push((r2, y2(k), -1.0));
                t.push((r2, y2(k + 1), 1.0));
                t.push((r2, y3(k), -h));

                t.push((r3, y2(k), -h * (beta2 + gamma * exp_y2[k])));
                t.push((r3, y3(k), -1.0));
                t.push((r3, y3(k + 1), 1.0));
                t.push((r3, gamma_col, -h * exp_y2[k]));
            }
            Scheme::Trapezoid => {
                let hh = 0.5 * h;
                t.push((r1, y1(k), -1.0));
                t.push((r1, y1(k + 1), 1.0));
                t.push((r1, y2(k), -hh * exp_y2[k]));
                t.push((r1, y2(k + 1), -hh * exp_y2[k + 1]));

                t.push((r2, y2(k), -1.0));
                t.push((r2, y2(k + 1), 1.0));
                t.push((r2, y3(k), -hh));
                t.push((r2, y3(k + 1), -hh));

                t.push((r3, y2(k), -hh * (beta2 + gamma * exp_y2[k])));
                t.push((r3, y2(k + 1), -hh * (beta2 + gamma * exp_y2[k + 1])));
                t.push((r3, y3(k), -1.0));
                t.push((r3, y3(k + 1), 1.0));
                t.push((r3, gamma_col, -hh * (exp_y2[k] + exp_y2[k + 1])));
            }
        }
    }
    t.push((3 * l, y1(0), 1.0));
    t.push((3 * l + 1, y1(l), 1.0));
    t.push((3 * l + 2, y3(0), 1.0));
    t.push((3 * l + 3, y3(l), 1.0));

    Ok(SparseJacobian { nrows: 3 * l + 4, ncols: 3 * l + 4, triplets: t })
}
