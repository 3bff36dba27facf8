//! Damped Newton solver for the discretized system, treated as a square
//! root-finding problem on the 3L+4 unknowns.
//!
//! Each iteration factors the exact Jacobian as a banded matrix bordered by
//! the dense gamma column and one boundary row, takes the full Newton step,
//! and halves the step until the residual infinity norm decreases. The
//! convergence test is on the residual infinity norm alone.
//!
//! Row ordering for the linear solve: the two left boundary rows come
//! first, then the stepping rows node by node, then the y1(1) boundary row;
//! the y3(1) boundary row is the border. This permutation keeps every
//! state-variable entry within a (kl=4, ku=3) band; permuting rows of the
//! square system leaves the Newton step unchanged.

use crate::band::{BandMatrix, BorderedBanded};
use crate::error::{Error, Result};
use crate::kde;
use crate::model::{ModelParams, Scheme};
use crate::partition::Partition;
use crate::samples::SampleSet;
use crate::system::{self, SparseJacobian, StateVector};

/// Newton solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Residual infinity-norm target.
    pub tol: f64,
    /// Maximum accepted Newton steps.
    pub max_iter: usize,
    /// Backtracking factor in (0,1).
    pub damping: f64,
    /// Smallest admissible step fraction before giving up.
    pub min_step: f64,
    pub scheme: Scheme,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            damping: 0.5,
            min_step: 1e-8,
            scheme: Scheme::Trapezoid,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.damping) || self.damping == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in (0,1), got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// One accepted Newton step: the residual after the step and the step
/// fraction that was accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub residual: f64,
    pub damping: f64,
}

/// Solver result. `converged` holds exactly when the final residual meets
/// the tolerance; a run that exhausts `max_iter` returns the best iterate
/// with `converged = false`.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: StateVector,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub history: Vec<StepRecord>,
}

/// Starting point: the log of a Gaussian-KDE pilot estimate (clipped below
/// at 1e-4), its rescaled cumulative integral, centered differences for the
/// derivative, and gamma = n/alpha. The empty dataset gets the exact flat
/// solution.
pub fn initial_guess(samples: &SampleSet, grid: &Partition, params: &ModelParams) -> StateVector {
    let nodes = grid.nodes();
    let mut state = StateVector::zeros(nodes.len());
    if samples.is_empty() {
        state.y1.copy_from_slice(nodes);
        return state;
    }

    let total = samples.total_weight();
    let bw = pilot_bandwidth(samples);
    let norm = 1.0 / (total * bw * (2.0 * std::f64::consts::PI).sqrt());
    for (k, &t) in nodes.iter().enumerate() {
        let mut acc = 0.0;
        for (&p, &m) in samples.points().iter().zip(samples.multiplicities()) {
            let u = (t - p) / bw;
            acc += m * (-0.5 * u * u).exp();
        }
        state.y2[k] = (acc * norm).max(1e-4).ln();
    }

    let mut cum = 0.0;
    for k in 0..nodes.len() - 1 {
        cum += 0.5 * grid.steps()[k] * (state.y2[k].exp() + state.y2[k + 1].exp());
        state.y1[k + 1] = cum;
    }
    let scale = 1.0 / cum;
    for v in &mut state.y1 {
        *v *= scale;
    }
    *state.y1.last_mut().unwrap() = 1.0;

    for k in 1..nodes.len() - 1 {
        state.y3[k] = (state.y2[k + 1] - state.y2[k - 1]) / (nodes[k + 1] - nodes[k - 1]);
    }

    state.gamma = total / params.alpha;
    state
}

fn pilot_bandwidth(samples: &SampleSet) -> f64 {
    let total = samples.total_weight();
    let mean = samples
        .points()
        .iter()
        .zip(samples.multiplicities())
        .map(|(&p, &m)| m * p)
        .sum::<f64>()
        / total;
    let var = samples
        .points()
        .iter()
        .zip(samples.multiplicities())
        .map(|(&p, &m)| m * (p - mean) * (p - mean))
        .sum::<f64>()
        / (total - 1.0).max(1.0);
    let bw = kde::reference_bandwidth(var.sqrt(), total);
    if bw.is_finite() && bw > 0.0 {
        bw
    } else {
        0.1
    }
}

/// Flat restart point: y2 = 0 (uniform density), gamma = n/alpha.
fn flat_guess(grid: &Partition, params: &ModelParams) -> StateVector {
    let mut state = StateVector::zeros(grid.node_count());
    state.y1.copy_from_slice(grid.nodes());
    state.gamma = grid.total_weight() / params.alpha;
    state
}

/// Solves from the KDE pilot guess. If that run fails to converge, restarts
/// once from the flat guess with alpha-continuation: solve at 10*alpha,
/// then warm-start the target alpha from that solution (small alpha means
/// large jumps, the hard regime).
pub fn solve(
    samples: &SampleSet,
    grid: &Partition,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<SolveOutcome> {
    let first = solve_from(grid, params, config, initial_guess(samples, grid, params));
    if let Ok(ref outcome) = first {
        if outcome.converged {
            return first;
        }
    }

    let relaxed = ModelParams::new(10.0 * params.alpha, params.beta, params.w.clone())?;
    if let Ok(stage) = solve_from(grid, &relaxed, config, flat_guess(grid, &relaxed)) {
        if stage.converged {
            let mut warm = stage.solution;
            warm.gamma *= 10.0;
            if let Ok(second) = solve_from(grid, params, config, warm) {
                if second.converged {
                    return Ok(second);
                }
            }
        }
    }
    first
}

/// The Newton loop itself, from an explicit starting state. Deterministic:
/// identical inputs produce bit-identical outcomes.
pub fn solve_from(
    grid: &Partition,
    params: &ModelParams,
    config: &SolverConfig,
    start: StateVector,
) -> Result<SolveOutcome> {
    config.validate()?;
    let l = grid.interval_count();
    let mut state = start;
    let mut report = system::residual(&state, grid, params, config.scheme)?;
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        if report.inf_norm <= config.tol {
            return Ok(SolveOutcome {
                solution: state,
                iterations,
                final_residual: report.inf_norm,
                converged: true,
                history,
            });
        }
        if iterations >= config.max_iter {
            return Ok(SolveOutcome {
                solution: state,
                iterations,
                final_residual: report.inf_norm,
                converged: false,
                history,
            });
        }

        let jac = system::jacobian(&state, grid, params, config.scheme)?;
        let factor = assemble(&jac, l)
            .factor()
            .map_err(|_| Error::SingularSystem { iteration: iterations })?;

        // Right-hand side -r, permuted like the matrix rows.
        let mut head = vec![0.0; 3 * l + 3];
        for (spec_row, &value) in report.values.iter().enumerate() {
            match permute_row(spec_row, l) {
                PermutedRow::Band(r) => head[r] = -value,
                PermutedRow::Border => {}
            }
        }
        let tail = -report.values[3 * l + 3];
        let (dx, dgamma) = factor.solve(&head, tail);
        let mut delta = dx;
        delta.push(dgamma);

        // Backtracking: accept the first step fraction that reduces the
        // residual infinity norm; a divergent iterate just rejects the step.
        let mut lambda = 1.0;
        loop {
            let trial = state.add_scaled(&delta, lambda);
            match system::residual(&trial, grid, params, config.scheme) {
                Ok(trial_report)
                    if trial_report.inf_norm.is_finite()
                        && trial_report.inf_norm < report.inf_norm =>
                {
                    state = trial;
                    report = trial_report;
                    break;
                }
                _ => {
                    lambda *= config.damping;
                    if lambda < config.min_step {
                        return Err(Error::DampingFloor {
                            iteration: iterations,
                            residual: report.inf_norm,
                        });
                    }
                }
            }
        }
        iterations += 1;
        history.push(StepRecord { residual: report.inf_norm, damping: lambda });
    }
}

enum PermutedRow {
    Band(usize),
    Border,
}

/// Maps a residual row index to its place in the banded system. The two
/// left boundary rows lead, the y1(1) row trails, and the y3(1) row is the
/// border.
fn permute_row(spec_row: usize, l: usize) -> PermutedRow {
    if spec_row < 3 * l {
        PermutedRow::Band(2 + spec_row)
    } else {
        match spec_row - 3 * l {
            0 => PermutedRow::Band(0),
            1 => PermutedRow::Band(3 * l + 2),
            2 => PermutedRow::Band(1),
            _ => PermutedRow::Border,
        }
    }
}

fn assemble(jac: &SparseJacobian, l: usize) -> BorderedBanded {
    let nb = 3 * l + 3;
    let gamma_col = 3 * l + 3;
    let mut band = BandMatrix::zeros(nb, 4, 3);
    let mut col = vec![0.0; nb];
    let mut row = vec![0.0; nb];
    let mut corner = 0.0;
    for &(r, c, v) in jac.triplets() {
        match permute_row(r, l) {
            PermutedRow::Border => {
                if c == gamma_col {
                    corner += v;
                } else {
                    row[c] += v;
                }
            }
            PermutedRow::Band(pr) => {
                if c == gamma_col {
                    col[pr] += v;
                } else {
                    band.add(pr, c, v);
                }
            }
        }
    }
    BorderedBanded { band, col, row, corner }
}
