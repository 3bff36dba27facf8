//! The `estimate` subcommand: one solve per requested alpha, each producing
//! a density TSV and a diagnostics block, plus a run manifest.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::input::{self, Source};
use crate::tsv::{self, ManifestRow};
use crate::{parse_alpha_list, parse_reference, parse_scheme, CliError, EstimateArgs};
use denest::diagnostics;
use denest::model::ModelParams;
use denest::newton::{solve_from, SolveOutcome, SolverConfig};
use denest::partition::Partition;
use denest::samples::SampleSet;

pub fn run(args: &EstimateArgs) -> Result<(), CliError> {
    let alphas = parse_alpha_list(&args.alpha)?;
    let scheme = parse_scheme(&args.scheme)?;
    let reference = parse_reference(&args.w)?;
    if args.jobs == 0 {
        return Err(CliError::BadInput("--jobs must be at least 1".into()));
    }

    let (raw, source) = input::acquire(&args.data)?;
    let n_raw = raw.len();
    let set = if raw.is_empty() {
        SampleSet::empty()
    } else if source == Source::Synthetic {
        SampleSet::from_unit_points(&raw.values)?
    } else {
        denest::samples::rescale(&raw, args.margin)?
    };
    if set.merged_duplicates() > 0 {
        eprintln!(
            "note: merged {} duplicate sample value(s); jumps carry their multiplicity",
            set.merged_duplicates()
        );
    }

    let grid = denest::build_partition(&set, args.nominal_h)?;

    // Build per-alpha unit-interval parameters. File data keep alpha/beta in
    // original units and convert through the affine map; synthetic data are
    // already unit-interval.
    let params_for = |alpha: f64| -> Result<ModelParams, CliError> {
        let p = match source {
            Source::File => ModelParams::in_original_units(
                alpha,
                args.beta,
                reference.clone(),
                &set.to_unit(),
            )?,
            Source::Synthetic => ModelParams::new(alpha, args.beta, reference.clone())?,
        };
        Ok(p)
    };

    std::fs::create_dir_all(&args.out)?;
    let config = SolverConfig {
        tol: args.tol,
        max_iter: args.max_iter,
        scheme,
        ..SolverConfig::default()
    };

    let mut rows: Vec<Option<ManifestRow>> = Vec::new();
    rows.resize_with(alphas.len(), || None);
    let mut failures: Vec<String> = Vec::new();

    if args.jobs == 1 {
        // Descending-alpha sweep with warm starts.
        let mut order: Vec<usize> = (0..alphas.len()).collect();
        order.sort_by(|&a, &b| alphas[b].1.partial_cmp(&alphas[a].1).unwrap());
        let mut warm: Option<denest::StateVector> = None;
        for idx in order {
            let (label, alpha) = &alphas[idx];
            let params = params_for(*alpha)?;
            let started = Instant::now();
            let outcome = match warm.take() {
                Some(mut state) => {
                    state.gamma = grid.total_weight() / params.alpha;
                    match solve_from(&grid, &params, &config, state) {
                        Ok(out) if out.converged => Ok(out),
                        // Warm start failed; retry cold with the built-in
                        // fallback.
                        _ => denest::solve(&set, &grid, &params, &config),
                    }
                }
                None => denest::solve(&set, &grid, &params, &config),
            };
            let wall = started.elapsed().as_secs_f64();
            match outcome {
                Ok(out) => {
                    rows[idx] = Some(emit(
                        args, &set, &grid, &params, label, &out, wall, n_raw,
                    )?);
                    if out.converged {
                        warm = Some(out.solution);
                    } else {
                        failures.push(format!(
                            "alpha {label}: not converged after {} iterations (residual {:.3e})",
                            out.iterations, out.final_residual
                        ));
                    }
                }
                Err(err) => failures.push(format!("alpha {label}: {err}")),
            }
        }
    } else {
        type WorkerResult = (Option<ManifestRow>, Option<String>);
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<(usize, WorkerResult)>> = Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..args.jobs.min(alphas.len()) {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    if idx >= alphas.len() {
                        break;
                    }
                    let (label, alpha) = &alphas[idx];
                    let worker = || -> WorkerResult {
                        let params = match params_for(*alpha) {
                            Ok(p) => p,
                            Err(e) => return (None, Some(e.message().to_string())),
                        };
                        let started = Instant::now();
                        let out = match denest::solve(&set, &grid, &params, &config) {
                            Ok(out) => out,
                            Err(e) => return (None, Some(e.to_string())),
                        };
                        let wall = started.elapsed().as_secs_f64();
                        let failure = (!out.converged).then(|| {
                            format!(
                                "not converged after {} iterations (residual {:.3e})",
                                out.iterations, out.final_residual
                            )
                        });
                        match emit(args, &set, &grid, &params, label, &out, wall, n_raw) {
                            Ok(row) => (Some(row), failure),
                            Err(e) => (None, Some(e.message().to_string())),
                        }
                    };
                    results.lock().unwrap().push((idx, worker()));
                });
            }
        });
        let mut collected = results.into_inner().unwrap();
        collected.sort_by_key(|(idx, _)| *idx);
        for (idx, (row, failure)) in collected {
            rows[idx] = row;
            if let Some(msg) = failure {
                failures.push(format!("alpha {}: {msg}", alphas[idx].0));
            }
        }
    }

    let manifest: Vec<ManifestRow> = rows.into_iter().flatten().collect();
    tsv::write_manifest(&args.out.join("manifest.tsv"), &manifest)?;

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "{} of {} solves failed: {}",
            failures.len(),
            alphas.len(),
            failures.join("; ")
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn emit(
    args: &EstimateArgs,
    set: &SampleSet,
    grid: &Partition,
    params: &ModelParams,
    label: &str,
    out: &SolveOutcome,
    wall_time_s: f64,
    n_raw: usize,
) -> Result<ManifestRow, CliError> {
    if out.converged {
        let density = diagnostics::extract_density(out, set, grid)?;
        tsv::write_density(&args.out.join(format!("density_alpha_{label}.tsv")), &density, out)?;
        let report = diagnostics::report(out, grid, params)?;
        std::fs::write(
            args.out.join(format!("diagnostics_alpha_{label}.txt")),
            report.to_string(),
        )?;
        if args.diagnose {
            print!("# alpha = {label}\n{report}");
        }
    }
    Ok(ManifestRow {
        n: n_raw,
        h: args.nominal_h,
        l: grid.interval_count(),
        alpha: label.to_string(),
        gamma: out.solution.gamma,
        iterations: out.iterations,
        residual: out.final_residual,
        wall_time_s,
    })
}
