//! The `compare` subcommand: Gaussian-KDE curves per bandwidth and an
//! area-normalized histogram, in original data units for overlay plotting
//! against `estimate` output.

use crate::input;
use crate::tsv;
use crate::{CliError, CompareArgs};
use denest::kde;

pub fn run(args: &CompareArgs) -> Result<(), CliError> {
    let (raw, _) = input::acquire(&args.data)?;
    if raw.is_empty() {
        return Err(CliError::BadInput("no samples".into()));
    }
    if args.grid_points < 2 {
        return Err(CliError::BadInput("--grid-points must be at least 2".into()));
    }
    std::fs::create_dir_all(&args.out)?;

    let min = raw.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = raw.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    if let Some(bw_list) = &args.bw {
        for token in bw_list.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            let bw: f64 = token
                .parse()
                .map_err(|_| CliError::BadInput(format!("cannot parse bandwidth {token:?}")))?;
            if bw <= 0.0 {
                return Err(CliError::BadInput(format!("bandwidth must be positive, got {token}")));
            }
            let lo = min - 4.0 * bw;
            let hi = max + 4.0 * bw;
            let m = args.grid_points - 1;
            let grid: Vec<f64> =
                (0..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
            let est = kde::kde_gaussian(&raw, bw, &grid)?;
            tsv::write_kde(&args.out.join(format!("kde_bw_{token}.tsv")), &est)?;
        }
    }

    let nbins = args.nbins.unwrap_or_else(|| kde::default_bin_count(raw.len()));
    let hist = kde::histogram(&raw, nbins)?;
    tsv::write_histogram(&args.out.join("histogram.tsv"), &hist)?;
    Ok(())
}
