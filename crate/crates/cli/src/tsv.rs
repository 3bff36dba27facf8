//! Tab-separated output files: plot-ready, '.' decimal, 17 significant
//! digits, reproducible bit-for-bit for fixed inputs (the manifest's
//! wall-time column excepted).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::CliError;
use denest::diagnostics::DensityEstimate;
use denest::kde::{Histogram, KdeEstimate};
use denest::newton::SolveOutcome;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_density(
    path: &Path,
    est: &DensityEstimate,
    out: &SolveOutcome,
) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t_unit\tt_original\tf_unit\tf_original\tF\tv\tvdot")?;
    for k in 0..est.grid.len() {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            fmt(est.grid[k]),
            fmt(est.original_grid[k]),
            fmt(est.f[k]),
            fmt(est.f_original[k]),
            fmt(est.cumulative[k]),
            fmt(out.solution.y2[k]),
            fmt(out.solution.y3[k]),
        )?;
    }
    Ok(())
}

pub struct ManifestRow {
    pub n: usize,
    pub h: f64,
    pub l: usize,
    pub alpha: String,
    pub gamma: f64,
    pub iterations: usize,
    pub residual: f64,
    pub wall_time_s: f64,
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "n\th\tL\talpha\tgamma\titerations\tresidual\twall_time_s")?;
    for row in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}",
            row.n,
            fmt(row.h),
            row.l,
            row.alpha,
            fmt(row.gamma),
            row.iterations,
            fmt(row.residual),
            row.wall_time_s,
        )?;
    }
    Ok(())
}

pub fn write_kde(path: &Path, est: &KdeEstimate) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t\tf")?;
    for (t, f) in est.grid.iter().zip(&est.f) {
        writeln!(w, "{}\t{}", fmt(*t), fmt(*f))?;
    }
    Ok(())
}

pub fn write_histogram(path: &Path, hist: &Histogram) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "bin_left\tbin_right\tdensity\tcount")?;
    for k in 0..hist.counts.len() {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            fmt(hist.bin_edges[k]),
            fmt(hist.bin_edges[k + 1]),
            fmt(hist.densities[k]),
            hist.counts[k],
        )?;
    }
    Ok(())
}
