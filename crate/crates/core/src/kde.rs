//! Gaussian kernel density estimator and area-normalized histogram, the
//! comparison baseline for the boundary-value estimator. Both work in the
//! data's original units.

use crate::error::{Error, Result};
use crate::samples::RawSamples;

/// Kernel density values on an evaluation grid.
#[derive(Debug, Clone)]
pub struct KdeEstimate {
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub bandwidth: f64,
}

/// Equal-width histogram with densities normalized to unit total area.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<usize>,
}

const SQRT_2PI: f64 = 2.5066282746310002;

/// Exact-sum Gaussian KDE: `f(t) = (1/(n bw)) sum_i phi((t - t_i)/bw)`.
pub fn kde_gaussian(samples: &RawSamples, bandwidth: f64, grid: &[f64]) -> Result<KdeEstimate> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    if bandwidth <= 0.0 || !bandwidth.is_finite() {
        return Err(Error::InvalidBandwidth(bandwidth));
    }
    let n = samples.len() as f64;
    let norm = 1.0 / (n * bandwidth * SQRT_2PI);
    let f = grid
        .iter()
        .map(|&t| {
            let mut acc = 0.0;
            for &x in &samples.values {
                let u = (t - x) / bandwidth;
                acc += (-0.5 * u * u).exp();
            }
            acc * norm
        })
        .collect();
    Ok(KdeEstimate { grid: grid.to_vec(), f, bandwidth })
}

/// Equal-width bins spanning [min, max]; the last bin is right-closed.
/// Densities are counts/(n * width).
pub fn histogram(samples: &RawSamples, nbins: usize) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    if nbins == 0 {
        return Err(Error::EmptyBins);
    }
    let min = samples.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::DegenerateRange { value: min });
    }
    let width = (max - min) / nbins as f64;
    let mut counts = vec![0usize; nbins];
    for &x in &samples.values {
        let bin = (((x - min) / width) as usize).min(nbins - 1);
        counts[bin] += 1;
    }
    let n = samples.len() as f64;
    let densities = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let bin_edges = (0..=nbins).map(|i| min + i as f64 * width).collect();
    Ok(Histogram { bin_edges, densities, counts })
}

/// Square-root rule for the default bin count.
pub fn default_bin_count(n: usize) -> usize {
    (n as f64).sqrt().ceil().max(1.0) as usize
}

/// Normal reference rule `1.06 sigma n^{-1/5}` given a standard deviation
/// and an (effective) sample count.
pub fn reference_bandwidth(sigma: f64, n: f64) -> f64 {
    1.06 * sigma * n.powf(-0.2)
}

/// Normal reference bandwidth of a raw sample vector.
pub fn normal_reference_bandwidth(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.1;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    let bw = reference_bandwidth(var.sqrt(), n as f64);
    if bw > 0.0 && bw.is_finite() {
        bw
    } else {
        0.1
    }
}
