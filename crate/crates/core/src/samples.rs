//! Sample ingestion: file loading, rescaling into the unit interval, and a
//! seeded truncated-normal sampler for synthetic experiments.
//!
//! The estimator works on points in (0,1). Real data are mapped there by an
//! affine map with a configurable margin so no sample lands on a boundary
//! node, where the interior jump conditions are undefined. Exact duplicate
//! values are merged into a single point carrying an integer multiplicity:
//! the derivative jump at a duplicated location is the multiple of the
//! single-sample jump, which is what the estimation problem dictates when
//! two observations coincide.

use std::io::BufRead;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Samples in their original units, in file order.
#[derive(Debug, Clone)]
pub struct RawSamples {
    pub values: Vec<f64>,
    pub label: String,
}

impl RawSamples {
    /// Non-empty, all-finite samples.
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoSamples);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { values, label: label.into() })
    }

    /// The explicitly empty dataset (used by the no-data pipeline).
    pub fn empty(label: impl Into<String>) -> Self {
        Self { values: Vec::new(), label: label.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reads one decimal number per line. Blank lines and lines starting with
/// `#` are ignored. Errors carry the 1-based line number of the offending
/// line.
pub fn load_samples<R: BufRead>(reader: R, label: impl Into<String>) -> Result<RawSamples> {
    let mut values = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        match text.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) => {
                return Err(Error::ParseLine { line: idx + 1, text: text.to_string() });
            }
        }
    }
    RawSamples::new(values, label)
}

/// Loads a sample file from disk; the label is the file name.
pub fn load_samples_path(path: impl AsRef<Path>) -> Result<RawSamples> {
    let path = path.as_ref();
    let label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let file = std::fs::File::open(path)?;
    load_samples(std::io::BufReader::new(file), label)
}

/// Affine map `u = offset + slope * x` from original units into [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub offset: f64,
    pub slope: f64,
}

impl AffineMap {
    pub fn identity() -> Self {
        Self { offset: 0.0, slope: 1.0 }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.offset + self.slope * x
    }

    pub fn invert(&self, u: f64) -> f64 {
        (u - self.offset) / self.slope
    }
}

/// Sorted distinct sample points in (0,1), each with an integer multiplicity,
/// plus the affine map back to original units.
#[derive(Debug, Clone)]
pub struct SampleSet {
    points: Vec<f64>,
    multiplicities: Vec<f64>,
    to_unit: AffineMap,
    merged_duplicates: usize,
}

impl SampleSet {
    /// The empty sample set with the identity map.
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            multiplicities: Vec::new(),
            to_unit: AffineMap::identity(),
            merged_duplicates: 0,
        }
    }

    /// Builds a sample set from points already in (0,1), with the identity
    /// map. Points are sorted; exact duplicates merge.
    pub fn from_unit_points(points: &[f64]) -> Result<Self> {
        for &p in points {
            if !p.is_finite() || p <= 0.0 || p >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "unit-interval sample {p} is not strictly inside (0,1)"
                )));
            }
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (points, multiplicities, merged) = merge_duplicates(&sorted);
        Ok(Self {
            points,
            multiplicities,
            to_unit: AffineMap::identity(),
            merged_duplicates: merged,
        })
    }

    /// Number of distinct sample points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total observation count: the sum of multiplicities. Equals `len()`
    /// when the input had no duplicates.
    pub fn total_weight(&self) -> f64 {
        self.multiplicities.iter().sum()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.multiplicities
    }

    pub fn to_unit(&self) -> AffineMap {
        self.to_unit
    }

    pub fn merged_duplicates(&self) -> usize {
        self.merged_duplicates
    }
}

fn merge_duplicates(sorted: &[f64]) -> (Vec<f64>, Vec<f64>, usize) {
    let mut points: Vec<f64> = Vec::with_capacity(sorted.len());
    let mut mult: Vec<f64> = Vec::with_capacity(sorted.len());
    for &v in sorted {
        match points.last() {
            Some(&last) if last == v => *mult.last_mut().unwrap() += 1.0,
            _ => {
                points.push(v);
                mult.push(1.0);
            }
        }
    }
    let merged = sorted.len() - points.len();
    (points, mult, merged)
}

/// Maps raw samples into the unit interval: min(values) goes to `margin`,
/// max(values) to `1 - margin`. Exact duplicates merge into one point with
/// incremented multiplicity.
pub fn rescale(raw: &RawSamples, margin: f64) -> Result<SampleSet> {
    if raw.is_empty() {
        return Err(Error::NoSamples);
    }
    if !(0.0..0.5).contains(&margin) {
        return Err(Error::InvalidMargin(margin));
    }
    let mut sorted = raw.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if min == max {
        return Err(Error::DegenerateRange { value: min });
    }
    let slope = (1.0 - 2.0 * margin) / (max - min);
    let to_unit = AffineMap { offset: margin - slope * min, slope };

    let (originals, multiplicities, merged) = merge_duplicates(&sorted);
    let points: Vec<f64> = originals.iter().map(|&x| to_unit.apply(x)).collect();
    if points[0] <= 0.0 || *points.last().unwrap() >= 1.0 {
        return Err(Error::SampleOnBoundary(margin));
    }
    Ok(SampleSet { points, multiplicities, to_unit, merged_duplicates: merged })
}

/// Draws `n` points from a normal(mu, sigma2) conditioned on [0,1], by
/// rejection from the untruncated normal. Deterministic for a fixed seed.
pub fn sample_truncated_normal(n: usize, mu: f64, sigma2: f64, seed: u64) -> Result<RawSamples> {
    if sigma2 <= 0.0 || !sigma2.is_finite() {
        return Err(Error::InvalidVariance(sigma2));
    }
    if n == 0 {
        return Err(Error::EmptyDraw);
    }
    let sigma = sigma2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n);
    let mut attempts: usize = 0;
    let max_attempts = 10_000 * n + 10_000;
    while values.len() < n {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::RejectionStalled { mu, sigma2 });
        }
        let z: f64 = rng.sample(StandardNormal);
        let x = mu + sigma * z;
        if (0.0..=1.0).contains(&x) {
            values.push(x);
        }
    }
    RawSamples::new(values, format!("normal({mu},{sigma2}) seed {seed}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn load_plain_lines() {
        let raw = load_samples("1.0\n2.0\n3.0".as_bytes(), "t").unwrap();
        assert_eq!(raw.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn load_skips_comments_and_blanks() {
        let raw = load_samples("# header\n\n 1.5 \n#x\n2.5\n".as_bytes(), "t").unwrap();
        assert_eq!(raw.values, vec![1.5, 2.5]);
    }

    #[test]
    fn load_reports_line_number() {
        let err = load_samples("1.0\nbogus\n3.0".as_bytes(), "t").unwrap_err();
        match err {
            Error::ParseLine { line, text } => {
                assert_eq!(line, 2);
                assert_eq!(text, "bogus");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_empty_errors() {
        assert!(matches!(load_samples("# only\n".as_bytes(), "t"), Err(Error::NoSamples)));
    }

    #[test]
    fn rescale_endpoints() {
        let raw = RawSamples::new(vec![2.0, 4.0, 6.0], "t").unwrap();
        let set = rescale(&raw, 0.1).unwrap();
        assert_relative_eq!(set.points()[0], 0.1, max_relative = 1e-15);
        assert_relative_eq!(set.points()[1], 0.5, max_relative = 1e-15);
        assert_relative_eq!(set.points()[2], 0.9, max_relative = 1e-15);
        assert_eq!(set.merged_duplicates(), 0);
        assert_eq!(set.total_weight(), 3.0);
    }

    #[test]
    fn rescale_merges_duplicates() {
        let raw = RawSamples::new(vec![1.0, 1.0, 3.0], "t").unwrap();
        let set = rescale(&raw, 0.25).unwrap();
        assert_eq!(set.len(), 2);
        assert_relative_eq!(set.points()[0], 0.25, max_relative = 1e-15);
        assert_relative_eq!(set.points()[1], 0.75, max_relative = 1e-15);
        assert_eq!(set.multiplicities(), &[2.0, 1.0]);
        assert_eq!(set.merged_duplicates(), 1);
        assert_eq!(set.total_weight(), 3.0);
    }

    #[test]
    fn rescale_degenerate_range() {
        let raw = RawSamples::new(vec![2.0, 2.0], "t").unwrap();
        assert!(matches!(rescale(&raw, 0.1), Err(Error::DegenerateRange { .. })));
    }

    #[test]
    fn rescale_zero_margin_hits_boundary() {
        let raw = RawSamples::new(vec![1.0, 2.0], "t").unwrap();
        assert!(matches!(rescale(&raw, 0.0), Err(Error::SampleOnBoundary(_))));
    }

    #[test]
    fn rescale_rejects_bad_margin() {
        let raw = RawSamples::new(vec![1.0, 2.0], "t").unwrap();
        assert!(matches!(rescale(&raw, 0.5), Err(Error::InvalidMargin(_))));
        assert!(matches!(rescale(&raw, -0.1), Err(Error::InvalidMargin(_))));
    }

    #[test]
    fn roundtrip_near_identity() {
        // Values already inside (0,1); composing the map with its inverse
        // recovers the originals.
        let raw = RawSamples::new(vec![0.2, 0.5, 0.9], "t").unwrap();
        let set = rescale(&raw, 0.05).unwrap();
        let back: Vec<f64> = set.points().iter().map(|&u| set.to_unit().invert(u)).collect();
        for (b, orig) in back.iter().zip([0.2, 0.5, 0.9]) {
            assert_relative_eq!(*b, orig, max_relative = 1e-12);
        }
    }

    #[test]
    fn truncated_normal_reproducible() {
        let a = sample_truncated_normal(50, 0.5, 0.01, 42).unwrap();
        let b = sample_truncated_normal(50, 0.5, 0.01, 42).unwrap();
        assert_eq!(a.values, b.values);
        let c = sample_truncated_normal(50, 0.5, 0.01, 43).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn truncated_normal_range_and_errors() {
        let raw = sample_truncated_normal(100, 0.5, 0.01, 7).unwrap();
        assert_eq!(raw.len(), 100);
        assert!(raw.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(matches!(
            sample_truncated_normal(10, 0.5, 0.0, 1),
            Err(Error::InvalidVariance(_))
        ));
        assert!(matches!(sample_truncated_normal(0, 0.5, 0.01, 1), Err(Error::EmptyDraw)));
    }

    #[test]
    fn truncated_normal_vanishing_variance() {
        let raw = sample_truncated_normal(1, 0.5, 1e-12, 3).unwrap();
        assert!((raw.values[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn truncated_normal_stalls_on_empty_window() {
        assert!(matches!(
            sample_truncated_normal(5, 50.0, 1e-4, 1),
            Err(Error::RejectionStalled { .. })
        ));
    }

    #[test]
    fn truncated_normal_mean_over_seeds() {
        // With n = 4 the sample mean lies within 3*sigma/sqrt(4) of 0.5 for
        // all but a fraction ~0.3% of seeds.
        let bound = 3.0 * 0.1 / 2.0;
        let mut misses = 0;
        for seed in 0..200u64 {
            let raw = sample_truncated_normal(4, 0.5, 0.01, seed).unwrap();
            let mean = raw.values.iter().sum::<f64>() / 4.0;
            if (mean - 0.5).abs() > bound {
                misses += 1;
            }
        }
        assert!(misses <= 3, "{misses} of 200 seeds outside the 3-sigma band");
    }

    #[test]
    fn truncated_normal_kolmogorov_distance() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = 100_000;
        let raw = sample_truncated_normal(n, 0.5, 0.01, 2024).unwrap();
        let mut xs = raw.values;
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let normal = Normal::new(0.5, 0.1).unwrap();
        let lo = normal.cdf(0.0);
        let hi = normal.cdf(1.0);
        let mut dist: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = (normal.cdf(x) - lo) / (hi - lo);
            let emp_hi = (i + 1) as f64 / n as f64;
            let emp_lo = i as f64 / n as f64;
            dist = dist.max((f - emp_hi).abs()).max((f - emp_lo).abs());
        }
        assert!(dist < 0.01, "Kolmogorov distance {dist}");
    }

    proptest! {
        #[test]
        fn rescale_sorted_strict_and_roundtrips(
            mut values in proptest::collection::vec(-1e6f64..1e6, 2..40),
            margin in 0.01f64..0.45,
        ) {
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values.dedup();
            prop_assume!(values.len() >= 2);
            let raw = RawSamples::new(values.clone(), "p").unwrap();
            let set = rescale(&raw, margin).unwrap();
            let pts = set.points();
            for w in pts.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            prop_assert!(pts[0] > 0.0 && *pts.last().unwrap() < 1.0);
            // Roundtrip accuracy is relative to the data range (the affine
            // map's scale), which subsumes per-value relative error except
            // for values dwarfed by the range.
            let range = values.last().unwrap() - values[0];
            for (&u, &orig) in pts.iter().zip(values.iter()) {
                let back = set.to_unit().invert(u);
                let scale = orig.abs().max(range);
                prop_assert!((back - orig).abs() <= 1e-12 * scale);
            }
        }
    }
}
