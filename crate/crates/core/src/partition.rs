//! Discretization grid that places a node exactly on every sample point.
//!
//! The unit interval splits into stages bounded by consecutive sample
//! points. Each stage is covered by steps of the nominal size `h` starting
//! from its left end, with the final step shortened to land exactly on the
//! right end, so the derivative jump at a sample always sits on a node.

use crate::error::{Error, Result};
use crate::samples::SampleSet;

/// Near-coincident nodes (remainder step shorter than this) are merged,
/// keeping the sample node.
const MERGE_THRESHOLD: f64 = 1e-12;

/// The grid: nodes `s_0 = 0 < s_1 < ... < s_L = 1`, the step sizes
/// `h_k = s_{k+1} - s_k`, and the indices of the nodes that carry sample
/// points together with their multiplicities.
#[derive(Debug, Clone)]
pub struct Partition {
    nodes: Vec<f64>,
    steps: Vec<f64>,
    data_indices: Vec<usize>,
    jump_multiplicities: Vec<f64>,
    nominal_h: f64,
}

impl Partition {
    /// Number of intervals L; the grid has L+1 nodes.
    pub fn interval_count(&self) -> usize {
        self.steps.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Indices into `nodes` of the sample points, ascending.
    pub fn data_indices(&self) -> &[usize] {
        &self.data_indices
    }

    /// Multiplicity of the sample at each data index (1 unless duplicates
    /// were merged during ingestion).
    pub fn jump_multiplicities(&self) -> &[f64] {
        &self.jump_multiplicities
    }

    /// Sum of all jump multiplicities: the total observation count n.
    pub fn total_weight(&self) -> f64 {
        self.jump_multiplicities.iter().sum()
    }

    pub fn nominal_h(&self) -> f64 {
        self.nominal_h
    }
}

/// Builds the grid for the given samples and nominal step size.
pub fn build_partition(samples: &SampleSet, nominal_h: f64) -> Result<Partition> {
    if nominal_h <= 0.0 || !nominal_h.is_finite() {
        return Err(Error::InvalidStepSize(nominal_h));
    }
    let points = samples.points();
    let mut nodes = vec![0.0f64];
    let mut data_indices = Vec::with_capacity(points.len());

    let mut left = 0.0f64;
    for stage in 0..=points.len() {
        let right = if stage < points.len() { points[stage] } else { 1.0 };
        let width = right - left;
        let m = (width / nominal_h).ceil().max(1.0) as usize;
        // Uniform interior nodes, then the stage end itself. If the last
        // uniform node is within MERGE_THRESHOLD of the end, drop it and
        // keep the sample node.
        let mut uniform = m - 1;
        if uniform > 0 && right - (left + uniform as f64 * nominal_h) < MERGE_THRESHOLD {
            uniform -= 1;
        }
        for j in 1..=uniform {
            nodes.push(left + j as f64 * nominal_h);
        }
        nodes.push(right);
        if stage < points.len() {
            data_indices.push(nodes.len() - 1);
        }
        left = right;
    }

    let steps: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    debug_assert!(steps.iter().all(|&h| h > 0.0));
    Ok(Partition {
        nodes,
        steps,
        data_indices,
        jump_multiplicities: samples.multiplicities().to_vec(),
        nominal_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::SampleSet;
    use proptest::prelude::*;

    fn unit_set(points: &[f64]) -> SampleSet {
        SampleSet::from_unit_points(points).unwrap()
    }

    #[test]
    fn single_sample_on_uniform_grid() {
        let grid = build_partition(&unit_set(&[0.5]), 0.25).unwrap();
        assert_eq!(grid.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(grid.data_indices(), &[2]);
        for &h in grid.steps() {
            assert!((h - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn single_sample_off_uniform_grid() {
        // Stage [0, 0.4] takes ceil(0.4/0.25) = 2 steps {0.25, 0.15};
        // stage [0.4, 1] takes ceil(0.6/0.25) = 3 steps {0.25, 0.25, 0.10}.
        let grid = build_partition(&unit_set(&[0.4]), 0.25).unwrap();
        assert_eq!(grid.interval_count(), 5);
        let expect = [0.0, 0.25, 0.4, 0.65, 0.9, 1.0];
        for (node, want) in grid.nodes().iter().zip(expect) {
            assert!((node - want).abs() < 1e-15, "{node} vs {want}");
        }
        assert_eq!(grid.data_indices(), &[2]);
    }

    #[test]
    fn sample_nodes_are_bit_equal() {
        let pts = [0.123456789, 0.4, 0.700000001];
        let grid = build_partition(&unit_set(&pts), 1.0 / 512.0).unwrap();
        for (&idx, &p) in grid.data_indices().iter().zip(pts.iter()) {
            assert_eq!(grid.nodes()[idx].to_bits(), p.to_bits());
        }
    }

    #[test]
    fn steps_sum_to_one() {
        let pts = [0.1, 0.3141592653589793, 0.55, 0.9];
        let grid = build_partition(&unit_set(&pts), 1e-3).unwrap();
        let total: f64 = grid.steps().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn near_coincident_node_is_merged() {
        let sample = 0.25 + 1e-14;
        let grid = build_partition(&unit_set(&[sample]), 0.25).unwrap();
        // Without merging the first stage would carry a 1e-14 step.
        let min_step = grid.steps().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_step > 1e-12);
        assert_eq!(grid.nodes()[grid.data_indices()[0]].to_bits(), sample.to_bits());
    }

    #[test]
    fn rejects_bad_step() {
        let set = unit_set(&[0.5]);
        assert!(matches!(build_partition(&set, 0.0), Err(Error::InvalidStepSize(_))));
        assert!(matches!(build_partition(&set, -0.1), Err(Error::InvalidStepSize(_))));
    }

    #[test]
    fn no_data_grid() {
        let grid = build_partition(&SampleSet::empty(), 0.125).unwrap();
        assert_eq!(grid.interval_count(), 8);
        assert!(grid.data_indices().is_empty());
        assert_eq!(grid.total_weight(), 0.0);
    }

    #[test]
    fn l_bound_at_fine_step() {
        let raw = crate::samples::sample_truncated_normal(100, 0.5, 0.01, 11).unwrap();
        let set = crate::samples::SampleSet::from_unit_points(&raw.values).unwrap();
        let grid = build_partition(&set, 1.0 / 2000.0).unwrap();
        let l = grid.interval_count();
        assert!(l >= 2000 && l <= 2000 + set.len(), "L = {l}");
    }

    fn distinct_sorted(mut pts: Vec<f64>) -> Vec<f64> {
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    proptest! {
        #[test]
        fn partition_invariants(
            pts in proptest::collection::vec(0.01f64..0.99, 0..8),
            h_inv in 8u32..300,
        ) {
            let pts = distinct_sorted(pts);
            let h = 1.0 / h_inv as f64;
            let set = unit_set(&pts);
            let grid = build_partition(&set, h).unwrap();

            // Strictly increasing from 0 to 1, steps at most nominal
            // (up to the merge threshold).
            prop_assert_eq!(grid.nodes()[0], 0.0);
            prop_assert_eq!(*grid.nodes().last().unwrap(), 1.0);
            for w in grid.nodes().windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for &step in grid.steps() {
                prop_assert!(step > 0.0 && step <= h + 1e-12);
            }
            prop_assert!(grid.interval_count() > set.len());
            let total: f64 = grid.steps().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-14);
            for (&idx, &p) in grid.data_indices().iter().zip(set.points()) {
                prop_assert_eq!(grid.nodes()[idx].to_bits(), p.to_bits());
            }
        }

        #[test]
        fn halving_h_at_least_doubles_uniform_nodes(
            pts in proptest::collection::vec(0.05f64..0.95, 1..5),
        ) {
            let pts = distinct_sorted(pts);
            prop_assume!(!pts.is_empty());
            let set = unit_set(&pts);
            let coarse = build_partition(&set, 0.02).unwrap();
            let fine = build_partition(&set, 0.01).unwrap();
            // Per stage, interior node count at h/2 is at least double.
            let stages = |g: &Partition| {
                let mut out = Vec::new();
                let mut prev = 0usize;
                for &idx in g.data_indices() {
                    out.push(idx - prev - 1);
                    prev = idx;
                }
                out.push(g.node_count() - 1 - prev - 1);
                out
            };
            for (c, f) in stages(&coarse).into_iter().zip(stages(&fine)) {
                prop_assert!(f >= 2 * c);
            }
        }
    }
}
