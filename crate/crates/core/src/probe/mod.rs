//! Probe traces and leakage checks standing in for the probing-security
//! proofs: exact first-order enumeration for single gadgets, fixed-vs-random
//! t-tests for the whole solver, and a sampled second-order check.

use serde::Serialize;

mod cases;
mod exhaustive;
mod stats;
mod trace;

pub use cases::{record_trace, run_case, GadgetCase};
pub use exhaustive::{enumeration_size, exhaustive_first_order, ENUMERATION_LIMIT};
pub use stats::{
    chi_square_homogeneity, sampled_second_order, statistical_fixed_vs_random, welch_t, Moments,
    PipelineSpec, PipelineTarget, T_THRESHOLD,
};
pub use trace::{ProbePoint, ProbeTrace, RecordMode, Recorder};

/// Outcome for one probe point (or pair of points).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointVerdict {
    pub point_id: String,
    pub mode: &'static str,
    pub statistic: f64,
    pub samples: u64,
    pub pass: bool,
}

/// All point verdicts of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakVerdict {
    pub label: String,
    pub points: Vec<PointVerdict>,
}

impl LeakVerdict {
    pub fn new(label: String, points: Vec<PointVerdict>) -> Self {
        LeakVerdict { label, points }
    }

    pub fn pass(&self) -> bool {
        self.points.iter().all(|p| p.pass)
    }

    pub fn failing(&self) -> impl Iterator<Item = &PointVerdict> {
        self.points.iter().filter(|p| !p.pass)
    }

    /// Largest statistic magnitude over all points.
    pub fn max_statistic(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.statistic.abs())
            .fold(0.0, f64::max)
    }
}
