//! Query scorers: the probability that a symbolic query holds in a video
//! segment.
//!
//! [`OracleScorer`] reads ground-truth annotations and stands in for a perfect
//! (or deliberately noisy) detector. [`ParametricScorer`] is a trainable
//! per-query-type logistic model over mean-pooled segment features; see
//! [`train`] for the alternating alignment / gradient procedure.

mod adam;
mod detection;
mod oracle;
mod parametric;
mod train;

pub use adam::Adam;
pub use detection::{detection_report, ClassCounts, DetectionReport};
pub use oracle::{OracleConfig, OracleScorer};
pub use parametric::{ParametricScorer, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use train::{
    best_alignment, loss_and_gradient, prepare_examples, sample_loss, score_matrix, train,
    TrainConfig, TrainReport, TrainingExample,
};

use crate::aligner::Segment;
use crate::dsl::Query;
use crate::error::Result;

/// Estimates `P(query holds in segment)`.
///
/// Implementations must be deterministic and return a value whose log is
/// finite; [`crate::aligner`] clamps to `[PROB_FLOOR, 1]` before use anyway.
pub trait Scorer: Sync {
    fn score(&self, query: &Query, segment: &Segment) -> Result<f64>;
}

/// Returns the same probability for every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantScorer(pub f64);

impl Scorer for ConstantScorer {
    fn score(&self, _: &Query, _: &Segment) -> Result<f64> {
        Ok(self.0)
    }
}
