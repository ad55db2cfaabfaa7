use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{OracleScorer, Scorer};
use crate::aligner::{verify, SegmentedTrace, VerifyOptions};
use crate::dsl::{Action, TaskGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Per-sub-task confusion counts of a scorer on aligned query/segment pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub threshold: f64,
    /// Always holds all six classes, in [`Action::ALL`] order.
    pub classes: BTreeMap<Action, ClassCounts>,
    /// Samples with more queries than segments.
    pub skipped: usize,
}

impl DetectionReport {
    pub fn pairs(&self) -> usize {
        self.classes.values().map(ClassCounts::total).sum()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["class", "tp", "fp", "tn", "fn", "precision", "recall"])?;
        for (a, c) in &self.classes {
            w.write_record([
                a.name().to_string(),
                c.tp.to_string(),
                c.fp.to_string(),
                c.tn.to_string(),
                c.fn_.to_string(),
                format!("{:.6}", c.precision()),
                format!("{:.6}", c.recall()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Compares `scorer` against ground truth on the pairs chosen by aligning
/// each sample with `truth`, so every scorer is judged on the same pairs.
pub fn detection_report(
    items: &[(TaskGraph, SegmentedTrace)],
    scorer: &dyn Scorer,
    truth: &OracleScorer,
    threshold: f64,
    opts: &VerifyOptions,
) -> Result<DetectionReport> {
    let mut classes: BTreeMap<Action, ClassCounts> =
        Action::ALL.iter().map(|&a| (a, ClassCounts::default())).collect();
    let mut skipped = 0;
    for (g, trace) in items {
        let verdict = match verify(g, trace, truth, opts) {
            Ok(v) => v,
            Err(Error::TooFewSegments { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for (node, t) in verdict.node_pairs() {
            let q = &g.nodes()[node];
            let seg = &trace.segments[t];
            let Some(action) = q.subtask() else { continue };
            let actual = truth.holds(q, seg)?;
            let predicted = scorer.score(q, seg)? >= threshold;
            let c = classes.get_mut(&action).expect("all classes present");
            match (actual, predicted) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
    }
    Ok(DetectionReport {
        threshold,
        classes,
        skipped,
    })
}
