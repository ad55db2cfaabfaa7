//! Accuracy / F1 reporting over labelled samples, broken down by split,
//! complexity and ordering, plus window-size sweeps.
//!
//! A sample whose graph has more queries than the trace has segments cannot
//! be aligned; it is scored as a negative prediction and counted separately.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::aligner::{segment, verify, VerifyOptions, DEFAULT_WINDOW};
use crate::datagen::{Sample, Split};
use crate::dsl::QueryScheme;
use crate::error::{Error, Result};
use crate::scorer::Scorer;

pub const TOO_FEW_SEGMENTS_POLICY: &str =
    "samples with fewer segments than queries are predicted negative and counted in too_few_segments";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalOptions {
    pub verify: VerifyOptions,
    pub window: usize,
    pub scheme: QueryScheme,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            verify: VerifyOptions::default(),
            window: DEFAULT_WINDOW,
            scheme: QueryScheme::StateRelation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub id: String,
    pub split: Split,
    pub label: bool,
    pub predicted: bool,
    /// Absent when the sample could not be aligned.
    pub probability: Option<f64>,
    pub complexity: usize,
    pub ordering: usize,
}

impl Prediction {
    pub fn too_few_segments(&self) -> bool {
        self.probability.is_none()
    }
}

/// Binary confusion counts and the metrics derived from them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Confusion {
    pub fn add(&mut self, label: bool, predicted: bool) {
        match (label, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn support(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.support())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `2PR / (P + R)`, zero when both are zero.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
    pub too_few_segments: usize,
    pub confusion: Confusion,
}

impl Metrics {
    pub fn of<'a>(predictions: impl IntoIterator<Item = &'a Prediction>) -> Self {
        let mut c = Confusion::default();
        let mut too_few = 0;
        for p in predictions {
            c.add(p.label, p.predicted);
            too_few += usize::from(p.too_few_segments());
        }
        Metrics {
            accuracy: c.accuracy(),
            f1: c.f1(),
            precision: c.precision(),
            recall: c.recall(),
            support: c.support(),
            too_few_segments: too_few,
            confusion: c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub options: EvalOptions,
    pub overall: Metrics,
    pub splits: BTreeMap<Split, Metrics>,
    pub by_complexity: BTreeMap<usize, Metrics>,
    pub by_ordering: BTreeMap<usize, Metrics>,
    pub footer: String,
}

impl MetricsReport {
    pub fn from_predictions(predictions: &[Prediction], options: EvalOptions) -> Self {
        let group = |key: &dyn Fn(&Prediction) -> usize| -> BTreeMap<usize, Metrics> {
            let mut buckets: BTreeMap<usize, Vec<&Prediction>> = BTreeMap::new();
            for p in predictions {
                buckets.entry(key(p)).or_default().push(p);
            }
            buckets.into_iter().map(|(k, v)| (k, Metrics::of(v))).collect()
        };
        let mut splits: BTreeMap<Split, Vec<&Prediction>> = BTreeMap::new();
        for p in predictions {
            splits.entry(p.split).or_default().push(p);
        }
        MetricsReport {
            options,
            overall: Metrics::of(predictions),
            splits: splits.into_iter().map(|(k, v)| (k, Metrics::of(v))).collect(),
            by_complexity: group(&|p| p.complexity),
            by_ordering: group(&|p| p.ordering),
            footer: TOO_FEW_SEGMENTS_POLICY.to_string(),
        }
    }

    /// One row per split, complexity and ordering bucket, plus `all`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(METRIC_HEADER)?;
        for (group, key, m) in self.rows() {
            w.write_record(metric_record(&[group, key], m))?;
        }
        w.flush()?;
        Ok(())
    }

    fn rows(&self) -> Vec<(String, String, &Metrics)> {
        let mut rows = vec![("all".to_string(), "all".to_string(), &self.overall)];
        rows.extend(self.splits.iter().map(|(s, m)| ("split".into(), s.to_string(), m)));
        rows.extend(self.by_complexity.iter().map(|(c, m)| ("complexity".into(), c.to_string(), m)));
        rows.extend(self.by_ordering.iter().map(|(o, m)| ("ordering".into(), o.to_string(), m)));
        rows
    }
}

const METRIC_HEADER: [&str; 9] = [
    "group",
    "key",
    "accuracy",
    "f1",
    "precision",
    "recall",
    "support",
    "too_few_segments",
    "tp_fp_tn_fn",
];

fn metric_record(prefix: &[String], m: &Metrics) -> Vec<String> {
    let c = &m.confusion;
    prefix
        .iter()
        .cloned()
        .chain([
            format!("{:.6}", m.accuracy),
            format!("{:.6}", m.f1),
            format!("{:.6}", m.precision),
            format!("{:.6}", m.recall),
            m.support.to_string(),
            m.too_few_segments.to_string(),
            format!("{}/{}/{}/{}", c.tp, c.fp, c.tn, c.fn_),
        ])
        .collect()
}

/// Verifies every sample. Output order follows input order.
pub fn predict(samples: &[Sample], scorer: &dyn Scorer, options: &EvalOptions) -> Result<Vec<Prediction>> {
    samples
        .par_iter()
        .map(|s| {
            let g = s.graph.to_scheme(options.scheme, |_| "in".to_string());
            let trace = segment(&s.trace, options.window)?;
            let probability = match verify(&g, &trace, scorer, &options.verify) {
                Ok(v) => Some((v.probability, v.label)),
                Err(Error::TooFewSegments { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(Prediction {
                id: s.id.clone(),
                split: s.split,
                label: s.label,
                predicted: probability.is_some_and(|(_, l)| l),
                probability: probability.map(|(p, _)| p),
                complexity: s.difficulty.complexity,
                ordering: s.difficulty.ordering,
            })
        })
        .collect()
}

pub fn evaluate(samples: &[Sample], scorer: &dyn Scorer, options: &EvalOptions) -> Result<MetricsReport> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(MetricsReport::from_predictions(
        &predict(samples, scorer, options)?,
        *options,
    ))
}

/// Re-segments and re-evaluates at every window size in `ks`.
pub fn sweep_window(
    samples: &[Sample],
    scorer: &dyn Scorer,
    ks: &[usize],
    options: &EvalOptions,
) -> Result<Vec<(usize, MetricsReport)>> {
    ks.iter()
        .map(|&k| {
            let opts = EvalOptions { window: k, ..*options };
            Ok((k, evaluate(samples, scorer, &opts)?))
        })
        .collect()
}

/// One row per window size and split, plus an `all` row per window.
pub fn write_sweep_csv(sweep: &[(usize, MetricsReport)], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["window"];
    header.extend(METRIC_HEADER);
    w.write_record(&header)?;
    for (k, report) in sweep {
        let mut rows = vec![("all".to_string(), "all".to_string(), &report.overall)];
        rows.extend(report.splits.iter().map(|(s, m)| ("split".to_string(), s.to_string(), m)));
        for (group, key, m) in rows {
            w.write_record(metric_record(&[k.to_string(), group, key], m))?;
        }
    }
    w.flush()?;
    Ok(())
}
