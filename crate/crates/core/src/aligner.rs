//! Segmentation, constrained query-to-segment alignment, and task
//! verification.
//!
//! An alignment pairs each of `N` ordered queries with exactly one of `S`
//! segments such that no segment hosts two queries and the segment indices
//! strictly increase with query order. [`align_dp`] finds the best such
//! alignment by the skip-or-pair recursion; [`align_bruteforce`] enumerates
//! the same feasible set directly and serves as its oracle.

use std::io::Write;

use serde::Serialize;

use crate::dsl::TaskGraph;
use crate::error::{Error, Result};
use crate::graph::{self, DEFAULT_EXTENSION_CAP};
use crate::scorer::Scorer;
use crate::seeds;
use crate::trace::{Event, Trace};

/// Default window size in frames.
pub const DEFAULT_WINDOW: usize = 20;
/// Frame rate the default window is calibrated for.
pub const FRAMES_PER_SECOND: f64 = 2.5;
/// Probability floor applied before taking logs.
pub const PROB_FLOOR: f64 = 1e-8;
/// Largest segment count [`align_bruteforce`] will enumerate.
pub const BRUTEFORCE_MAX_SEGMENTS: usize = 14;

/// Probabilities within this distance of the threshold count as positive.
const DECISION_TOLERANCE: f64 = 1e-12;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Positive iff the geometric mean of the aligned per-query probabilities is
/// at least one half.
pub fn default_threshold() -> f64 {
    sigmoid(0.5f64.ln())
}

/// A window of `k` frames. Only the last segment of a trace carries padding.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub index: usize,
    /// First frame of the window in the source trace.
    pub start: usize,
    pub frames: Vec<Vec<f64>>,
    /// Frames taken from the trace; the rest are zero padding.
    pub real_frames: usize,
    /// Ground-truth events overlapping the window, if the trace is annotated.
    pub events: Option<Vec<Event>>,
    /// Stable identity used to key per-segment randomness.
    pub key: u64,
}

impl Segment {
    pub fn padding(&self) -> usize {
        self.frames.len() - self.real_frames
    }

    pub fn dim(&self) -> usize {
        self.frames.first().map_or(0, Vec::len)
    }

    /// Mean of the non-padding frames.
    pub fn mean_features(&self) -> Vec<f64> {
        let d = self.dim();
        let mut mean = vec![0.0; d];
        for f in &self.frames[..self.real_frames] {
            for (m, x) in mean.iter_mut().zip(f) {
                *m += x;
            }
        }
        let n = self.real_frames.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedTrace {
    pub segments: Vec<Segment>,
    pub window: usize,
    pub dim: usize,
}

impl SegmentedTrace {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Splits a trace into `ceil(T / k)` non-overlapping windows, zero-padding
/// the last one.
pub fn segment(trace: &Trace, k: usize) -> Result<SegmentedTrace> {
    if k == 0 {
        return Err(Error::Config("window size must be positive".into()));
    }
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let dim = trace.frames[0].len();
    if let Some(bad) = trace.frames.iter().find(|f| f.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let fingerprint = trace.fingerprint();
    let total = trace.len();
    let segments = (0..total.div_ceil(k))
        .map(|index| {
            let start = index * k;
            let end = (start + k).min(total);
            let mut frames = trace.frames[start..end].to_vec();
            frames.resize(k, vec![0.0; dim]);
            Segment {
                index,
                start,
                frames,
                real_frames: end - start,
                events: trace.events.as_ref().map(|ev| {
                    ev.iter()
                        .filter(|e| e.overlaps(start, end))
                        .cloned()
                        .collect()
                }),
                key: seeds::combine(fingerprint, index as u64),
            }
        })
        .collect();
    Ok(SegmentedTrace {
        segments,
        window: k,
        dim,
    })
}

/// `N x S` matrix of log-probabilities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    /// Rejects ragged input and entries that are non-finite or positive.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let s = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * s);
        for row in rows {
            if row.len() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    got: row.len(),
                });
            }
            for v in row {
                if !v.is_finite() || v > 0.0 {
                    return Err(Error::Syntax(format!("log-score {v} outside (-inf, 0]")));
                }
                values.push(v);
            }
        }
        Ok(ScoreMatrix {
            rows: n,
            cols: s,
            values,
        })
    }

    /// Builds from probabilities, clamping each to `[PROB_FLOOR, 1]` first.
    pub fn from_probabilities(rows: &[Vec<f64>]) -> Result<Self> {
        ScoreMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&p| clamped_log(p)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, j: usize, t: usize) -> f64 {
        self.values[j * self.cols + t]
    }

    /// Rows reordered so that row `i` is source row `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> ScoreMatrix {
        let mut values = Vec::with_capacity(order.len() * self.cols);
        for &r in order {
            values.extend_from_slice(&self.values[r * self.cols..(r + 1) * self.cols]);
        }
        ScoreMatrix {
            rows: order.len(),
            cols: self.cols,
            values,
        }
    }

    /// Adds `c` to every entry without revalidating the upper bound.
    pub fn shifted(&self, c: f64) -> ScoreMatrix {
        ScoreMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// `ln(p)` with `p` clamped into `[PROB_FLOOR, 1]`.
pub fn clamped_log(p: f64) -> f64 {
    let p = if p.is_nan() { PROB_FLOOR } else { p };
    p.clamp(PROB_FLOOR, 1.0).ln()
}

/// Assignment of each query row to a segment column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment {
    /// `segments[j]` is the column paired with row `j`.
    pub segments: Vec<usize>,
    pub num_segments: usize,
    /// Total log-score of the aligned pairs.
    pub score: f64,
}

impl Alignment {
    /// Binary `N x S` matrix form.
    pub fn z(&self) -> Vec<Vec<u8>> {
        self.segments
            .iter()
            .map(|&t| {
                let mut row = vec![0u8; self.num_segments];
                row[t] = 1;
                row
            })
            .collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.segments.iter().copied().enumerate()
    }
}

/// Checks a binary alignment matrix against the three alignment constraints
/// literally: at most one query per segment, exactly one segment per query,
/// and no earlier query placed at or after a later query's segment.
pub fn satisfies_constraints(z: &[Vec<u8>]) -> bool {
    let n = z.len();
    let s = z.first().map_or(0, Vec::len);
    if z.iter().any(|row| row.len() != s || row.iter().any(|&x| x > 1)) {
        return false;
    }
    let columns_ok = (0..s).all(|t| z.iter().map(|row| row[t] as usize).sum::<usize>() <= 1);
    let rows_ok = z.iter().all(|row| row.iter().map(|&x| x as usize).sum::<usize>() == 1);
    if !columns_ok || !rows_ok {
        return false;
    }
    for v in 0..n {
        for t_bar in 0..s {
            if z[v][t_bar] == 1 {
                for row in &z[..v] {
                    if row[t_bar..].contains(&1) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn check_dims(scores: &ScoreMatrix) -> Result<()> {
    if scores.rows() > scores.cols() {
        return Err(Error::TooFewSegments {
            queries: scores.rows(),
            segments: scores.cols(),
        });
    }
    Ok(())
}

/// Best monotone alignment by dynamic programming.
///
/// `best[j][t]` is the optimum for queries `j..N` on segments `t..S`:
/// either pair `j` with `t` and recurse on `(j+1, t+1)`, or skip `t`.
/// Pairing wins ties, so the earliest optimal segments are chosen.
pub fn align_dp(scores: &ScoreMatrix) -> Result<Alignment> {
    check_dims(scores)?;
    let (n, s) = (scores.rows(), scores.cols());
    let width = s + 1;
    let mut best = vec![f64::NEG_INFINITY; (n + 1) * width];
    let mut take = vec![false; (n + 1) * width];
    for t in 0..=s {
        best[n * width + t] = 0.0;
    }
    for j in (0..n).rev() {
        for t in (0..s).rev() {
            if s - t < n - j {
                continue;
            }
            let paired = scores.get(j, t) + best[(j + 1) * width + t + 1];
            let skipped = best[j * width + t + 1];
            let at = j * width + t;
            if paired >= skipped {
                best[at] = paired;
                take[at] = true;
            } else {
                best[at] = skipped;
            }
        }
    }
    let mut segments = Vec::with_capacity(n);
    let (mut j, mut t) = (0, 0);
    while j < n {
        if take[j * width + t] {
            segments.push(t);
            j += 1;
        }
        t += 1;
    }
    Ok(Alignment {
        segments,
        num_segments: s,
        score: best[0],
    })
}

/// Exhaustive search over every strictly increasing segment assignment.
pub fn align_bruteforce(scores: &ScoreMatrix) -> Result<Alignment> {
    check_dims(scores)?;
    let (n, s) = (scores.rows(), scores.cols());
    if s > BRUTEFORCE_MAX_SEGMENTS {
        return Err(Error::SizeLimitExceeded(format!(
            "{s} segments (max {BRUTEFORCE_MAX_SEGMENTS} for exhaustive alignment)"
        )));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut current = Vec::with_capacity(n);
    enumerate_increasing(n, s, 0, &mut current, &mut |assign| {
        // Right fold, matching the summation order of the recursion.
        let score = assign
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (j, &t)| scores.get(j, t) + acc);
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, assign.to_vec()));
        }
    });
    let (score, segments) = best.expect("n <= s guarantees a feasible assignment");
    Ok(Alignment {
        segments,
        num_segments: s,
        score,
    })
}

fn enumerate_increasing(
    n: usize,
    s: usize,
    from: usize,
    current: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if current.len() == n {
        visit(current);
        return;
    }
    let remaining = n - current.len();
    for t in from..=s - remaining {
        current.push(t);
        enumerate_increasing(n, s, t + 1, current, visit);
        current.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub threshold: f64,
    pub extension_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            threshold: default_threshold(),
            extension_cap: DEFAULT_EXTENSION_CAP,
        }
    }
}

/// DP result for one linear extension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionAlignment {
    pub extension: Vec<usize>,
    pub alignment: Alignment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub probability: f64,
    pub label: bool,
    /// Index into `per_extension` of the winning extension.
    pub best_index: usize,
    pub best_extension: Vec<usize>,
    /// Rows follow `best_extension`.
    pub best_alignment: Alignment,
    /// The extension enumeration hit its cap.
    pub truncated: bool,
    pub per_extension: Vec<ExtensionAlignment>,
}

impl Verdict {
    /// `(node_id, segment_index)` pairs of the winning alignment.
    pub fn node_pairs(&self) -> Vec<(usize, usize)> {
        self.best_alignment
            .pairs()
            .map(|(row, t)| (self.best_extension[row], t))
            .collect()
    }
}

/// Clamped log-score of every `(node, segment)` pair.
pub fn node_scores(g: &TaskGraph, trace: &SegmentedTrace, scorer: &dyn Scorer) -> Result<ScoreMatrix> {
    let rows = g
        .nodes()
        .iter()
        .map(|q| {
            trace
                .segments
                .iter()
                .map(|seg| scorer.score(q, seg).map(clamped_log))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if g.is_empty() {
        return Ok(ScoreMatrix {
            rows: 0,
            cols: trace.len(),
            values: Vec::new(),
        });
    }
    ScoreMatrix::new(rows)
}

/// Probability that the trace realizes some linear extension of `g`:
/// `sigmoid(F / N)` for the best alignment score `F` over all extensions.
pub fn verify(
    g: &TaskGraph,
    trace: &SegmentedTrace,
    scorer: &dyn Scorer,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    if g.is_empty() {
        return Err(Error::Config("task graph has no nodes".into()));
    }
    if g.len() > trace.len() {
        return Err(Error::TooFewSegments {
            queries: g.len(),
            segments: trace.len(),
        });
    }
    let extensions = graph::linear_extensions(g, opts.extension_cap)?;
    let scores = node_scores(g, trace, scorer)?;
    verify_with_scores(&scores, extensions, opts)
}

/// Verification on a precomputed node-by-segment score matrix.
pub fn verify_with_scores(
    scores: &ScoreMatrix,
    extensions: graph::Extensions,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    let mut per_extension: Vec<ExtensionAlignment> = Vec::with_capacity(extensions.sequences.len());
    let mut best_index = 0;
    for (i, ext) in extensions.sequences.into_iter().enumerate() {
        let alignment = align_dp(&scores.permuted(&ext))?;
        if i > 0 && alignment.score > per_extension[best_index].alignment.score {
            best_index = i;
        }
        per_extension.push(ExtensionAlignment {
            extension: ext,
            alignment,
        });
    }
    let best = per_extension[best_index].clone();
    let n = scores.rows() as f64;
    let probability = sigmoid(best.alignment.score / n);
    Ok(Verdict {
        probability,
        label: probability + DECISION_TOLERANCE >= opts.threshold,
        best_index,
        best_extension: best.extension,
        best_alignment: best.alignment,
        truncated: extensions.truncated,
        per_extension,
    })
}

/// Writes `extension_index,query_id,segment_index,log_score` rows for every
/// extension's alignment. `scores` is the node-by-segment matrix.
pub fn write_alignment_csv<W: Write>(verdict: &Verdict, scores: &ScoreMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["extension_index", "query_id", "segment_index", "log_score"])?;
    for (i, ea) in verdict.per_extension.iter().enumerate() {
        for (row, t) in ea.alignment.pairs() {
            let node = ea.extension[row];
            w.write_record([
                i.to_string(),
                node.to_string(),
                t.to_string(),
                scores.get(node, t).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads an `N x S` matrix of log-scores, one row per line, comma separated.
pub fn read_score_csv<R: std::io::Read>(input: R) -> Result<ScoreMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Syntax(format!("not a number: `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Syntax("score matrix is empty".into()));
    }
    ScoreMatrix::new(rows)
}
