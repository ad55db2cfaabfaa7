//! Alternating optimization of a [`ParametricScorer`].
//!
//! Each mini-batch runs two steps. First, with the parameters frozen, every
//! sample's best linear extension and alignment are found exactly as
//! verification would find them. Second, with those choices frozen, the mean
//! binary cross-entropy between `sigmoid(F / N)` and the labels is
//! differentiated through the selected log-scores only, and one Adam step is
//! taken.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{Adam, ParametricScorer};
use crate::aligner::{
    self, clamped_log, segment, sigmoid, ScoreMatrix, VerifyOptions, Verdict, PROB_FLOOR,
};
use crate::dsl::{QueryScheme, TaskGraph};
use crate::error::{Error, Result};
use crate::graph::{self, Extensions, DEFAULT_EXTENSION_CAP};
use crate::lexicon::Lexicon;
use crate::seeds;
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub extension_cap: usize,
    /// Standard deviation of the initial weights. Zero weights tie every
    /// segment, which sends the first alignments to the earliest segments.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            epochs: 50,
            batch_size: 64,
            seed: 0,
            extension_cap: DEFAULT_EXTENSION_CAP,
            init_scale: 0.003,
        }
    }
}

/// A labelled sample with everything the trainer needs precomputed.
#[derive(Debug, Clone)]
pub struct TrainingExample {
    pub graph: TaskGraph,
    /// Mean-pooled features of each segment.
    pub features: Vec<Vec<f64>>,
    pub label: bool,
    extensions: Extensions,
}

impl TrainingExample {
    pub fn new(
        graph: TaskGraph,
        trace: &Trace,
        label: bool,
        window: usize,
        extension_cap: usize,
    ) -> Result<Self> {
        let segmented = segment(trace, window)?;
        if graph.is_empty() {
            return Err(Error::Config("task graph has no nodes".into()));
        }
        if graph.len() > segmented.len() {
            return Err(Error::TooFewSegments {
                queries: graph.len(),
                segments: segmented.len(),
            });
        }
        let extensions = graph::linear_extensions(&graph, extension_cap)?;
        Ok(TrainingExample {
            features: segmented.segments.iter().map(|s| s.mean_features()).collect(),
            graph,
            label,
            extensions,
        })
    }

    pub fn target(&self) -> f64 {
        if self.label {
            1.0
        } else {
            0.0
        }
    }
}

/// Builds training examples, converting every graph to `scheme` first.
pub fn prepare_examples<'a>(
    items: impl IntoIterator<Item = (&'a TaskGraph, &'a Trace, bool)>,
    window: usize,
    scheme: QueryScheme,
    lexicon: &Lexicon,
    extension_cap: usize,
) -> Result<Vec<TrainingExample>> {
    items
        .into_iter()
        .map(|(g, trace, label)| {
            let g = g.to_scheme(scheme, |r| lexicon.relation_of(r));
            TrainingExample::new(g, trace, label, window, extension_cap)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean loss over each epoch, measured before each batch's update.
    pub epoch_losses: Vec<f64>,
    pub steps: u64,
}

/// Log-score matrix of an example under the current parameters.
pub fn score_matrix(params: &ParametricScorer, ex: &TrainingExample) -> Result<ScoreMatrix> {
    let rows = ex
        .graph
        .nodes()
        .iter()
        .map(|q| {
            ex.features
                .iter()
                .map(|f| params.probability(q, f).map(clamped_log))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreMatrix::new(rows)
}

/// Step (i): the verification verdict under frozen parameters.
pub fn best_alignment(params: &ParametricScorer, ex: &TrainingExample) -> Result<Verdict> {
    aligner::verify_with_scores(
        &score_matrix(params, ex)?,
        ex.extensions.clone(),
        &VerifyOptions::default(),
    )
}

fn bce(x: f64, y: f64) -> f64 {
    // softplus(x) - y x, computed stably
    let softplus = if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    };
    softplus - y * x
}

/// Step (ii): loss for a frozen extension/alignment, adding `scale * ∂L/∂θ`
/// into `grad` when given.
fn frozen_loss(
    params: &ParametricScorer,
    ex: &TrainingExample,
    verdict: &Verdict,
    grad: Option<(&mut [f64], f64)>,
) -> Result<f64> {
    let n = ex.graph.len() as f64;
    let pairs = verdict.node_pairs();
    let mut f = 0.0;
    let mut dlog = Vec::with_capacity(pairs.len());
    for &(node, t) in &pairs {
        let q = &ex.graph.nodes()[node];
        let z = params.logit(q, &ex.features[t])?;
        let s = sigmoid(z);
        f += clamped_log(s.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR));
        // Inside the clamp, d log(sigmoid z) / dz = 1 - sigmoid z.
        let inside = (PROB_FLOOR..=1.0 - PROB_FLOOR).contains(&s);
        dlog.push(if inside { 1.0 - s } else { 0.0 });
    }
    let x = f / n;
    let y = ex.target();
    let loss = bce(x, y);
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss(format!("loss {loss} at mean log-score {x}")));
    }
    if let Some((grad, scale)) = grad {
        let dx = (sigmoid(x) - y) / n;
        for (&(node, t), d) in pairs.iter().zip(dlog) {
            let q = &ex.graph.nodes()[node];
            params.accumulate_logit_gradient(q, &ex.features[t], scale * dx * d, grad)?;
        }
    }
    Ok(loss)
}

/// Per-sample loss with the best extension and alignment recomputed from the
/// current parameters.
pub fn sample_loss(params: &ParametricScorer, ex: &TrainingExample) -> Result<f64> {
    let verdict = best_alignment(params, ex)?;
    frozen_loss(params, ex, &verdict, None)
}

/// Per-sample loss and its gradient with the alignment frozen at its current
/// optimum.
pub fn loss_and_gradient(params: &ParametricScorer, ex: &TrainingExample) -> Result<(f64, Vec<f64>)> {
    let verdict = best_alignment(params, ex)?;
    let mut grad = vec![0.0; params.params().len()];
    let loss = frozen_loss(params, ex, &verdict, Some((&mut grad, 1.0)))?;
    Ok((loss, grad))
}

impl TrainConfig {
    /// Fresh scorer drawn with this config's seed and init scale.
    pub fn initial_scorer(&self, vocab: Vec<String>, dim: usize) -> Result<ParametricScorer> {
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config("init scale must be finite and non-negative".into()));
        }
        if self.init_scale > 0.0 {
            ParametricScorer::random(vocab, dim, self.init_scale, self.seed)
        } else {
            ParametricScorer::new(vocab, dim)
        }
    }
}

/// Mini-batch training. The returned parameters depend only on the inputs and
/// `config.seed`.
pub fn train(
    examples: &[TrainingExample],
    mut params: ParametricScorer,
    config: &TrainConfig,
) -> Result<(ParametricScorer, TrainReport)> {
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(config.lr > 0.0 && config.lr.is_finite()) || config.batch_size == 0 {
        return Err(Error::Config("learning rate and batch size must be positive".into()));
    }
    let mut adam = Adam::new(params.params().len(), config.lr);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = seeds::rng(config.seed, "train-order");
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let frozen = &params;
            let results = batch
                .par_iter()
                .map(|&i| {
                    let ex = &examples[i];
                    let verdict = best_alignment(frozen, ex)?;
                    let mut grad = vec![0.0; frozen.params().len()];
                    let loss = frozen_loss(frozen, ex, &verdict, Some((&mut grad, 1.0)))?;
                    Ok((loss, grad))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut grad = vec![0.0; params.params().len()];
            let scale = 1.0 / batch.len() as f64;
            for (loss, g) in results {
                total += loss;
                for (a, b) in grad.iter_mut().zip(g) {
                    *a += scale * b;
                }
            }
            if let Some(bad) = grad.iter().position(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss(format!("gradient entry {bad} is not finite")));
            }
            adam.step(params.params_mut(), &grad);
        }
        epoch_losses.push(total / examples.len() as f64);
    }
    Ok((
        params,
        TrainReport {
            epoch_losses,
            steps: adam.steps(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Action, Query};
    use crate::trace::Event;

    fn toy() -> (ParametricScorer, TrainingExample) {
        let lex = Lexicon::default();
        let dim = 8;
        let mut frames = vec![vec![0.0; dim]; 40];
        for f in &mut frames[20..32] {
            f[Action::Heat.index()] = 1.0;
        }
        let trace = Trace {
            frames,
            events: Some(vec![Event {
                start: 20,
                end: 32,
                action: Action::Heat,
                object: "apple".into(),
                receptacle: None,
            }]),
        };
        let g = TaskGraph::new(vec![Query::state("apple", "hot")], []).unwrap();
        let ex = TrainingExample::new(g, &trace, true, 20, 64).unwrap();
        (ParametricScorer::for_lexicon(&lex, dim), ex)
    }

    #[test]
    fn single_positive_loss_decreases() {
        let (params, ex) = toy();
        let cfg = TrainConfig {
            epochs: 11,
            ..TrainConfig::default()
        };
        let (_, report) = train(std::slice::from_ref(&ex), params, &cfg).unwrap();
        assert_eq!(report.steps, 11);
        for w in report.epoch_losses.windows(2) {
            assert!(w[1] < w[0], "{:?}", report.epoch_losses);
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let (params, _) = toy();
        assert_eq!(
            train(&[], params, &TrainConfig::default()).unwrap_err(),
            Error::EmptyDataset
        );
    }

    #[test]
    fn bce_matches_definition() {
        for x in [-3.0, -0.2, 0.0, 0.7] {
            for y in [0.0, 1.0] {
                let p: f64 = sigmoid(x);
                let direct = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
                assert!((bce(x, y) - direct).abs() < 1e-12);
            }
        }
    }
}
