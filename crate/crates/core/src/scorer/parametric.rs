use std::collections::HashMap;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Scorer;
use crate::aligner::{sigmoid, Segment, PROB_FLOOR};
use crate::dsl::{Query, QueryType};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::seeds;

pub const CHECKPOINT_FORMAT: &str = "taskverify-scorer";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Per-query-type logistic scorer.
///
/// Each query type `τ` owns a weight matrix `W_τ` of shape `|vocab| x (d+1)`
/// and a bias `b_τ`. With `x = [f ∥ 1]` the mean-pooled segment features plus
/// a constant, the logit is `b_τ + Σ_a W_τ[a]·x` summed over the query's
/// argument tokens `a`, which is `W_τ` applied to the outer product of the
/// query's token counts and `x`. All parameters live in one flat vector,
/// block `τ` after block `τ-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricScorer {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    vocab_hash: String,
    dim: usize,
    vocab: Vec<String>,
    blocks: Vec<BlockFile>,
}

#[derive(Serialize, Deserialize)]
struct BlockFile {
    query_type: String,
    shape: [usize; 2],
    weights: Vec<f64>,
    bias: f64,
}

pub(crate) fn vocab_hash(vocab: &[String]) -> String {
    format!("{:016x}", seeds::hash_str(&vocab.join("\n")))
}

impl ParametricScorer {
    /// All-zero parameters: every score is 0.5.
    pub fn new(vocab: Vec<String>, dim: usize) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::Config("scorer vocabulary is empty".into()));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, t) in vocab.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary token `{t}`")));
            }
        }
        let theta = vec![0.0; QueryType::ALL.len() * (vocab.len() * (dim + 1) + 1)];
        Ok(ParametricScorer {
            vocab,
            index,
            dim,
            theta,
        })
    }

    pub fn for_lexicon(lexicon: &Lexicon, dim: usize) -> Self {
        ParametricScorer::new(lexicon.tokens(), dim).expect("lexicon tokens are unique")
    }

    /// Parameters drawn i.i.d. from `N(0, scale^2)`.
    pub fn random(vocab: Vec<String>, dim: usize, scale: f64, seed: u64) -> Result<Self> {
        let mut s = ParametricScorer::new(vocab, dim)?;
        let normal = Normal::new(0.0, scale).map_err(|e| Error::Config(e.to_string()))?;
        let mut rng = seeds::rng(seed, "scorer-init");
        s.theta.iter_mut().for_each(|w| *w = normal.sample(&mut rng));
        Ok(s)
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[f64] {
        &self.theta
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn block_len(&self) -> usize {
        self.vocab.len() * (self.dim + 1) + 1
    }

    /// Flat index range of the parameters owned by one query type.
    pub fn block(&self, qtype: QueryType) -> std::ops::Range<usize> {
        let len = self.block_len();
        qtype.index() * len..(qtype.index() + 1) * len
    }

    fn token_rows(&self, query: &Query) -> Result<Vec<usize>> {
        query
            .args()
            .iter()
            .map(|a| {
                self.index
                    .get(a)
                    .copied()
                    .ok_or_else(|| Error::UnknownVocabulary(a.clone()))
            })
            .collect()
    }

    fn check_dim(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: features.len(),
            });
        }
        Ok(())
    }

    pub fn logit(&self, query: &Query, features: &[f64]) -> Result<f64> {
        self.check_dim(features)?;
        let rows = self.token_rows(query)?;
        let base = self.block(query.qtype()).start;
        let width = self.dim + 1;
        let mut z = self.theta[base + self.block_len() - 1];
        for r in rows {
            let w = &self.theta[base + r * width..base + (r + 1) * width];
            z += w[self.dim] + w[..self.dim].iter().zip(features).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(z)
    }

    /// Adds `scale * ∂logit/∂θ` into `grad`.
    pub fn accumulate_logit_gradient(
        &self,
        query: &Query,
        features: &[f64],
        scale: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        self.check_dim(features)?;
        let rows = self.token_rows(query)?;
        let base = self.block(query.qtype()).start;
        let width = self.dim + 1;
        grad[base + self.block_len() - 1] += scale;
        for r in rows {
            let g = &mut grad[base + r * width..base + (r + 1) * width];
            for (gi, f) in g.iter_mut().zip(features) {
                *gi += scale * f;
            }
            g[self.dim] += scale;
        }
        Ok(())
    }

    /// Sigmoid of the logit, clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]`.
    pub fn probability(&self, query: &Query, features: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.logit(query, features)?).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR))
    }

    pub fn to_json(&self) -> Result<String> {
        let len = self.block_len();
        let blocks = QueryType::ALL
            .iter()
            .map(|&t| {
                let b = &self.theta[self.block(t)];
                BlockFile {
                    query_type: t.type_name().to_string(),
                    shape: [self.vocab.len(), self.dim + 1],
                    weights: b[..len - 1].to_vec(),
                    bias: b[len - 1],
                }
            })
            .collect();
        let ck = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            vocab_hash: vocab_hash(&self.vocab),
            dim: self.dim,
            vocab: self.vocab.clone(),
            blocks,
        };
        Ok(serde_json::to_string(&ck)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Loads a checkpoint. When `expected` is given, the stored vocabulary and
    /// feature dimension must match it exactly.
    pub fn from_json(text: &str, expected: Option<(&[String], usize)>) -> Result<Self> {
        let ck: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format {} v{}",
                ck.format, ck.version
            )));
        }
        if vocab_hash(&ck.vocab) != ck.vocab_hash {
            return Err(Error::Checkpoint("vocabulary hash does not match its list".into()));
        }
        if let Some((vocab, dim)) = expected {
            if vocab_hash(vocab) != ck.vocab_hash {
                return Err(Error::Checkpoint("vocabulary differs from the expected one".into()));
            }
            if dim != ck.dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: ck.dim,
                });
            }
        }
        let mut s = ParametricScorer::new(ck.vocab, ck.dim)?;
        if ck.blocks.len() != QueryType::ALL.len() {
            return Err(Error::Checkpoint(format!("expected 3 blocks, got {}", ck.blocks.len())));
        }
        let len = s.block_len();
        for (t, b) in QueryType::ALL.iter().zip(ck.blocks) {
            if b.query_type != t.type_name()
                || b.shape != [s.vocab.len(), s.dim + 1]
                || b.weights.len() != len - 1
            {
                return Err(Error::Checkpoint(format!("block {} has the wrong shape", b.query_type)));
            }
            if b.weights.iter().any(|w| !w.is_finite()) || !b.bias.is_finite() {
                return Err(Error::Checkpoint("non-finite parameter".into()));
            }
            let range = s.block(*t);
            s.theta[range.start..range.end - 1].copy_from_slice(&b.weights);
            s.theta[range.end - 1] = b.bias;
        }
        Ok(s)
    }

    pub fn load(path: &Path, expected: Option<(&[String], usize)>) -> Result<Self> {
        ParametricScorer::from_json(&std::fs::read_to_string(path)?, expected)
    }
}

impl Scorer for ParametricScorer {
    fn score(&self, query: &Query, segment: &Segment) -> Result<f64> {
        self.probability(query, &segment.mean_features())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vec<String> {
        ["apple", "hot", "plate", "in", "clean", "heat"].map(String::from).to_vec()
    }

    #[test]
    fn zero_parameters_give_one_half() {
        let s = ParametricScorer::new(vocab(), 3).unwrap();
        let p = s.probability(&Query::state("apple", "hot"), &[0.3, -1.0, 2.0]).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn errors() {
        let s = ParametricScorer::new(vocab(), 3).unwrap();
        assert_eq!(
            s.logit(&Query::state("apple", "hot"), &[0.0; 2]).unwrap_err(),
            Error::DimensionMismatch { expected: 3, got: 2 }
        );
        assert_eq!(
            s.logit(&Query::state("egg", "hot"), &[0.0; 3]).unwrap_err(),
            Error::UnknownVocabulary("egg".into())
        );
    }

    #[test]
    fn types_are_isolated() {
        let mut s = ParametricScorer::random(vocab(), 3, 0.5, 1).unwrap();
        let rel = Query::relation("apple", "plate", "in");
        let f = [0.2, 0.4, -0.1];
        let before = s.logit(&rel, &f).unwrap();
        let state = s.block(QueryType::State);
        s.params_mut()[state].iter_mut().for_each(|w| *w += 1.0);
        assert_eq!(s.logit(&rel, &f).unwrap(), before);
        assert_ne!(s.logit(&Query::state("apple", "hot"), &f).unwrap(), 0.0);
    }

    #[test]
    fn checkpoint_round_trip_and_rejection() {
        let s = ParametricScorer::random(vocab(), 3, 0.5, 9).unwrap();
        let json = s.to_json().unwrap();
        assert_eq!(ParametricScorer::from_json(&json, None).unwrap(), s);
        let v = vocab();
        assert!(ParametricScorer::from_json(&json, Some((&v, 3))).is_ok());
        assert!(matches!(
            ParametricScorer::from_json(&json, Some((&v, 4))),
            Err(Error::DimensionMismatch { .. })
        ));
        let other: Vec<String> = v.iter().rev().cloned().collect();
        assert!(matches!(
            ParametricScorer::from_json(&json, Some((&other, 3))),
            Err(Error::Checkpoint(_))
        ));
        let tampered = json.replace("\"apple\"", "\"pear\"");
        assert!(matches!(
            ParametricScorer::from_json(&tampered, None),
            Err(Error::Checkpoint(_))
        ));
    }
}
