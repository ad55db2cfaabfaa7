use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Scorer;
use crate::aligner::Segment;
use crate::dsl::{Query, QueryType, QueryScheme};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub true_prob: f64,
    pub false_prob: f64,
    /// Probability of reporting the opposite truth value for a given
    /// `(query, segment)` pair.
    pub label_flip_noise: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            true_prob: 0.99,
            false_prob: 0.01,
            label_flip_noise: 0.0,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |p: f64| p > 0.0 && p < 1.0;
        if !unit(self.true_prob) || !unit(self.false_prob) || self.true_prob <= self.false_prob {
            return Err(Error::Config(format!(
                "oracle needs 0 < false_prob < true_prob < 1, got {} / {}",
                self.false_prob, self.true_prob
            )));
        }
        if !(0.0..0.5).contains(&self.label_flip_noise) {
            return Err(Error::Config(format!(
                "flip noise {} outside [0, 0.5)",
                self.label_flip_noise
            )));
        }
        Ok(())
    }
}

/// Scores queries against the annotations attached to each segment.
#[derive(Debug, Clone)]
pub struct OracleScorer {
    config: OracleConfig,
    relations: BTreeMap<String, String>,
}

impl OracleScorer {
    pub fn new(config: OracleConfig, lexicon: &Lexicon) -> Result<Self> {
        config.validate()?;
        Ok(OracleScorer {
            config,
            relations: lexicon.receptacles.clone(),
        })
    }

    /// Noiseless oracle with default probabilities.
    pub fn noiseless(lexicon: &Lexicon) -> Self {
        OracleScorer::new(OracleConfig::default(), lexicon).expect("default config is valid")
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    /// Ground truth: some event annotated in the segment realizes the query.
    pub fn holds(&self, query: &Query, segment: &Segment) -> Result<bool> {
        let events = segment.events.as_ref().ok_or(Error::MissingAnnotations)?;
        let scheme = match query.qtype() {
            QueryType::Action => QueryScheme::Action,
            _ => QueryScheme::StateRelation,
        };
        let relation_of = |r: &str| self.relations.get(r).cloned().unwrap_or_else(|| "in".into());
        Ok(events.iter().any(|e| e.query(scheme, relation_of) == *query))
    }

    fn flipped(&self, query: &Query, segment: &Segment) -> bool {
        if self.config.label_flip_noise == 0.0 {
            return false;
        }
        let h = seeds::combine(
            seeds::combine(self.config.seed, seeds::hash_str(&query.to_string())),
            segment.key,
        );
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        u < self.config.label_flip_noise
    }
}

impl Scorer for OracleScorer {
    fn score(&self, query: &Query, segment: &Segment) -> Result<f64> {
        let truth = self.holds(query, segment)? != self.flipped(query, segment);
        Ok(if truth {
            self.config.true_prob
        } else {
            self.config.false_prob
        })
    }
}
