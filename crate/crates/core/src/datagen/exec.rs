//! Symbolic plan execution: turns an ordered list of sub-tasks into an
//! annotated trace of synthetic feature frames.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::task::TaskSpec;
use crate::dsl::Action;
use crate::error::{Error, Result};
use crate::graph;
use crate::lexicon::Lexicon;
use crate::seeds;
use crate::trace::{Event, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    /// Feature dimension.
    pub dim: usize,
    /// Sub-task block length range in frames, inclusive.
    pub block: (usize, usize),
    /// Navigation gap length range in frames, inclusive. A gap precedes the
    /// first block and follows every block.
    pub gap: (usize, usize),
    /// Amplitude of the active one-hot channels. Well above the noise so a
    /// linear scorer separates partially covered segments within a few
    /// hundred optimizer steps.
    pub signal: f64,
    /// Standard deviation of the Gaussian noise added to every channel.
    pub noise: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            dim: 64,
            block: (10, 18),
            gap: (30, 40),
            signal: 32.0,
            noise: 0.1,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self, lexicon: &Lexicon) -> Result<()> {
        let needed = FeatureLayout::new(lexicon).width();
        if self.dim < needed {
            return Err(Error::Config(format!(
                "feature dimension {} below the {needed} channels the lexicon needs",
                self.dim
            )));
        }
        if self.block.0 == 0 || self.block.0 > self.block.1 || self.gap.0 > self.gap.1 {
            return Err(Error::Config("block and gap ranges must be non-empty".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite() && self.signal.is_finite()) {
            return Err(Error::Config("noise must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Channel assignment: one per action, one for navigation, then one per
/// object and one per receptacle in lexicon order. Remaining channels carry
/// only noise.
#[derive(Debug, Clone)]
pub struct FeatureLayout {
    objects: Vec<String>,
    receptacles: Vec<String>,
}

impl FeatureLayout {
    pub const NAVIGATION: usize = Action::ALL.len();

    pub fn new(lexicon: &Lexicon) -> Self {
        FeatureLayout {
            objects: lexicon.objects.keys().cloned().collect(),
            receptacles: lexicon.receptacles.keys().cloned().collect(),
        }
    }

    pub fn width(&self) -> usize {
        Action::ALL.len() + 1 + self.objects.len() + self.receptacles.len()
    }

    pub fn action(&self, a: Action) -> usize {
        a.index()
    }

    pub fn object(&self, name: &str) -> Option<usize> {
        self.objects
            .iter()
            .position(|o| o == name)
            .map(|i| Action::ALL.len() + 1 + i)
    }

    pub fn receptacle(&self, name: &str) -> Option<usize> {
        self.receptacles
            .iter()
            .position(|r| r == name)
            .map(|i| Action::ALL.len() + 1 + self.objects.len() + i)
    }
}

fn round3(x: f64) -> f64 {
    let r = (x * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Renders sub-tasks `order` of `spec` as consecutive blocks separated by
/// navigation gaps. Features are rounded to three decimals.
pub fn render_trace(
    spec: &TaskSpec,
    order: &[usize],
    lexicon: &Lexicon,
    cfg: &TraceConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Trace> {
    spec.validate(lexicon)?;
    cfg.validate(lexicon)?;
    let layout = FeatureLayout::new(lexicon);
    let noise = Normal::new(0.0, cfg.noise).map_err(|e| Error::Config(e.to_string()))?;
    let mut frames: Vec<Vec<f64>> = Vec::new();
    let mut events = Vec::with_capacity(order.len());
    let push = |frames: &mut Vec<Vec<f64>>, active: &[usize], count: usize, rng: &mut ChaCha8Rng| {
        for _ in 0..count {
            let mut f: Vec<f64> = (0..cfg.dim).map(|_| noise.sample(rng)).collect();
            for &c in active {
                f[c] += cfg.signal;
            }
            frames.push(f.into_iter().map(round3).collect());
        }
    };
    let object = layout
        .object(&spec.object)
        .ok_or_else(|| Error::UnknownObject(spec.object.clone()))?;
    push(&mut frames, &[FeatureLayout::NAVIGATION], rng.random_range(cfg.gap.0..=cfg.gap.1), rng);
    for &i in order {
        let sub = &spec.sub_tasks[i];
        let mut active = vec![layout.action(sub.action), object];
        if let Some(r) = &sub.receptacle {
            active.push(layout.receptacle(r).ok_or_else(|| Error::UnknownObject(r.clone()))?);
        }
        let len = rng.random_range(cfg.block.0..=cfg.block.1);
        let start = frames.len();
        push(&mut frames, &active, len, rng);
        events.push(Event {
            start,
            end: start + len,
            action: sub.action,
            object: spec.object.clone(),
            receptacle: sub.receptacle.clone(),
        });
        push(&mut frames, &[FeatureLayout::NAVIGATION], rng.random_range(cfg.gap.0..=cfg.gap.1), rng);
    }
    Ok(Trace {
        frames,
        events: Some(events),
    })
}

/// Executes a task: samples one of its linear extensions uniformly (among the
/// first `extension_cap` in lexicographic order) and renders it.
pub fn execute_plan(
    spec: &TaskSpec,
    lexicon: &Lexicon,
    cfg: &TraceConfig,
    extension_cap: usize,
    seed: u64,
) -> Result<(Trace, Vec<usize>)> {
    let mut rng = seeds::rng(seed, "execute");
    execute_with(spec, lexicon, cfg, extension_cap, &mut rng)
}

pub(crate) fn execute_with(
    spec: &TaskSpec,
    lexicon: &Lexicon,
    cfg: &TraceConfig,
    extension_cap: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Trace, Vec<usize>)> {
    spec.validate(lexicon)?;
    let ext = graph::linear_extensions(&spec.graph(lexicon), extension_cap)?;
    let order = ext
        .sequences
        .choose(rng)
        .cloned()
        .ok_or_else(|| Error::Config("task has no sub-tasks".into()))?;
    let trace = render_trace(spec, &order, lexicon, cfg, rng)?;
    Ok((trace, order))
}
