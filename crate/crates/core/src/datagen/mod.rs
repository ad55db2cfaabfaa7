//! Synthetic benchmark generation.
//!
//! Tasks are sampled as signatures (ordered groups of actions) bound to a
//! target object, executed symbolically into annotated feature traces, and
//! described with the shipped templates. Negatives come from editing either
//! side of a positive pair. Every sample is checked with the noiseless oracle
//! before it is accepted.
//!
//! Splits:
//!
//! * `train`: seen signatures, seen `(action, object)` pairs, full wording.
//! * `novel_tasks`: held-out signatures built from seen pairs.
//! * `novel_steps`: seen signatures with at least one held-out pair.
//! * `abstraction`: like `train`, described without appliances or as goals.

mod exec;
mod negative;
mod task;

pub use exec::{execute_plan, render_trace, FeatureLayout, TraceConfig};
pub use negative::{drop_block, edit_description, shuffle_trace, trace_order, NegativeKind};
pub use task::{all_signatures, Difficulty, Signature, SubTask, TaskSpec};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aligner::{segment, verify, VerifyOptions};
use crate::dsl::{Action, TaskGraph};
use crate::error::{Error, Result};
use crate::graph;
use crate::lexicon::Lexicon;
use crate::scorer::OracleScorer;
use crate::seeds;
use crate::semparse::TemplateSet;
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    NovelTasks,
    NovelSteps,
    Abstraction,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::NovelTasks, Split::NovelSteps, Split::Abstraction];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::NovelTasks => "novel_tasks",
            Split::NovelSteps => "novel_steps",
            Split::Abstraction => "abstraction",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Split::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown split `{s}`")))
    }
}

/// Distribution of task complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifficultyMix {
    /// Every complexity equally likely.
    #[default]
    Uniform,
    /// Skewed towards long tasks, about 4.7 sub-tasks on average.
    Skewed,
}

impl DifficultyMix {
    /// Relative weight of complexity `1..=6`.
    pub fn weights(self) -> [f64; 6] {
        match self {
            DifficultyMix::Uniform => [1.0; 6],
            DifficultyMix::Skewed => [0.02, 0.05, 0.10, 0.18, 0.30, 0.35],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub train: usize,
    pub novel_tasks: usize,
    pub novel_steps: usize,
    pub abstraction: usize,
    pub difficulty: DifficultyMix,
    pub max_complexity: usize,
    pub max_ordering: usize,
    /// Fraction of multi-step signatures reserved for `novel_tasks`.
    pub holdout_tasks: f64,
    /// Fraction of `(action, object)` pairs reserved for `novel_steps`.
    pub holdout_pairs: f64,
    pub negative_kinds: Vec<NegativeKind>,
    pub trace: TraceConfig,
    pub extension_cap: usize,
    /// Window sizes at which every sample's label is checked.
    pub check_windows: Vec<usize>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            train: 500,
            novel_tasks: 100,
            novel_steps: 100,
            abstraction: 100,
            difficulty: DifficultyMix::Uniform,
            max_complexity: 6,
            max_ordering: 5,
            holdout_tasks: 0.2,
            holdout_pairs: 0.15,
            negative_kinds: NegativeKind::ALL.to_vec(),
            trace: TraceConfig::default(),
            extension_cap: graph::DEFAULT_EXTENSION_CAP,
            check_windows: vec![10, 20, 30, 40],
        }
    }
}

impl GenConfig {
    pub fn size(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::NovelTasks => self.novel_tasks,
            Split::NovelSteps => self.novel_steps,
            Split::Abstraction => self.abstraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let frac = |x: f64| (0.0..1.0).contains(&x);
        if !frac(self.holdout_tasks) || !frac(self.holdout_pairs) {
            return Err(Error::Config("holdout fractions must lie in [0, 1)".into()));
        }
        if !(1..=Action::ALL.len()).contains(&self.max_complexity) {
            return Err(Error::Config(format!(
                "max complexity must be in 1..={}",
                Action::ALL.len()
            )));
        }
        if self.negative_kinds.is_empty() {
            return Err(Error::Config("at least one negative kind is required".into()));
        }
        if self.extension_cap == 0 || self.check_windows.contains(&0) {
            return Err(Error::Config("extension cap and windows must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub split: Split,
    pub label: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_kind: Option<NegativeKind>,
    pub task: String,
    pub description: String,
    pub graph: TaskGraph,
    pub difficulty: Difficulty,
    pub spec: TaskSpec,
    pub trace: Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wording {
    Full,
    Abstract,
}

/// Sampling state shared by every sample of one dataset.
#[derive(Debug, Clone)]
pub struct Generator {
    config: GenConfig,
    lexicon: Lexicon,
    templates: TemplateSet,
    oracle: OracleScorer,
    signatures: Vec<Signature>,
    heldout_signatures: BTreeSet<Signature>,
    heldout_pairs: BTreeSet<(Action, String)>,
    /// Admissible `(signature index, object)` combinations per split and
    /// complexity.
    pools: BTreeMap<Split, Vec<Vec<(usize, String)>>>,
}

const MAX_ATTEMPTS: usize = 200;

impl Generator {
    pub fn new(config: GenConfig, lexicon: Lexicon, templates: TemplateSet) -> Result<Self> {
        config.validate()?;
        lexicon.validate()?;
        config.trace.validate(&lexicon)?;
        let signatures = all_signatures(config.max_complexity, config.max_ordering);

        let mut multi: Vec<&Signature> = signatures.iter().filter(|s| s.complexity() >= 2).collect();
        multi.shuffle(&mut seeds::rng(config.seed, "holdout-signatures"));
        let take = (config.holdout_tasks * multi.len() as f64).round() as usize;
        let heldout_signatures: BTreeSet<Signature> = multi[..take].iter().map(|&s| s.clone()).collect();

        let heldout_pairs = hold_out_pairs(&lexicon, config.holdout_pairs, config.seed)?;

        let mut g = Generator {
            oracle: OracleScorer::noiseless(&lexicon),
            config,
            lexicon,
            templates,
            signatures,
            heldout_signatures,
            heldout_pairs,
            pools: BTreeMap::new(),
        };
        for split in Split::ALL {
            let mut pool = vec![Vec::new(); g.config.max_complexity];
            for (i, sig) in g.signatures.iter().enumerate() {
                for (object, acts) in &g.lexicon.objects {
                    if sig.actions().all(|a| acts.contains(&a))
                        && g.admits(split, sig, sig.actions().map(|a| (a, object.clone())))
                    {
                        pool[sig.complexity() - 1].push((i, object.clone()));
                    }
                }
            }
            let weights = g.config.difficulty.weights();
            let reachable = pool.iter().enumerate().any(|(c, p)| !p.is_empty() && weights[c] > 0.0);
            if g.config.size(split) > 0 && !reachable {
                return Err(Error::InfeasibleSplit(format!(
                    "no task satisfies the `{split}` split rule under the current holdouts"
                )));
            }
            g.pools.insert(split, pool);
        }
        Ok(g)
    }

    pub fn config(&self) -> &GenConfig {
        &self.config
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn heldout_signatures(&self) -> &BTreeSet<Signature> {
        &self.heldout_signatures
    }

    pub fn heldout_pairs(&self) -> &BTreeSet<(Action, String)> {
        &self.heldout_pairs
    }

    fn admits(&self, split: Split, sig: &Signature, pairs: impl Iterator<Item = (Action, String)>) -> bool {
        let held_sig = self.heldout_signatures.contains(sig);
        let held_pairs = pairs.filter(|p| self.heldout_pairs.contains(p)).count();
        match split {
            Split::Train | Split::Abstraction => !held_sig && held_pairs == 0,
            Split::NovelTasks => held_sig && held_pairs == 0,
            Split::NovelSteps => !held_sig && held_pairs > 0,
        }
    }

    /// Whether a task may appear in `split`.
    pub fn admits_task(&self, split: Split, spec: &TaskSpec) -> bool {
        self.admits(split, &spec.signature(), spec.pairs())
    }

    /// Draws a task from the split's distribution.
    pub fn sample_task(&self, split: Split, rng: &mut ChaCha8Rng) -> Result<TaskSpec> {
        let pool = &self.pools[&split];
        let weights = self.config.difficulty.weights();
        let total: f64 = (0..pool.len())
            .filter(|&c| !pool[c].is_empty())
            .map(|c| weights[c])
            .sum();
        if total <= 0.0 {
            return Err(Error::InfeasibleSplit(format!("`{split}` has no admissible tasks")));
        }
        let mut u = rng.random::<f64>() * total;
        let mut complexity = 0;
        for c in (0..pool.len()).filter(|&c| !pool[c].is_empty() && weights[c] > 0.0) {
            complexity = c;
            if u < weights[c] {
                break;
            }
            u -= weights[c];
        }
        let (sig, object) = pool[complexity].choose(rng).expect("non-empty pool");
        let receptacles: Vec<&String> = self.lexicon.receptacles.keys().collect();
        let mut groups = self.signatures[*sig].0.clone();
        for g in &mut groups {
            g.shuffle(rng);
        }
        let sub_tasks = groups
            .iter()
            .flatten()
            .map(|&a| match a {
                Action::Place => SubTask::place(receptacles.choose(rng).expect("receptacles exist")),
                a => SubTask::new(a),
            })
            .collect();
        Ok(TaskSpec {
            object: object.clone(),
            sub_tasks,
            shape: groups.iter().map(Vec::len).collect(),
        })
    }

    fn wording(split: Split) -> Wording {
        match split {
            Split::Abstraction => Wording::Abstract,
            _ => Wording::Full,
        }
    }

    fn describe(&self, spec: &TaskSpec, wording: Wording, rng: &mut ChaCha8Rng) -> Result<String> {
        let goal_ok = spec.shape.len() == 1
            && spec
                .sub_tasks
                .iter()
                .all(|s| self.lexicon.phrase(s.action).adjective.is_some());
        let goal = wording == Wording::Abstract
            && goal_ok
            && !self.templates.with_shape(&spec.shape, true).is_empty()
            && rng.random_bool(0.5);
        let template = *self
            .templates
            .with_shape(&spec.shape, goal)
            .choose(rng)
            .ok_or_else(|| Error::Config(format!("no template for shape {:?}", spec.shape)))?;
        let slots: Vec<(Action, Option<String>)> = spec
            .sub_tasks
            .iter()
            .map(|s| (s.action, s.receptacle.clone()))
            .collect();
        template.render(&self.lexicon, &spec.object, &slots, wording == Wording::Full)
    }

    /// Noiseless-oracle verdict at every check window; `None` when some
    /// window yields fewer segments than queries.
    fn oracle_labels(&self, g: &TaskGraph, trace: &Trace, extension_cap: usize) -> Result<Vec<bool>> {
        let opts = VerifyOptions {
            extension_cap,
            ..VerifyOptions::default()
        };
        self.config
            .check_windows
            .iter()
            .map(|&k| match verify(g, &segment(trace, k)?, &self.oracle, &opts) {
                Ok(v) => Ok(v.label),
                Err(Error::TooFewSegments { .. }) => Ok(false),
                Err(e) => Err(e),
            })
            .collect()
    }

    fn sample_rng(&self, split: Split, index: usize, salt: u64) -> ChaCha8Rng {
        let key = seeds::combine(seeds::combine(self.config.seed, salt), index as u64);
        seeds::rng(key, split.name())
    }

    fn sample_id(split: Split, index: usize, salt: u64) -> String {
        if salt == 0 {
            format!("{split}-{index:05}")
        } else {
            format!("{split}-s{salt}-{index:05}")
        }
    }

    fn assemble(
        &self,
        split: Split,
        id: String,
        spec: TaskSpec,
        description: String,
        trace: Trace,
        negative_kind: Option<NegativeKind>,
    ) -> Sample {
        Sample {
            id,
            split,
            label: negative_kind.is_none(),
            negative_kind,
            task: spec.name(),
            description,
            graph: spec.graph(&self.lexicon),
            difficulty: spec.difficulty(),
            spec,
            trace,
        }
    }

    fn positive_with(&self, split: Split, id: String, rng: &mut ChaCha8Rng) -> Result<Sample> {
        for _ in 0..MAX_ATTEMPTS {
            let spec = self.sample_task(split, rng)?;
            let (trace, _) = exec::execute_with(
                &spec,
                &self.lexicon,
                &self.config.trace,
                self.config.extension_cap,
                rng,
            )?;
            let description = self.describe(&spec, Self::wording(split), rng)?;
            let g = spec.graph(&self.lexicon);
            if self.oracle_labels(&g, &trace, self.config.extension_cap)?.iter().all(|&l| l) {
                return Ok(self.assemble(split, id, spec, description, trace, None));
            }
        }
        Err(Error::Config(format!("could not realize a positive `{split}` sample")))
    }

    /// A positive sample whose trace realizes one of the task's extensions.
    pub fn positive(&self, split: Split, index: usize) -> Result<Sample> {
        let mut rng = self.sample_rng(split, index, 0);
        self.positive_with(split, Self::sample_id(split, index, 0), &mut rng)
    }

    /// Applies `kind` to a positive sample. The result is accepted only if the
    /// noiseless oracle rejects it under every extension at every check
    /// window, it still belongs to the sample's split, and its difficulty
    /// stays within the configured range.
    pub fn make_negative(&self, sample: &Sample, kind: NegativeKind, rng: &mut ChaCha8Rng) -> Result<Sample> {
        let spec = &sample.spec;
        let order = trace_order(spec, &sample.trace);
        let (new_spec, description, trace) = match kind {
            NegativeKind::Reordered | NegativeKind::Substituted => {
                let edited = edit_description(kind, spec, &order, &self.lexicon, rng)?;
                let d = self.describe(&edited, Self::wording(sample.split), rng)?;
                (edited, d, sample.trace.clone())
            }
            NegativeKind::TraceShuffled => (
                spec.clone(),
                sample.description.clone(),
                shuffle_trace(spec, &sample.trace, &self.lexicon, rng)?,
            ),
            NegativeKind::TraceDropped => (
                spec.clone(),
                sample.description.clone(),
                drop_block(&sample.trace, rng)?,
            ),
        };
        let d = new_spec.difficulty();
        if d.complexity > self.config.max_complexity || d.ordering > self.config.max_ordering {
            return Err(Error::CannotFalsify(format!(
                "{}: edited task exceeds the difficulty range",
                kind.name()
            )));
        }
        if !self.admits_task(sample.split, &new_spec) {
            return Err(Error::CannotFalsify(format!(
                "{}: edited task leaves the `{}` split",
                kind.name(),
                sample.split
            )));
        }
        let g = new_spec.graph(&self.lexicon);
        if self.oracle_labels(&g, &trace, usize::MAX)?.iter().any(|&l| l) {
            return Err(Error::CannotFalsify(format!("{}: trace still realizes the task", kind.name())));
        }
        Ok(self.assemble(sample.split, sample.id.clone(), new_spec, description, trace, Some(kind)))
    }

    fn negative_with(&self, split: Split, id: String, kind: NegativeKind, rng: &mut ChaCha8Rng) -> Result<Sample> {
        let mut last = None;
        for _ in 0..MAX_ATTEMPTS {
            let base = self.positive_with(split, id.clone(), rng)?;
            match self.make_negative(&base, kind, rng) {
                Ok(s) => return Ok(s),
                Err(e @ Error::CannotFalsify(_)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::CannotFalsify(kind.name().into())))
    }

    /// A negative sample of the requested kind, resampling the underlying
    /// task until the edit succeeds.
    pub fn negative(&self, split: Split, index: usize, kind: NegativeKind) -> Result<Sample> {
        let mut rng = self.sample_rng(split, index, 0);
        self.negative_with(split, Self::sample_id(split, index, 0), kind, &mut rng)
    }

    /// Sample `index` of a split of `n` samples drawn from stream `salt`. The
    /// first half is positive; the rest cycles through the negative kinds.
    pub fn sample_in(&self, split: Split, index: usize, n: usize, salt: u64) -> Result<Sample> {
        let positives = n.div_ceil(2);
        let mut rng = self.sample_rng(split, index, salt);
        let id = Self::sample_id(split, index, salt);
        if index < positives {
            self.positive_with(split, id, &mut rng)
        } else {
            let kinds = &self.config.negative_kinds;
            self.negative_with(split, id, kinds[(index - positives) % kinds.len()], &mut rng)
        }
    }

    pub fn sample(&self, split: Split, index: usize) -> Result<Sample> {
        self.sample_in(split, index, self.config.size(split), 0)
    }

    /// `n` samples of `split` from an independent stream. Salt 0 is the
    /// stream [`Generator::build`] uses.
    pub fn samples(&self, split: Split, n: usize, salt: u64) -> Result<Vec<Sample>> {
        (0..n)
            .into_par_iter()
            .map(|i| self.sample_in(split, i, n, salt))
            .collect()
    }

    pub fn build(&self) -> Result<Dataset> {
        let mut samples = Vec::new();
        for split in Split::ALL {
            samples.extend(self.samples(split, self.config.size(split), 0)?);
        }
        let stats = DatasetStats::new(self, &samples);
        Ok(Dataset { samples, stats })
    }
}

/// Greedily holds out a fraction of pairs while every action keeps at least
/// one training object.
fn hold_out_pairs(lexicon: &Lexicon, fraction: f64, seed: u64) -> Result<BTreeSet<(Action, String)>> {
    let mut pairs = lexicon.pairs();
    pairs.shuffle(&mut seeds::rng(seed, "holdout-pairs"));
    let target = (fraction * pairs.len() as f64).round() as usize;
    let mut remaining: BTreeMap<Action, usize> = BTreeMap::new();
    for (a, _) in &pairs {
        *remaining.entry(*a).or_default() += 1;
    }
    let mut held = BTreeSet::new();
    for (a, o) in pairs {
        if held.len() == target {
            break;
        }
        if remaining[&a] > 1 {
            *remaining.get_mut(&a).expect("counted") -= 1;
            held.insert((a, o));
        }
    }
    if held.len() < target {
        return Err(Error::InfeasibleSplit(format!(
            "holding out {target} (action, object) pairs would leave an action with no training object"
        )));
    }
    Ok(held)
}

pub fn build_dataset(config: &GenConfig) -> Result<Dataset> {
    Generator::new(config.clone(), Lexicon::default(), TemplateSet::default())?.build()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub samples: usize,
    pub positives: usize,
    pub negatives: usize,
    pub negative_kinds: BTreeMap<NegativeKind, usize>,
    pub complexity: BTreeMap<usize, usize>,
    pub ordering: BTreeMap<usize, usize>,
    pub mean_subtasks: f64,
    pub mean_ordering: f64,
    /// Exact number of linear extensions, averaged over tasks.
    pub mean_extensions: f64,
    pub mean_description_words: f64,
    pub mean_frames: f64,
}

impl SplitStats {
    pub fn of<'a>(samples: impl IntoIterator<Item = &'a Sample>) -> Self {
        let mut s = SplitStats::default();
        let (mut sub, mut ord, mut ext, mut words, mut frames) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for x in samples {
            s.samples += 1;
            if x.label {
                s.positives += 1;
            } else {
                s.negatives += 1;
            }
            if let Some(k) = x.negative_kind {
                *s.negative_kinds.entry(k).or_default() += 1;
            }
            *s.complexity.entry(x.difficulty.complexity).or_default() += 1;
            *s.ordering.entry(x.difficulty.ordering).or_default() += 1;
            sub += x.difficulty.complexity as f64;
            ord += x.difficulty.ordering as f64;
            ext += graph::count_extensions(&x.graph).unwrap_or(0) as f64;
            words += x.description.split_whitespace().count() as f64;
            frames += x.trace.len() as f64;
        }
        let n = s.samples.max(1) as f64;
        s.mean_subtasks = sub / n;
        s.mean_ordering = ord / n;
        s.mean_extensions = ext / n;
        s.mean_description_words = words / n;
        s.mean_frames = frames / n;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub config: GenConfig,
    pub overall: SplitStats,
    pub splits: BTreeMap<Split, SplitStats>,
    pub heldout_signatures: Vec<String>,
    pub heldout_pairs: Vec<String>,
}

impl DatasetStats {
    pub fn new(generator: &Generator, samples: &[Sample]) -> Self {
        DatasetStats {
            config: generator.config.clone(),
            overall: SplitStats::of(samples),
            splits: Split::ALL
                .iter()
                .map(|&sp| (sp, SplitStats::of(samples.iter().filter(|x| x.split == sp))))
                .collect(),
            heldout_signatures: generator.heldout_signatures.iter().map(ToString::to_string).collect(),
            heldout_pairs: generator
                .heldout_pairs
                .iter()
                .map(|(a, o)| format!("{a}({o})"))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub stats: DatasetStats,
}

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const STATS_FILE: &str = "stats.json";

impl Dataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    /// Writes `dataset.jsonl` and `stats.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_samples(&dir.join(DATASET_FILE), &self.samples)?;
        std::fs::write(dir.join(STATS_FILE), serde_json::to_string_pretty(&self.stats)? + "\n")?;
        Ok(())
    }
}

pub fn write_samples(path: &Path, samples: &[Sample]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a JSON-lines sample file. Accepts a directory holding
/// `dataset.jsonl`.
pub fn read_samples(path: &Path) -> Result<Vec<Sample>> {
    let path = if path.is_dir() {
        path.join(DATASET_FILE)
    } else {
        path.to_path_buf()
    };
    let file = std::io::BufReader::new(std::fs::File::open(&path)?);
    let mut out = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Syntax(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenConfig {
        GenConfig {
            seed: 3,
            train: 12,
            novel_tasks: 8,
            novel_steps: 8,
            abstraction: 8,
            ..GenConfig::default()
        }
    }

    #[test]
    fn splits_are_balanced_and_sound() {
        let data = build_dataset(&small()).unwrap();
        assert_eq!(data.samples.len(), 36);
        for split in Split::ALL {
            let st = &data.stats.splits[&split];
            assert_eq!(st.positives, st.negatives, "{split}");
        }
        for s in &data.samples {
            assert_eq!(s.difficulty.complexity, s.graph.len());
            assert_eq!(s.difficulty.ordering, s.graph.edges().len());
            assert_eq!(s.label, s.negative_kind.is_none());
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = build_dataset(&small()).unwrap();
        let b = build_dataset(&small()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn huge_pair_holdout_is_infeasible() {
        let cfg = GenConfig {
            holdout_pairs: 0.95,
            ..small()
        };
        assert!(matches!(build_dataset(&cfg), Err(Error::InfeasibleSplit(_))));
    }

    #[test]
    fn skewed_mix_is_long() {
        let cfg = GenConfig {
            difficulty: DifficultyMix::Skewed,
            train: 200,
            novel_tasks: 0,
            novel_steps: 0,
            abstraction: 0,
            ..small()
        };
        let data = build_dataset(&cfg).unwrap();
        let mean = data.stats.overall.mean_subtasks;
        assert!((mean - 4.6).abs() <= 1.0, "{mean}");
    }
}
