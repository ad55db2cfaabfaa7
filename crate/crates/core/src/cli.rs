//! Command-line front end. Exit codes: 0 verified or success, 1 not
//! verified, 2 any error. Errors are reported on stderr as a single line
//! `error: <Kind>: <message>`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use serde_json::json;

use crate::aligner::{
    align_dp, default_threshold, node_scores, read_score_csv, segment, verify_with_scores,
    write_alignment_csv, VerifyOptions, DEFAULT_WINDOW,
};
use crate::datagen::{
    read_samples, DifficultyMix, GenConfig, Generator, NegativeKind, Sample, Split, TraceConfig,
};
use crate::dsl::{graph_to_dot, parse_dot, QueryScheme, TaskGraph, VocabMode};
use crate::error::{Error, Result};
use crate::eval::{evaluate, sweep_window, write_sweep_csv, EvalOptions};
use crate::graph::{self, DEFAULT_EXTENSION_CAP};
use crate::lexicon::Lexicon;
use crate::scorer::{
    detection_report, prepare_examples, train, OracleConfig, OracleScorer, ParametricScorer,
    Scorer, TrainConfig,
};
use crate::semparse::{ged, DescriptionParser, TemplateSet};
use crate::seeds;
use crate::trace::Trace;

#[derive(Debug, Parser)]
#[command(name = "taskverify", version, about = "Verify task descriptions against activity traces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Decision threshold on the verification probability [default: 1/3].
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Frames per segment.
    #[arg(long, global = true, default_value_t = DEFAULT_WINDOW)]
    pub window_k: usize,
    /// Maximum linear extensions enumerated per graph.
    #[arg(long, global = true, default_value_t = DEFAULT_EXTENSION_CAP)]
    pub extension_cap: usize,
    /// Reject identifiers outside the lexicon when reading graphs and text.
    #[arg(long, global = true)]
    pub strict_vocab: bool,
}

impl GlobalArgs {
    fn validate(&self) -> Result<()> {
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("--threshold must lie in (0, 1), got {t}")));
            }
        }
        if self.window_k == 0 {
            return Err(Error::Config("--window-k must be positive".into()));
        }
        if self.extension_cap == 0 {
            return Err(Error::Config("--extension-cap must be positive".into()));
        }
        Ok(())
    }

    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            threshold: self.threshold.unwrap_or_else(default_threshold),
            extension_cap: self.extension_cap,
        }
    }

    fn vocab_mode(&self) -> VocabMode {
        if self.strict_vocab {
            VocabMode::Strict
        } else {
            VocabMode::Lenient
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    StateRelation,
    Action,
}

impl From<SchemeArg> for QueryScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::StateRelation => QueryScheme::StateRelation,
            SchemeArg::Action => QueryScheme::Action,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MixArg {
    Uniform,
    Skewed,
}

#[derive(Debug, Clone, Args)]
pub struct ScorerArgs {
    /// `oracle`, or the path of a trained scorer checkpoint.
    #[arg(long, default_value = "oracle")]
    pub scorer: String,
    /// Flip probability of the oracle scorer.
    #[arg(long, default_value_t = 0.0)]
    pub oracle_noise: f64,
    /// Query family used for verification.
    #[arg(long, value_enum, default_value_t = SchemeArg::StateRelation)]
    pub scheme: SchemeArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (dataset.jsonl and stats.json).
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        train: usize,
        #[arg(long, default_value_t = 100)]
        novel_tasks: usize,
        #[arg(long, default_value_t = 100)]
        novel_steps: usize,
        #[arg(long, default_value_t = 100)]
        abstraction: usize,
        #[arg(long, value_enum, default_value_t = MixArg::Uniform)]
        difficulty: MixArg,
        #[arg(long, default_value_t = 6)]
        max_complexity: usize,
        #[arg(long, default_value_t = 5)]
        max_ordering: usize,
        /// Fraction of multi-step task signatures held out for novel_tasks.
        #[arg(long, default_value_t = 0.2)]
        holdout_tasks: f64,
        /// Fraction of (action, object) pairs held out for novel_steps.
        #[arg(long, default_value_t = 0.15)]
        holdout_pairs: f64,
        /// Comma-separated negative kinds.
        #[arg(long, value_delimiter = ',')]
        negative_kinds: Option<Vec<String>>,
        /// Amplitude of the active feature channels.
        #[arg(long)]
        signal: Option<f64>,
    },
    /// Train the parametric scorer on a dataset split.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Checkpoint path to write.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "train")]
        split: String,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        /// Standard deviation of the initial weights.
        #[arg(long)]
        init_scale: Option<f64>,
        /// Permute the training labels (a no-signal control).
        #[arg(long)]
        shuffle_labels: bool,
        #[arg(long, value_enum, default_value_t = SchemeArg::StateRelation)]
        scheme: SchemeArg,
    },
    /// Verify one trace against one task graph.
    Verify {
        /// Task graph in DOT form.
        #[arg(long)]
        graph: PathBuf,
        /// Trace JSON, or a dataset sample carrying a `trace` field.
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        scorer: ScorerArgs,
        /// Write every extension's alignment as CSV here.
        #[arg(long)]
        alignment_out: Option<PathBuf>,
    },
    /// Evaluate a scorer on a dataset; prints metrics as JSON.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        scorer: ScorerArgs,
        /// Only evaluate this split.
        #[arg(long)]
        split: Option<String>,
        /// Write grouped metrics as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a description into a DOT task graph.
    Parse { text: String },
    /// Align a log-score matrix (CSV, one query per row).
    Align { scores: PathBuf },
    /// Graph edit distance between two DOT graphs.
    Ged { a: PathBuf, b: PathBuf },
    /// Re-evaluate at several window sizes; prints CSV.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
        ks: Vec<usize>,
    },
    /// Per-class query detection counts; prints CSV.
    Detect {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        scorer: ScorerArgs,
        /// Score threshold for a positive detection.
        #[arg(long, default_value_t = 0.5)]
        score_threshold: f64,
    },
}

/// Parses `args` (including the program name), runs the command, and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {message}", e.kind());
            2
        }
    }
}

/// Runs a parsed command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let g = &cli.global;
    g.validate()?;
    let lexicon = Lexicon::default();
    match &cli.command {
        Command::Generate {
            out: dir,
            train,
            novel_tasks,
            novel_steps,
            abstraction,
            difficulty,
            max_complexity,
            max_ordering,
            holdout_tasks,
            holdout_pairs,
            negative_kinds,
            signal,
        } => {
            let negative_kinds = match negative_kinds {
                Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<NegativeKind>>>()?,
                None => NegativeKind::ALL.to_vec(),
            };
            let config = GenConfig {
                seed: g.seed,
                train: *train,
                novel_tasks: *novel_tasks,
                novel_steps: *novel_steps,
                abstraction: *abstraction,
                difficulty: match difficulty {
                    MixArg::Uniform => DifficultyMix::Uniform,
                    MixArg::Skewed => DifficultyMix::Skewed,
                },
                max_complexity: *max_complexity,
                max_ordering: *max_ordering,
                holdout_tasks: *holdout_tasks,
                holdout_pairs: *holdout_pairs,
                negative_kinds,
                trace: TraceConfig {
                    signal: signal.unwrap_or(TraceConfig::default().signal),
                    ..TraceConfig::default()
                },
                extension_cap: g.extension_cap,
                ..GenConfig::default()
            };
            let dataset = Generator::new(config, lexicon, TemplateSet::default())?.build()?;
            dataset.write(dir)?;
            let splits: serde_json::Map<String, serde_json::Value> = dataset
                .stats
                .splits
                .iter()
                .map(|(s, st)| {
                    (
                        s.to_string(),
                        json!({"samples": st.samples, "positives": st.positives, "negatives": st.negatives}),
                    )
                })
                .collect();
            emit(out, &json!({"out": dir, "samples": dataset.samples.len(), "splits": splits}))?;
            Ok(0)
        }
        Command::Train {
            data,
            out: ckpt,
            split,
            epochs,
            lr,
            batch_size,
            init_scale,
            shuffle_labels,
            scheme,
        } => {
            let split: Split = split.parse()?;
            let samples: Vec<Sample> =
                read_samples(data)?.into_iter().filter(|s| s.split == split).collect();
            let Some(first) = samples.first() else {
                return Err(Error::EmptyDataset);
            };
            let dim = first.trace.frames.first().map_or(0, Vec::len);
            let mut labels: Vec<bool> = samples.iter().map(|s| s.label).collect();
            if *shuffle_labels {
                labels.shuffle(&mut seeds::rng(g.seed, "label-shuffle"));
            }
            let examples = prepare_examples(
                samples.iter().zip(&labels).map(|(s, &l)| (&s.graph, &s.trace, l)),
                g.window_k,
                (*scheme).into(),
                &lexicon,
                g.extension_cap,
            )?;
            let config = TrainConfig {
                lr: *lr,
                epochs: *epochs,
                batch_size: *batch_size,
                seed: g.seed,
                extension_cap: g.extension_cap,
                init_scale: init_scale.unwrap_or(TrainConfig::default().init_scale),
            };
            let init = config.initial_scorer(lexicon.tokens(), dim)?;
            let (params, report) = train(&examples, init, &config)?;
            params.save(ckpt)?;
            emit(
                out,
                &json!({
                    "checkpoint": ckpt,
                    "examples": examples.len(),
                    "steps": report.steps,
                    "epoch_losses": report.epoch_losses,
                }),
            )?;
            Ok(0)
        }
        Command::Verify {
            graph,
            trace,
            scorer,
            alignment_out,
        } => {
            let graph = read_graph(graph, g.vocab_mode())?;
            let graph = graph.to_scheme(scorer.scheme.into(), |r| lexicon.relation_of(r));
            let trace = read_trace(trace)?;
            let segmented = segment(&trace, g.window_k)?;
            let scorer = load_scorer(scorer, &lexicon, g.seed)?;
            let opts = g.verify_options();
            if graph.len() > segmented.len() {
                return Err(Error::TooFewSegments {
                    queries: graph.len(),
                    segments: segmented.len(),
                });
            }
            let scores = node_scores(&graph, &segmented, scorer.as_ref())?;
            let extensions = graph::linear_extensions(&graph, opts.extension_cap)?;
            let verdict = verify_with_scores(&scores, extensions, &opts)?;
            if let Some(path) = alignment_out {
                write_alignment_csv(&verdict, &scores, std::fs::File::create(path)?)?;
            }
            emit(
                out,
                &json!({
                    "probability": verdict.probability,
                    "label": verdict.label,
                    "threshold": opts.threshold,
                    "best_extension": verdict.best_extension,
                    "alignment": verdict.node_pairs(),
                    "score": verdict.best_alignment.score,
                    "truncated": verdict.truncated,
                    "alignment_csv": alignment_out,
                }),
            )?;
            Ok(if verdict.label { 0 } else { 1 })
        }
        Command::Evaluate {
            data,
            scorer,
            split,
            out: csv_out,
        } => {
            let samples = load_split(data, split.as_deref())?;
            let scorer_impl = load_scorer(scorer, &lexicon, g.seed)?;
            let opts = eval_options(g, scorer);
            let report = evaluate(&samples, scorer_impl.as_ref(), &opts)?;
            if let Some(path) = csv_out {
                report.write_csv(std::fs::File::create(path)?)?;
            }
            emit(out, &report)?;
            Ok(0)
        }
        Command::Parse { text } => {
            let parser = DescriptionParser::new(TemplateSet::default(), lexicon, g.vocab_mode())?;
            write!(out, "{}", graph_to_dot(&parser.parse(text)?))?;
            Ok(0)
        }
        Command::Align { scores } => {
            let matrix = read_score_csv(std::fs::File::open(scores)?)?;
            let alignment = align_dp(&matrix)?;
            let pairs: Vec<(usize, usize)> = alignment.pairs().collect();
            emit(out, &json!({"pairs": pairs, "score": alignment.score}))?;
            Ok(0)
        }
        Command::Ged { a, b } => {
            let (a, b) = (read_graph(a, g.vocab_mode())?, read_graph(b, g.vocab_mode())?);
            writeln!(out, "{}", ged(&a, &b)?)?;
            Ok(0)
        }
        Command::Sweep { data, scorer, ks } => {
            if ks.is_empty() || ks.contains(&0) {
                return Err(Error::Config("--ks must list positive window sizes".into()));
            }
            let samples = read_samples(data)?;
            let scorer_impl = load_scorer(scorer, &lexicon, g.seed)?;
            let sweep = sweep_window(&samples, scorer_impl.as_ref(), ks, &eval_options(g, scorer))?;
            write_sweep_csv(&sweep, &mut *out)?;
            Ok(0)
        }
        Command::Detect {
            data,
            scorer,
            score_threshold,
        } => {
            if !(*score_threshold > 0.0 && *score_threshold < 1.0) {
                return Err(Error::Config("--score-threshold must lie in (0, 1)".into()));
            }
            let samples = read_samples(data)?;
            let scheme: QueryScheme = scorer.scheme.into();
            let items = samples
                .iter()
                .map(|s| {
                    let graph = s.graph.to_scheme(scheme, |r| lexicon.relation_of(r));
                    Ok((graph, segment(&s.trace, g.window_k)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let scorer_impl = load_scorer(scorer, &lexicon, g.seed)?;
            let truth = OracleScorer::noiseless(&lexicon);
            let report = detection_report(
                &items,
                scorer_impl.as_ref(),
                &truth,
                *score_threshold,
                &g.verify_options(),
            )?;
            report.write_csv(&mut *out)?;
            Ok(0)
        }
    }
}

fn emit(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn eval_options(g: &GlobalArgs, scorer: &ScorerArgs) -> EvalOptions {
    EvalOptions {
        verify: g.verify_options(),
        window: g.window_k,
        scheme: scorer.scheme.into(),
    }
}

fn read_graph(path: &Path, mode: VocabMode) -> Result<TaskGraph> {
    parse_dot(&std::fs::read_to_string(path)?, mode)
}

fn read_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(text.trim())?;
    match value.get("trace") {
        Some(inner) => Ok(serde_json::from_value(inner.clone())?),
        None => Ok(serde_json::from_value(value)?),
    }
}

fn load_split(data: &Path, split: Option<&str>) -> Result<Vec<Sample>> {
    let samples = read_samples(data)?;
    match split {
        None => Ok(samples),
        Some(name) => {
            let split: Split = name.parse()?;
            Ok(samples.into_iter().filter(|s| s.split == split).collect())
        }
    }
}

fn load_scorer(args: &ScorerArgs, lexicon: &Lexicon, seed: u64) -> Result<Box<dyn Scorer>> {
    if args.scorer == "oracle" {
        let config = OracleConfig {
            label_flip_noise: args.oracle_noise,
            seed,
            ..OracleConfig::default()
        };
        Ok(Box::new(OracleScorer::new(config, lexicon)?))
    } else {
        Ok(Box::new(ParametricScorer::load(Path::new(&args.scorer), None)?))
    }
}
