//! Neuro-symbolic task verification.
//!
//! A natural-language task description is parsed into a DAG of symbolic
//! queries ([`semparse`]). Every linear extension of that DAG is aligned to
//! the segments of an observed trace by dynamic programming ([`aligner`]),
//! with per-pair probabilities supplied by a [`scorer::Scorer`]. The best
//! aligned score decides whether the trace carries out the task.
//!
//! [`datagen`] produces synthetic benchmark data with controlled splits and
//! difficulty, and [`eval`] measures accuracy, F1 and detection quality.

pub mod aligner;
pub mod cli;
pub mod datagen;
pub mod dsl;
pub mod error;
pub mod eval;
pub mod graph;
pub mod lexicon;
pub mod scorer;
pub mod seeds;
pub mod semparse;
pub mod trace;

pub use aligner::{align_bruteforce, align_dp, segment, verify, Alignment, ScoreMatrix, Verdict, VerifyOptions};
pub use dsl::{graph_to_dot, parse_dot, parse_query, Action, Query, QueryScheme, QueryType, TaskGraph, VocabMode};
pub use error::{Error, Result};
pub use graph::{count_extensions, linear_extensions};
pub use lexicon::Lexicon;
pub use scorer::{OracleScorer, ParametricScorer, Scorer};
pub use semparse::{ged, parse_description, DescriptionParser};
pub use trace::{Event, Trace};
