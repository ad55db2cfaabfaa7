//! Trains the parametric scorer on a synthetic train split and reports F1 on
//! held-out samples from the same distribution and on novel tasks, then saves
//! a checkpoint.
//!
//! `cargo run --release --example train_scorer -- [seed] [shuffle]`
//!
//! Passing `shuffle` permutes the training labels first, a control that
//! should learn nothing transferable.

use std::time::Instant;

use rand::seq::SliceRandom;

use taskverify::datagen::{GenConfig, Generator, Split};
use taskverify::eval::{evaluate, EvalOptions};
use taskverify::scorer::{prepare_examples, train, TrainConfig};
use taskverify::semparse::TemplateSet;
use taskverify::{Lexicon, QueryScheme};

fn main() -> taskverify::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed = args.first().and_then(|s| s.parse().ok()).unwrap_or(0);
    let shuffle = args.get(1).is_some_and(|a| a == "shuffle");

    let config = GenConfig {
        seed,
        train: 500,
        novel_tasks: 200,
        ..GenConfig::default()
    };
    let lexicon = Lexicon::default();
    let generator = Generator::new(config.clone(), lexicon.clone(), TemplateSet::default())?;
    let train_set = generator.samples(Split::Train, config.train, 0)?;
    // A second salt draws fresh samples from the training distribution.
    let held_out = generator.samples(Split::Train, 200, 1)?;
    let novel = generator.samples(Split::NovelTasks, config.novel_tasks, 0)?;

    let mut labels: Vec<bool> = train_set.iter().map(|s| s.label).collect();
    if shuffle {
        labels.shuffle(&mut taskverify::seeds::rng(seed, "label-shuffle"));
        println!("training on shuffled labels");
    }
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let examples = prepare_examples(
        train_set.iter().zip(&labels).map(|(s, &l)| (&s.graph, &s.trace, l)),
        20,
        QueryScheme::StateRelation,
        &lexicon,
        cfg.extension_cap,
    )?;
    let started = Instant::now();
    let init = cfg.initial_scorer(lexicon.tokens(), config.trace.dim)?;
    let (scorer, report) = train(&examples, init, &cfg)?;
    println!("{} steps in {:.1?}", report.steps, started.elapsed());
    for (i, l) in report.epoch_losses.iter().enumerate().step_by(10) {
        println!("  epoch {i:>3}  loss {l:.4}");
    }

    let opts = EvalOptions::default();
    for (name, set) in [("train", &train_set), ("held-out", &held_out), ("novel_tasks", &novel)] {
        let r = evaluate(set, &scorer, &opts)?;
        println!(
            "{name:<12} accuracy {:.3}  f1 {:.3}  precision {:.3}  recall {:.3}",
            r.overall.accuracy, r.overall.f1, r.overall.precision, r.overall.recall
        );
    }
    let path = std::env::temp_dir().join("taskverify-scorer.json");
    scorer.save(&path)?;
    println!("checkpoint: {}", path.display());
    Ok(())
}
