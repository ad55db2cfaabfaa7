//! Trains one scorer per query family on the same data and compares them.
//! State and relation queries describe outcomes; action queries name the
//! sub-task itself.

use taskverify::datagen::{GenConfig, Generator, Split};
use taskverify::eval::{evaluate, EvalOptions};
use taskverify::scorer::{prepare_examples, train, TrainConfig};
use taskverify::semparse::TemplateSet;
use taskverify::{Lexicon, QueryScheme};

fn main() -> taskverify::Result<()> {
    let lexicon = Lexicon::default();
    let config = GenConfig {
        train: 500,
        novel_tasks: 200,
        ..GenConfig::default()
    };
    let generator = Generator::new(config.clone(), lexicon.clone(), TemplateSet::default())?;
    let train_set = generator.samples(Split::Train, config.train, 0)?;
    let novel = generator.samples(Split::NovelTasks, config.novel_tasks, 0)?;
    let train_config = TrainConfig::default();

    for scheme in [QueryScheme::StateRelation, QueryScheme::Action] {
        let examples = prepare_examples(
            train_set.iter().map(|s| (&s.graph, &s.trace, s.label)),
            20,
            scheme,
            &lexicon,
            train_config.extension_cap,
        )?;
        let init = train_config.initial_scorer(lexicon.tokens(), config.trace.dim)?;
        let (scorer, report) = train(&examples, init, &train_config)?;
        let opts = EvalOptions {
            scheme,
            ..EvalOptions::default()
        };
        let metrics = evaluate(&novel, &scorer, &opts)?;
        println!(
            "{scheme:?}: final loss {:.4}, novel_tasks f1 {:.3}",
            report.epoch_losses.last().copied().unwrap_or(f64::NAN),
            metrics.overall.f1
        );
    }
    Ok(())
}
