//! Evaluates a scorer on every split and prints metrics broken down by split,
//! complexity and ordering.

use taskverify::datagen::{build_dataset, GenConfig};
use taskverify::eval::{evaluate, EvalOptions};
use taskverify::scorer::{OracleConfig, OracleScorer};
use taskverify::Lexicon;

fn main() -> taskverify::Result<()> {
    let dataset = build_dataset(&GenConfig::default())?;
    let lexicon = Lexicon::default();
    for noise in [0.0, 0.1, 0.3] {
        let oracle = OracleScorer::new(
            OracleConfig {
                label_flip_noise: noise,
                ..OracleConfig::default()
            },
            &lexicon,
        )?;
        let report = evaluate(&dataset.samples, &oracle, &EvalOptions::default())?;
        println!("oracle noise {noise}: f1 {:.3}", report.overall.f1);
        if noise > 0.0 {
            continue;
        }
        report.write_csv(std::io::stdout().lock())?;
    }
    Ok(())
}
