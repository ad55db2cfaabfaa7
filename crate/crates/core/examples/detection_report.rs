//! Per-action query detection counts for a noisy oracle, judged on the
//! query-segment pairs the noiseless oracle aligns.

use taskverify::aligner::{segment, VerifyOptions};
use taskverify::datagen::{build_dataset, GenConfig};
use taskverify::scorer::{detection_report, OracleConfig, OracleScorer};
use taskverify::Lexicon;

fn main() -> taskverify::Result<()> {
    let lexicon = Lexicon::default();
    let dataset = build_dataset(&GenConfig::default())?;
    let items = dataset
        .samples
        .iter()
        .map(|s| Ok((s.graph.clone(), segment(&s.trace, 20)?)))
        .collect::<taskverify::Result<Vec<_>>>()?;
    let truth = OracleScorer::noiseless(&lexicon);
    let noisy = OracleScorer::new(
        OracleConfig {
            label_flip_noise: 0.1,
            seed: 3,
            ..OracleConfig::default()
        },
        &lexicon,
    )?;
    let report = detection_report(&items, &noisy, &truth, 0.5, &VerifyOptions::default())?;
    println!("{} pairs, {} samples skipped", report.pairs(), report.skipped);
    report.write_csv(std::io::stdout().lock())?;
    Ok(())
}
