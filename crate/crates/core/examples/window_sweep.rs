//! Re-evaluates the same dataset at several segment window sizes.

use taskverify::datagen::{build_dataset, GenConfig};
use taskverify::eval::{sweep_window, write_sweep_csv, EvalOptions};
use taskverify::scorer::{OracleConfig, OracleScorer};
use taskverify::Lexicon;

fn main() -> taskverify::Result<()> {
    let dataset = build_dataset(&GenConfig::default())?;
    let lexicon = Lexicon::default();
    let ks = [10, 20, 30, 40];
    for noise in [0.0, 0.2] {
        let oracle = OracleScorer::new(
            OracleConfig {
                label_flip_noise: noise,
                ..OracleConfig::default()
            },
            &lexicon,
        )?;
        println!("# oracle noise {noise}");
        let sweep = sweep_window(&dataset.samples, &oracle, &ks, &EvalOptions::default())?;
        write_sweep_csv(&sweep, std::io::stdout().lock())?;
    }
    Ok(())
}
