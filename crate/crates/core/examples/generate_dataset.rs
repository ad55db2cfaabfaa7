//! Builds the synthetic benchmark and writes it to a directory.
//!
//! `cargo run --release --example generate_dataset -- [out_dir] [seed]`

use std::path::PathBuf;

use taskverify::datagen::{build_dataset, DifficultyMix, GenConfig};

fn main() -> taskverify::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("taskverify-data"));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let config = GenConfig {
        seed,
        difficulty: DifficultyMix::Skewed,
        ..GenConfig::default()
    };
    let dataset = build_dataset(&config)?;
    dataset.write(&out)?;
    println!("wrote {} samples to {}", dataset.samples.len(), out.display());
    println!("held-out signatures: {}", dataset.stats.heldout_signatures.join(", "));
    println!("held-out pairs: {}", dataset.stats.heldout_pairs.join(", "));
    for (split, s) in &dataset.stats.splits {
        println!(
            "{split:<12} n={:<4} pos={:<4} complexity {:.2} ordering {:.2} extensions {:.2} frames {:.0}",
            s.samples, s.positives, s.mean_subtasks, s.mean_ordering, s.mean_extensions, s.mean_frames
        );
    }
    if let Some(first) = dataset.samples.first() {
        println!("\nfirst sample: {} [{}]\n{}", first.description, first.task, first.graph);
    }
    Ok(())
}
