//! Graph edit distance between parsed descriptions and their ground truth.

use taskverify::datagen::{build_dataset, GenConfig, Split};
use taskverify::{ged, parse_description, Lexicon};

fn main() -> taskverify::Result<()> {
    let lexicon = Lexicon::default();
    let a = parse_description("apple is heated, then cleaned", &lexicon)?;
    let b = parse_description("apple is cleaned, then heated", &lexicon)?;
    let c = parse_description("apple is heated and cleaned", &lexicon)?;
    println!("reversed edge: {}", ged(&a, &b)?);
    println!("dropped edge:  {}", ged(&a, &c)?);

    // Every generated description should parse back to its own graph.
    let dataset = build_dataset(&GenConfig {
        train: 200,
        ..GenConfig::default()
    })?;
    let mut total = 0;
    let mut n = 0;
    for s in dataset.samples.iter().filter(|s| s.split != Split::Abstraction) {
        total += ged(&parse_description(&s.description, &lexicon)?, &s.graph)?;
        n += 1;
    }
    println!("mean distance over {n} generated descriptions: {:.3}", total as f64 / n as f64);
    Ok(())
}
