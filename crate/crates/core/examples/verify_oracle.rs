//! Verifies generated traces against their descriptions with the oracle
//! scorer, then against a reordered description of the same trace.

use taskverify::aligner::{segment, verify, VerifyOptions};
use taskverify::datagen::{GenConfig, Generator, NegativeKind, Split};
use taskverify::semparse::TemplateSet;
use taskverify::{Lexicon, OracleScorer};

fn main() -> taskverify::Result<()> {
    let lexicon = Lexicon::default();
    let generator = Generator::new(GenConfig::default(), lexicon.clone(), TemplateSet::default())?;
    let oracle = OracleScorer::noiseless(&lexicon);
    let opts = VerifyOptions::default();

    let positive = generator.positive(Split::Train, 3)?;
    let mut rng = taskverify::seeds::rng(1, "example");
    let negative = generator.make_negative(&positive, NegativeKind::Reordered, &mut rng)?;
    for sample in [&positive, &negative] {
        let trace = segment(&sample.trace, 20)?;
        let v = verify(&sample.graph, &trace, &oracle, &opts)?;
        println!("{}", sample.description);
        println!(
            "  {} frames, {} segments, p = {:.4} -> {} (expected {})",
            sample.trace.len(),
            trace.len(),
            v.probability,
            v.label,
            sample.label
        );
        println!("  best order {:?}, pairs {:?}", v.best_extension, v.node_pairs());
    }
    Ok(())
}
