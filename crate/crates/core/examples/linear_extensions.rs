//! Enumerates the orders in which a partially ordered task may be carried out.

use taskverify::graph::{count_extensions, linear_extensions};
use taskverify::{parse_description, Lexicon};

fn main() -> taskverify::Result<()> {
    let lexicon = Lexicon::default();
    for text in [
        "potato is heated, then cleaned and sliced, then placed in a plate",
        "apple is heated, cleaned and sliced",
        "apple is heated, then cleaned in a sinkbasin",
    ] {
        let g = parse_description(text, &lexicon)?;
        let ext = linear_extensions(&g, 64)?;
        println!("{text}\n  {} extensions (exact count {})", ext.sequences.len(), count_extensions(&g)?);
        for seq in &ext.sequences {
            let names: Vec<String> = seq.iter().map(|&i| g.nodes()[i].to_string()).collect();
            println!("    {}", names.join(" -> "));
        }
    }

    // A wide antichain: enumeration stops at the cap, counting does not.
    let g = parse_description("apple is heated, cleaned, sliced and cooled", &lexicon)?;
    let capped = linear_extensions(&g, 10)?;
    println!(
        "antichain of {}: kept {} (truncated: {}), exact {}",
        g.len(),
        capped.sequences.len(),
        capped.truncated,
        count_extensions(&g)?
    );
    Ok(())
}
