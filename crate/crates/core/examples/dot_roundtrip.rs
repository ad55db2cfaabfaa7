//! Reads a task graph in DOT form, writes it back, and shows that query
//! vocabulary checks differ between strict and lenient modes.

use taskverify::{graph_to_dot, parse_dot, VocabMode};

const DIAMOND: &str = "\
    Step 0: StateQuery(potato,hot)
    Step 1: StateQuery(potato,clean)
    Step 2: StateQuery(potato,sliced)
    Step 3: RelationQuery(potato,plate,in)
    Step 0 -> Step 1
    Step 0 -> Step 2
    Step 1 -> Step 3
    Step 2 -> Step 3
";

fn main() -> taskverify::Result<()> {
    let g = parse_dot(DIAMOND, VocabMode::Strict)?;
    let dot = graph_to_dot(&g);
    print!("{dot}");
    assert_eq!(parse_dot(&dot, VocabMode::Strict)?, g);

    let unusual = "Step 0: StateQuery(potato,glowing)";
    println!("\nlenient: {:?}", parse_dot(unusual, VocabMode::Lenient).map(|g| g.len()));
    println!("strict:  {:?}", parse_dot(unusual, VocabMode::Strict).map_err(|e| e.kind()));
    println!("cyclic:  {:?}", parse_dot("Step 0: StateQuery(a,hot)\nStep 1: StateQuery(a,cold)\nStep 0 -> Step 1\nStep 1 -> Step 0", VocabMode::Lenient).map_err(|e| e.kind()));
    Ok(())
}
