//! Turns natural-language task descriptions into task graphs.
//!
//! `cargo run --example parse_description -- "apple is heated, then cleaned in a sinkbasin"`

use taskverify::{graph_to_dot, parse_description, Lexicon};

fn main() -> taskverify::Result<()> {
    let lexicon = Lexicon::default();
    let given: Vec<String> = std::env::args().skip(1).collect();
    let texts = if given.is_empty() {
        vec![
            "apple is heated, then cleaned in a sinkbasin".to_string(),
            "tomato is heated in a microwave and sliced with a knife, then placed in a plate".to_string(),
            "book is picked up, then placed on a shelf".to_string(),
        ]
    } else {
        given
    };
    for text in texts {
        println!("# {text}");
        match parse_description(&text, &lexicon) {
            Ok(g) => println!("{}", graph_to_dot(&g)),
            Err(e) => println!("error: {}: {e}\n", e.kind()),
        }
    }
    Ok(())
}
