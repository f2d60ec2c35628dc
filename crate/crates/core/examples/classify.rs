//! Classifies a model document: `cargo run --example classify -- path.json`.
//! Without an argument the three block fixtures (before and after edits) are used.

use witness_resolve::{classify, parse_model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let paths: Vec<String> = match std::env::args().nth(1) {
        Some(p) => vec![p],
        None => ["fig1_row1", "fig1_row2", "fig1_row3"]
            .iter()
            .map(|n| format!("{}/fixtures/{n}.json", env!("CARGO_MANIFEST_DIR")))
            .collect(),
    };
    for path in paths {
        let m = parse_model(&std::fs::read_to_string(&path)?)?;
        let s = classify(&m)?;
        println!(
            "{path}: {} (over_dim {}, under_dim {})",
            s.label(),
            s.over_dim,
            s.under_dim
        );
    }
    Ok(())
}
