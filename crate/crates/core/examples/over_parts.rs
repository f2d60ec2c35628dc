//! Minimal over-constrained parts next to the greedy baseline.

use witness_resolve::{detect_minimal_over_parts, greedy_over_baseline, parse_model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["fig1_row3", "duplicate_perpendicular", "bracket"] {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let m = parse_model(&std::fs::read_to_string(path)?)?;
        println!("{name}");
        for p in detect_minimal_over_parts(&m)? {
            println!(
                "  minimal  {:?}",
                p.constraints.iter().map(|c| c.as_str()).collect::<Vec<_>>()
            );
        }
        for p in greedy_over_baseline(&m, None)? {
            println!(
                "  greedy   {:?}",
                p.constraints.iter().map(|c| c.as_str()).collect::<Vec<_>>()
            );
        }
    }
    Ok(())
}
