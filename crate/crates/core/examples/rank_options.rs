//! Resolution options with their type precedence and change-rate score.

use witness_resolve::prioritizer::Mode;
use witness_resolve::{
    detect_maximal_well_parts, detect_minimal_over_parts, over_options, parse_model, prioritize,
    under_options, Model,
};

fn load(name: &str) -> Result<Model, Box<dyn std::error::Error>> {
    let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    Ok(parse_model(&std::fs::read_to_string(path)?)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = load("fig1_row3")?;
    let part = &detect_minimal_over_parts(&m)?[0];
    println!("removals for the row-3 dependency");
    for o in prioritize(&m, over_options(&m, part)?, Mode::Over)? {
        println!(
            "  {:<28} precedence {} rate {:.4}",
            o.describe(),
            o.precedence,
            o.score.unwrap_or(f64::NAN)
        );
    }

    let m = load("crank_analog")?;
    let parts = detect_maximal_well_parts(&m)?;
    println!("additions bridging the two largest crank parts");
    for o in prioritize(&m, under_options(&m, &parts[0], &parts[1])?, Mode::Under)?
        .iter()
        .take(8)
    {
        println!(
            "  {:<28} precedence {} rate {:.4}",
            o.describe(),
            o.precedence,
            o.score.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
