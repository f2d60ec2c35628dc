//! Maximal well-constrained parts, the greedy baseline, and the part checks.

use witness_resolve::{
    detect_maximal_well_parts, greedy_well_baseline, is_induced_well, is_part_well, parse_model,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["fig1_row2", "greedy_well_trap", "crank_analog"] {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let m = parse_model(&std::fs::read_to_string(path)?)?;
        println!("{name}");
        for p in detect_maximal_well_parts(&m)? {
            println!(
                "  part {}: {:?} well={} induced-well={}",
                p.rank_order,
                p.entities.iter().map(|e| e.as_str()).collect::<Vec<_>>(),
                is_part_well(&m, &p.entities)?,
                is_induced_well(&m, &p.entities)?,
            );
        }
        for p in greedy_well_baseline(&m)? {
            println!(
                "  greedy {}: {:?}",
                p.rank_order,
                p.entities.iter().map(|e| e.as_str()).collect::<Vec<_>>()
            );
        }
    }
    Ok(())
}
