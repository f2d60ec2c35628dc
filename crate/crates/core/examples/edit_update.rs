//! Direct edit: move geometry, bring the constraint system up to date, and
//! look at what changed.

use witness_resolve::{classify, parse_model, update_gcs_after_edit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = env!("CARGO_MANIFEST_DIR");
    for row in ["fig1_row1", "fig1_row2", "fig1_row3"] {
        let pre = parse_model(&std::fs::read_to_string(format!(
            "{dir}/fixtures/{row}_pre.json"
        ))?)?;
        let edited = parse_model(&std::fs::read_to_string(format!(
            "{dir}/fixtures/{row}.json"
        ))?)?;
        let post = update_gcs_after_edit(&pre, edited.entities().to_vec())?;
        println!(
            "{row}: {} -> {} constraints, {}",
            pre.constraints().len(),
            post.constraints().len(),
            classify(&post)?.label()
        );
        for c in pre.constraints() {
            match post.constraint(&c.id) {
                None => println!("  dropped {}", c.id),
                Some(n) if n.kind != c.kind => println!("  {} became {}", c.id, n.kind.name()),
                Some(n) if n.parameter != c.parameter => {
                    println!(
                        "  {} re-measured {:?} -> {:?}",
                        c.id, c.parameter, n.parameter
                    )
                }
                _ => {}
            }
        }
    }
    Ok(())
}
