//! A scripted resolution session: reject, undo, accept, then let the
//! session finish on its own and print the journal.

use witness_resolve::session::journal_to_jsonl;
use witness_resolve::{parse_model, replay, serialize_model, Session};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = format!("{}/fixtures/fig1_row3.json", env!("CARGO_MANIFEST_DIR"));
    let m = parse_model(&std::fs::read_to_string(path)?)?;
    let mut s = Session::start(m.clone())?;

    let p = s.presentation();
    println!("{:?}: {}", p.phase, p.state.label());
    for o in &p.options {
        println!("  {} {}", o.id, o.describe());
    }
    let second = p.options[1].id.clone();
    s.reject(&second)?;
    println!("after reject: {} options", s.presentation().options.len());
    s.undo()?;
    let top = s
        .presentation()
        .top
        .clone()
        .expect("over phase has options");
    s.accept(&top)?;
    println!("after accept: {}", s.presentation().state.label());

    s.auto_resolve()?;
    println!("finished: {}", s.presentation().state.label());
    print!("{}", journal_to_jsonl(s.journal()));
    assert_eq!(
        serialize_model(&replay(&m, s.journal())?),
        s.current_document()
    );
    Ok(())
}
