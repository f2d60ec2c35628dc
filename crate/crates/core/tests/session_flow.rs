mod common;

use witness_resolve::session::{journal_from_jsonl, journal_to_jsonl};
use witness_resolve::*;

use common::{fixture, FIXTURES};

/// Removals within the over phase are bounded by the initial `over_dim`,
/// additions by the `under_dim` left when the over phase ends. A removed
/// multi-row constraint can raise `under_dim` (only one of its rows may be
/// redundant), so the bound is checked per phase.
#[test]
fn auto_resolve_stays_within_the_acceptance_bound() {
    for name in FIXTURES {
        let m = fixture(name);
        let state = classify(&m).unwrap();
        let mut s = Session::start(m).unwrap();
        s.auto_resolve().unwrap();
        assert_eq!(s.phase(), Phase::WellDone);
        let accepted: Vec<&JournalEntry> = s
            .journal()
            .iter()
            .filter(|e| e.verdict == Verdict::Accepted)
            .collect();
        let removals = accepted
            .iter()
            .filter(|e| e.action.as_deref() == Some("remove"))
            .count();
        assert!(
            removals <= state.over_dim,
            "{name}: {removals} removals, over_dim {}",
            state.over_dim
        );
        let additions = &accepted[removals..];
        assert!(
            additions.iter().all(|e| e.action.as_deref() == Some("add")),
            "{name}: phases interleave"
        );
        if let Some(first) = additions.first() {
            let under = first.pre_state.under_dim;
            assert!(
                additions.len() <= under,
                "{name}: {} additions, under_dim {under}",
                additions.len()
            );
        }
    }
}

#[test]
fn journal_survives_jsonl_and_replays() {
    let m = fixture("fig1_row3");
    let mut s = Session::start(m.clone()).unwrap();
    let first = s.presentation().options[1].id.clone();
    s.reject(&first).unwrap();
    s.undo().unwrap();
    s.auto_resolve().unwrap();
    let text = journal_to_jsonl(s.journal());
    assert_eq!(text.lines().count(), s.journal().len());
    let back = journal_from_jsonl(&text).unwrap();
    assert_eq!(back, s.journal());
    assert_eq!(
        serialize_model(&replay(&m, &back).unwrap()),
        s.current_document()
    );
}

#[test]
fn tampered_journal_is_refused() {
    let m = fixture("fig1_row3");
    let mut s = Session::start(m.clone()).unwrap();
    let top = s.presentation().top.clone().unwrap();
    s.accept(&top).unwrap();
    let mut journal = s.journal().to_vec();
    journal[0].pre_state.over_dim = 7;
    assert!(matches!(replay(&m, &journal), Err(Error::Journal(_))));
    assert!(matches!(
        journal_from_jsonl("{not json"),
        Err(Error::Journal(_))
    ));
}

#[test]
fn option_lookup_errors() {
    let mut s = Session::start(fixture("fig1_row3")).unwrap();
    assert!(matches!(
        s.accept("0000000000000000"),
        Err(Error::UnknownOption(_))
    ));
    let ids: Vec<String> = s
        .presentation()
        .options
        .iter()
        .map(|o| o.id.clone())
        .collect();
    s.reject(&ids[0]).unwrap();
    assert!(matches!(s.accept(&ids[0]), Err(Error::StaleOption(_))));
    assert!(matches!(
        Session::start(fixture("fig1_row1")).unwrap().step(),
        Err(Error::AlreadyWell)
    ));
    assert!(matches!(
        Session::start(fixture("fig1_row1")).unwrap().undo(),
        Err(Error::EmptyUndo)
    ));
}

#[test]
fn forced_option_cannot_be_rejected() {
    let mut s = Session::start(fixture("duplicate_perpendicular")).unwrap();
    while s.presentation().options.len() > 1 {
        let id = s.presentation().options[0].id.clone();
        s.reject(&id).unwrap();
    }
    assert!(s.presentation().forced);
    let last = s.presentation().options[0].id.clone();
    assert!(matches!(s.reject(&last), Err(Error::ForcedRemoval(_))));
    s.accept(&last).unwrap();
}

#[test]
fn undo_walks_back_to_the_start() {
    let m = fixture("crank_analog");
    let mut s = Session::start(m.clone()).unwrap();
    let start = s.presentation().clone();
    s.auto_resolve().unwrap();
    while s.can_undo() {
        s.undo().unwrap();
    }
    assert_eq!(s.current(), &m);
    assert_eq!(s.presentation(), &start);
    assert_eq!(
        serialize_model(&replay(&m, s.journal()).unwrap()),
        serialize_model(&m)
    );
}

#[test]
fn update_rules_reproduce_the_edited_fixtures() {
    for row in ["fig1_row1", "fig1_row2", "fig1_row3"] {
        let pre = fixture(&format!("{row}_pre"));
        let post = fixture(row);
        let updated = update_gcs_after_edit(&pre, post.entities().to_vec()).unwrap();
        assert_eq!(serialize_model(&updated), serialize_model(&post), "{row}");
    }
}
