//! Interactive resolution workflow.
//!
//! A session repeatedly analyses its current model, picks the inconsistency
//! to work on (over-constraint first, one part at a time; then the two
//! largest well-constrained parts), and presents ranked options. Each accept
//! or reject is journaled and can be undone.

use std::collections::{HashMap, HashSet};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::analyzer::{analyze, classify, ConstraintState};
use crate::error::{Error, Result};
use crate::model::{serialize_model, Constraint, Model};
use crate::options::{
    intrinsic_options, over_options, under_options, Action, ResolutionOption, Target,
};
use crate::over::{self, OverPart};
use crate::prioritizer::{prioritize, Mode};
use crate::well::{self, WellPart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    OverResolution,
    UnderResolution,
    WellDone,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Presentation {
    pub phase: Phase,
    pub state: ConstraintState,
    pub over_parts: Vec<OverPart>,
    pub well_parts: Vec<WellPart>,
    /// Ranked options; the first one is the suggestion.
    pub options: Vec<ResolutionOption>,
    /// Id of the top-ranked option.
    pub top: Option<String>,
    /// The only remaining option of a minimal over-constrained part: it
    /// cannot be rejected.
    pub forced: bool,
}

impl Presentation {
    pub fn option(&self, id: &str) -> Option<&ResolutionOption> {
        self.options.iter().find(|o| o.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Rejected,
    Undone,
}

/// One journaled decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub seq: usize,
    /// `remove` or `add`; absent for undo entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    /// The constraint removed or added (with its assigned id).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Constraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option: Option<String>,
    pub verdict: Verdict,
    pub pre_state: ConstraintState,
    pub post_state: ConstraintState,
    pub timestamp_ms: u64,
}

/// Journal as JSON lines, one decision per line.
pub fn journal_to_jsonl(entries: &[JournalEntry]) -> String {
    entries
        .iter()
        .map(|e| serde_json::to_string(e).expect("journal entries serialise") + "\n")
        .collect()
}

pub fn journal_from_jsonl(text: &str) -> Result<Vec<JournalEntry>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Journal(e.to_string())))
        .collect()
}

/// Rebuilds the model a journal leads to from `initial`.
pub fn replay(initial: &Model, journal: &[JournalEntry]) -> Result<Model> {
    let mut current = initial.clone();
    let mut stack: Vec<Model> = Vec::new();
    for e in journal {
        let fail = |what: &str| Error::Journal(format!("entry {}: {what}", e.seq));
        if e.verdict != Verdict::Undone && classify(&current)? != e.pre_state {
            return Err(fail("state before the decision does not match"));
        }
        match e.verdict {
            Verdict::Accepted => {
                let c = e
                    .constraint
                    .clone()
                    .ok_or_else(|| fail("accepted entry without constraint"))?;
                let next = match e.action.as_deref() {
                    Some("remove") => current.without_constraint(&c.id)?,
                    Some("add") => current.with_constraint(c)?,
                    _ => return Err(fail("unknown action")),
                };
                stack.push(std::mem::replace(&mut current, next));
            }
            Verdict::Rejected => stack.push(current.clone()),
            Verdict::Undone => {
                current = stack.pop().ok_or_else(|| fail("undo with empty history"))?
            }
        }
        if classify(&current)? != e.post_state {
            return Err(fail("state after the decision does not match"));
        }
    }
    Ok(current)
}

#[derive(Debug, Clone)]
struct Snapshot {
    model: Model,
    next_id: usize,
    rejected: HashMap<String, HashSet<String>>,
    presentation: Presentation,
}

#[derive(Debug, Clone)]
pub struct Session {
    initial: Model,
    current: Model,
    next_id: usize,
    presentation: Presentation,
    /// Rejected option ids keyed by the part or part pair they address.
    rejected: HashMap<String, HashSet<String>>,
    /// Every option id ever presented.
    seen: HashSet<String>,
    undo: Vec<Snapshot>,
    journal: Vec<JournalEntry>,
}

fn context_key(t: &Target) -> String {
    let join = |v: &[String]| v.join(",");
    match t {
        Target::Over { constraints } => {
            let mut ids: Vec<String> = constraints.iter().map(|c| c.0.clone()).collect();
            ids.sort();
            format!("over:{}", join(&ids))
        }
        Target::Under { first, second } => {
            let side = |v: &[crate::model::EntityId]| {
                let mut ids: Vec<String> = v.iter().map(|c| c.0.clone()).collect();
                ids.sort();
                join(&ids)
            };
            let (a, b) = (side(first), side(second));
            if a <= b {
                format!("under:{a}|{b}")
            } else {
                format!("under:{b}|{a}")
            }
        }
    }
}

/// Upper bound on acceptances tried by [`Session::auto_resolve`].
const AUTO_BUDGET: usize = 2_000;

fn first_free_number(m: &Model) -> usize {
    m.constraints()
        .iter()
        .filter_map(|c| c.id.as_str().strip_prefix('C')?.parse::<usize>().ok())
        .max()
        .map_or(1, |n| n + 1)
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl Session {
    /// Opens a session on a witness-valid model.
    pub fn start(m: Model) -> Result<Self> {
        analyze(&m)?;
        let next_id = first_free_number(&m);
        let mut s = Session {
            initial: m.clone(),
            current: m,
            next_id,
            presentation: Presentation {
                phase: Phase::Idle,
                state: ConstraintState {
                    over: false,
                    under: false,
                    over_dim: 0,
                    under_dim: 0,
                },
                over_parts: vec![],
                well_parts: vec![],
                options: vec![],
                top: None,
                forced: false,
            },
            rejected: HashMap::new(),
            seen: HashSet::new(),
            undo: Vec::new(),
            journal: Vec::new(),
        };
        s.presentation = s.present()?;
        Ok(s)
    }

    pub fn initial(&self) -> &Model {
        &self.initial
    }

    pub fn current(&self) -> &Model {
        &self.current
    }

    pub fn phase(&self) -> Phase {
        self.presentation.phase
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn journal(&self) -> &[JournalEntry] {
        &self.journal
    }

    pub fn can_undo(&self) -> bool {
        !self.undo.is_empty()
    }

    /// The current presentation; an error once nothing is left to resolve or
    /// when no valid option exists for a live inconsistency.
    pub fn step(&self) -> Result<&Presentation> {
        let p = &self.presentation;
        if p.phase == Phase::WellDone {
            return Err(Error::AlreadyWell);
        }
        if p.options.is_empty() {
            return Err(Error::NoValidOptions(p.state.label().into()));
        }
        Ok(p)
    }

    fn not_rejected(&self, options: Vec<ResolutionOption>) -> Vec<ResolutionOption> {
        options
            .into_iter()
            .filter(|o| {
                self.rejected
                    .get(&context_key(&o.target))
                    .is_none_or(|r| !r.contains(&o.id))
            })
            .collect()
    }

    fn present(&mut self) -> Result<Presentation> {
        let a = analyze(&self.current)?;
        let state = a.state;
        let mut p = Presentation {
            phase: Phase::WellDone,
            state,
            over_parts: vec![],
            well_parts: vec![],
            options: vec![],
            top: None,
            forced: false,
        };
        if state.over {
            p.phase = Phase::OverResolution;
            p.over_parts = over::detect_in(&a)?;
            // Parts in detector order; a part whose options were all
            // rejected cannot occur (the last one is forced).
            if let Some(part) = p.over_parts.first() {
                let opts = self.not_rejected(over_options(&self.current, part)?);
                p.options = prioritize(&self.current, opts, Mode::Over)?;
                p.forced = p.options.len() == 1;
            }
        } else if state.under {
            p.phase = Phase::UnderResolution;
            p.well_parts = well::detect_in(&self.current, &a)?;
            let n = p.well_parts.len();
            // Largest with second largest first, then the other pairs.
            let pairs = (1..n).flat_map(|j| (0..j).map(move |i| (i, j)));
            for (i, j) in pairs {
                let opts = under_options(&self.current, &p.well_parts[i], &p.well_parts[j])?;
                let opts = self.not_rejected(opts);
                if !opts.is_empty() {
                    p.options = prioritize(&self.current, opts, Mode::Under)?;
                    if !p.options.is_empty() {
                        break;
                    }
                }
            }
            if p.options.is_empty() {
                let opts = self.not_rejected(intrinsic_options(&self.current, &p.well_parts)?);
                p.options = prioritize(&self.current, opts, Mode::Under)?;
            }
        }
        p.top = p.options.first().map(|o| o.id.clone());
        self.seen.extend(p.options.iter().map(|o| o.id.clone()));
        Ok(p)
    }

    fn find(&self, option_id: &str) -> Result<ResolutionOption> {
        match self.presentation.option(option_id) {
            Some(o) => Ok(o.clone()),
            None if self.seen.contains(option_id) => Err(Error::StaleOption(option_id.into())),
            None => Err(Error::UnknownOption(option_id.into())),
        }
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            model: self.current.clone(),
            next_id: self.next_id,
            rejected: self.rejected.clone(),
            presentation: self.presentation.clone(),
        }
    }

    fn fresh_id(&mut self) -> String {
        loop {
            let id = format!("C{}", self.next_id);
            self.next_id += 1;
            if self.current.constraint(&id.as_str().into()).is_none() {
                return id;
            }
        }
    }

    /// Applies an option of the current presentation.
    pub fn accept(&mut self, option_id: &str) -> Result<&Presentation> {
        let o = self.find(option_id)?;
        let before = self.snapshot();
        let pre_state = self.presentation.state;
        let (action, constraint, next) = match &o.action {
            Action::Remove { constraint } => {
                let c = self
                    .current
                    .constraint(constraint)
                    .cloned()
                    .ok_or_else(|| Error::UnknownConstraint(constraint.0.clone()))?;
                ("remove", c, self.current.without_constraint(constraint)?)
            }
            Action::Add { constraint } => {
                let mut c = constraint.clone();
                c.id = self.fresh_id().into();
                let next = self.current.with_constraint(c.clone())?;
                ("add", c, next)
            }
        };
        self.current = next;
        match self.present() {
            Ok(p) => self.presentation = p,
            Err(e) => {
                self.restore(before);
                return Err(e);
            }
        }
        self.undo.push(before);
        self.record(
            Some(action),
            Some(constraint),
            Some(o.id),
            Verdict::Accepted,
            pre_state,
        );
        Ok(&self.presentation)
    }

    /// Strikes an option for the lifetime of its part or part pair.
    pub fn reject(&mut self, option_id: &str) -> Result<&Presentation> {
        let o = self.find(option_id)?;
        if o.is_removal() && self.presentation.options.len() == 1 {
            return Err(Error::ForcedRemoval(o.describe()));
        }
        let before = self.snapshot();
        let pre_state = self.presentation.state;
        self.rejected
            .entry(context_key(&o.target))
            .or_default()
            .insert(o.id.clone());
        match self.present() {
            Ok(p) => self.presentation = p,
            Err(e) => {
                self.restore(before);
                return Err(e);
            }
        }
        self.undo.push(before);
        let constraint = match &o.action {
            Action::Remove { constraint } => self.current.constraint(constraint).cloned(),
            Action::Add { constraint } => Some(constraint.clone()),
        };
        let action = if o.is_removal() { "remove" } else { "add" };
        self.record(
            Some(action),
            constraint,
            Some(o.id),
            Verdict::Rejected,
            pre_state,
        );
        Ok(&self.presentation)
    }

    /// Reverts the most recent accept or reject.
    pub fn undo(&mut self) -> Result<&Presentation> {
        let snap = self.undo.pop().ok_or(Error::EmptyUndo)?;
        let pre_state = self.presentation.state;
        self.restore(snap);
        self.record(None, None, None, Verdict::Undone, pre_state);
        Ok(&self.presentation)
    }

    fn restore(&mut self, snap: Snapshot) {
        self.current = snap.model;
        self.next_id = snap.next_id;
        self.rejected = snap.rejected;
        self.presentation = snap.presentation;
    }

    fn record(
        &mut self,
        action: Option<&str>,
        constraint: Option<Constraint>,
        option: Option<String>,
        verdict: Verdict,
        pre_state: ConstraintState,
    ) {
        self.journal.push(JournalEntry {
            seq: self.journal.len() + 1,
            action: action.map(str::to_owned),
            constraint,
            option,
            verdict,
            pre_state,
            post_state: self.presentation.state,
            timestamp_ms: now_ms(),
        });
    }

    /// Accepts suggestions until the model is well-constrained, taking the
    /// top one at each step. A choice that leads to a state with no valid
    /// option is abandoned and the next suggestion tried instead; abandoned
    /// branches leave no trace in the journal.
    pub fn auto_resolve(&mut self) -> Result<&Presentation> {
        if self.phase() == Phase::WellDone {
            return Ok(&self.presentation);
        }
        let mut budget = AUTO_BUDGET;
        match self.clone().search(&mut budget)? {
            Some(done) => {
                *self = done;
                Ok(&self.presentation)
            }
            None if budget == 0 => Err(Error::NoValidOptions(format!(
                "no resolution found within {AUTO_BUDGET} acceptances"
            ))),
            None => Err(Error::NoValidOptions(
                self.presentation.state.label().into(),
            )),
        }
    }

    fn search(self, budget: &mut usize) -> Result<Option<Session>> {
        if self.phase() == Phase::WellDone {
            return Ok(Some(self));
        }
        for o in &self.presentation.options {
            if *budget == 0 {
                return Ok(None);
            }
            *budget -= 1;
            let mut next = self.clone();
            next.accept(&o.id)?;
            if let Some(done) = next.search(budget)? {
                return Ok(Some(done));
            }
        }
        Ok(None)
    }

    pub fn current_document(&self) -> String {
        serialize_model(&self.current)
    }
}
