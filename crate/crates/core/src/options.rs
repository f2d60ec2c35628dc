//! Resolution option generation.
//!
//! Over-constraint: every constraint of a minimal over-constrained part is a
//! removal candidate. Under-constraint: every admissible constraint bridging
//! two well-constrained parts, measured from the witness, that does not
//! introduce a dependency.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analyzer::classify;
use crate::error::{Error, Result};
use crate::linearizer::constraint_residual;
use crate::model::{measure_parameter, Constraint, ConstraintId, ConstraintKind, EntityId, Model};
use crate::over::OverPart;
use crate::prioritizer::type_precedence;
use crate::tolerance;
use crate::well::WellPart;

/// Id carried by a generated constraint until a session assigns a real one.
pub const CANDIDATE_ID: &str = "~candidate";

/// Kinds tried for every bridging entity pair, in generation order.
const BRIDGING_KINDS: [ConstraintKind; 7] = [
    ConstraintKind::Parallel,
    ConstraintKind::Perpendicular,
    ConstraintKind::Distance,
    ConstraintKind::Angle,
    ConstraintKind::Tangent,
    ConstraintKind::EqualPosition,
    ConstraintKind::EqualLengthParam,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Remove { constraint: ConstraintId },
    Add { constraint: Constraint },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// The minimal over-constrained part a removal resolves.
    Over { constraints: Vec<ConstraintId> },
    /// The two well-constrained parts an addition bridges.
    Under {
        first: Vec<EntityId>,
        second: Vec<EntityId>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionOption {
    /// Content hash of the action; stable across regeneration.
    pub id: String,
    pub action: Action,
    pub target: Target,
    /// Type precedence, 1 (most important) to 5.
    pub precedence: u8,
    /// Change-rate score, filled in by the prioritizer.
    pub score: Option<f64>,
}

impl ResolutionOption {
    fn new(action: Action, target: Target, precedence: u8) -> Self {
        ResolutionOption {
            id: option_id(&action),
            action,
            target,
            precedence,
            score: None,
        }
    }

    pub fn is_removal(&self) -> bool {
        matches!(self.action, Action::Remove { .. })
    }

    pub fn describe(&self) -> String {
        match &self.action {
            Action::Remove { constraint } => format!("Remove {constraint}"),
            Action::Add { constraint } => format!("Add {constraint}"),
        }
    }
}

fn option_id(action: &Action) -> String {
    let mut h = Sha256::new();
    match action {
        Action::Remove { constraint } => {
            h.update(b"remove\0");
            h.update(constraint.as_str().as_bytes());
        }
        Action::Add { constraint } => {
            h.update(b"add\0");
            h.update(constraint.kind.name().as_bytes());
            for op in &constraint.operands {
                h.update(b"\0");
                h.update(op.as_str().as_bytes());
            }
            if let Some(p) = constraint.parameter {
                h.update(b"\0");
                h.update(p.to_bits().to_le_bytes());
            }
        }
    }
    h.finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One removal option per constraint of `part`.
pub fn over_options(m: &Model, part: &OverPart) -> Result<Vec<ResolutionOption>> {
    let target = Target::Over {
        constraints: part.constraints.clone(),
    };
    part.constraints
        .iter()
        .map(|id| {
            let c = m
                .constraint(id)
                .ok_or_else(|| Error::UnknownConstraint(id.0.clone()))?;
            Ok(ResolutionOption::new(
                Action::Remove {
                    constraint: id.clone(),
                },
                target.clone(),
                type_precedence(m, c),
            ))
        })
        .collect()
}

fn is_right_angle_multiple(degrees: f64) -> bool {
    let eps = tolerance::ANGLE.to_degrees();
    [0.0, 90.0, 180.0]
        .iter()
        .any(|t| (degrees - t).abs() <= eps)
}

/// Naive bridging candidate of `kind` between `a` and `b`, if the witness
/// realises it.
fn candidate(m: &Model, kind: ConstraintKind, a: &EntityId, b: &EntityId) -> Option<Constraint> {
    let operands = vec![a.clone(), b.clone()];
    let parameter = if kind.is_parameterized() {
        let p = measure_parameter(m, kind, &operands).ok()?;
        if kind == ConstraintKind::Angle && is_right_angle_multiple(p) {
            return None;
        }
        Some(p)
    } else {
        None
    };
    let c = Constraint {
        id: CANDIDATE_ID.into(),
        kind,
        operands,
        parameter,
    };
    m.check_constraint(&c).ok()?;
    let residual = constraint_residual(m, &c).ok()?;
    (residual <= tolerance::WITNESS).then_some(c)
}

/// Whether appending `c` to `m` keeps the model free of over-constraint.
fn keeps_independent(m: &Model, c: &Constraint) -> bool {
    match m
        .with_constraint(c.clone())
        .and_then(|next| classify(&next))
    {
        Ok(state) => !state.over,
        Err(_) => false,
    }
}

/// Two-step generation of addition options bridging `a` and `b`.
pub fn under_options(m: &Model, a: &WellPart, b: &WellPart) -> Result<Vec<ResolutionOption>> {
    if let Some(shared) = a.entities.iter().find(|e| b.contains(e)) {
        return Err(Error::PartsOverlap(shared.0.clone()));
    }
    for id in a.entities.iter().chain(&b.entities) {
        if m.entity(id).is_none() {
            return Err(Error::UnknownEntity(id.0.clone()));
        }
    }
    let target = Target::Under {
        first: a.entities.clone(),
        second: b.entities.clone(),
    };
    let mut out = Vec::new();
    for x in &a.entities {
        for y in &b.entities {
            for kind in BRIDGING_KINDS {
                let Some(c) = candidate(m, kind, x, y) else {
                    continue;
                };
                if keeps_independent(m, &c) {
                    let precedence = type_precedence(m, &c);
                    out.push(ResolutionOption::new(
                        Action::Add { constraint: c },
                        target.clone(),
                        precedence,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Length options for entities whose intrinsic size is still free. Used
/// when no bridging constraint between parts is left to offer.
pub fn intrinsic_options(m: &Model, parts: &[WellPart]) -> Result<Vec<ResolutionOption>> {
    let mut out = Vec::new();
    for part in parts {
        for id in &part.entities {
            let e = m
                .entity(id)
                .ok_or_else(|| Error::UnknownEntity(id.0.clone()))?;
            let Some(size) = e.intrinsic() else { continue };
            let c = Constraint {
                id: CANDIDATE_ID.into(),
                kind: ConstraintKind::Length,
                operands: vec![id.clone()],
                parameter: Some(size),
            };
            if m.check_constraint(&c).is_ok() && keeps_independent(m, &c) {
                let target = Target::Under {
                    first: vec![id.clone()],
                    second: vec![],
                };
                let precedence = type_precedence(m, &c);
                out.push(ResolutionOption::new(
                    Action::Add { constraint: c },
                    target,
                    precedence,
                ));
            }
        }
    }
    Ok(out)
}

/// Drops options invalidated by decisions already applied to `m`.
pub fn revalidate(options: Vec<ResolutionOption>, m: &Model) -> Vec<ResolutionOption> {
    options
        .into_iter()
        .filter(|o| match (&o.action, &o.target) {
            // A minimal part loses its dependency as soon as any member is gone.
            (Action::Remove { .. }, Target::Over { constraints }) => {
                constraints.iter().all(|c| m.constraint(c).is_some())
            }
            (Action::Remove { constraint }, _) => m.constraint(constraint).is_some(),
            (Action::Add { constraint }, _) => {
                m.check_constraint(constraint).is_ok()
                    && constraint_residual(m, constraint).is_ok_and(|r| r <= tolerance::WITNESS)
                    && keeps_independent(m, constraint)
            }
        })
        .collect()
}
