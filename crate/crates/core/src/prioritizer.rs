//! Option ranking: type precedence first, change rate second.
//!
//! The change rate of a constraint is the size of the relative geometry
//! change `R·G⁺·ΔP` caused by a unit change of that constraint's residual.
//! `R` subtracts from each entity's rigid motion the weighted mean motion of
//! its neighbours, which makes the measure insensitive to where the model
//! sits in space. Multi-row constraints use the Frobenius norm over their
//! rows divided by `√rows`, so the value does not depend on the basis chosen
//! for those rows.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analyzer::classify;
use crate::error::{Error, Result};
use crate::kernels::pseudoinverse;
use crate::linearizer::PerturbationSystem;
use crate::model::{Constraint, ConstraintId, ConstraintKind, EntityClass, EntityId, Model};
use crate::options::{Action, ResolutionOption, Target};
use crate::tolerance;

/// Neighbour weight `w_ij` between two entities sharing a constraint.
pub type WeightFn<'a> = &'a dyn Fn(&EntityId, &EntityId) -> f64;

fn unit_weight(_: &EntityId, _: &EntityId) -> f64 {
    1.0
}

/// Precedence of a constraint kind over an entity-class pairing, 1 (most
/// important) to 5. Pairings the ranking table does not list get 5.
fn table_precedence(kind: ConstraintKind, a: EntityClass, b: Option<EntityClass>) -> u8 {
    use ConstraintKind::*;
    use EntityClass::*;
    let Some(b) = b else { return 5 };
    let pair = match (a, b) {
        (Edge, Face) | (Vertex, Face) | (Vertex, Edge) => (b, a),
        _ => (a, b),
    };
    match (pair, kind) {
        ((Face, Face), Parallel | Perpendicular | Distance | EqualLengthParam) => 1,
        ((Face, Face), Angle) => 2,
        ((Face, Edge), Parallel | Perpendicular | Distance) => 2,
        ((Face, Edge), Angle) => 4,
        (
            (Edge, Edge),
            EqualAngleParam | EqualLengthParam | Parallel | Perpendicular | Distance,
        ) => 3,
        _ => 5,
    }
}

/// Type precedence of `c` over `m`'s entities. Compound kinds take the most
/// important precedence among their constituents.
pub fn type_precedence(m: &Model, c: &Constraint) -> u8 {
    let class = |i: usize| {
        c.operands
            .get(i)
            .and_then(|id| m.entity(id))
            .map(|e| e.kind().class())
    };
    let Some(a) = class(0) else { return 5 };
    let b = class(1);
    match c.kind {
        // Perpendicular directions plus a distance.
        ConstraintKind::Tangent => table_precedence(ConstraintKind::Perpendicular, a, b)
            .min(table_precedence(ConstraintKind::Distance, a, b)),
        kind => table_precedence(kind, a, b),
    }
}

/// `G⁺` and `R` for one model snapshot.
pub struct ChangeRateContext {
    pinv: DMatrix<f64>,
    r: DMatrix<f64>,
    rows: Vec<std::ops::Range<usize>>,
    ids: Vec<ConstraintId>,
}

impl ChangeRateContext {
    pub fn new(m: &Model) -> Result<Self> {
        Self::with_weights(m, &unit_weight)
    }

    pub fn with_weights(m: &Model, w: WeightFn<'_>) -> Result<Self> {
        let sys = PerturbationSystem::build(m)?;
        let pinv = pseudoinverse(&sys.g, tolerance::RANK);
        let n = sys.column_count();
        let mut r = DMatrix::identity(n, n);
        for (i, e) in m.entities().iter().enumerate() {
            let bi = sys.motion.block(i);
            let neighbors: Vec<(usize, f64)> = m
                .neighbors(&e.id)
                .iter()
                .map(|id| (m.entity_index(id).expect("neighbour exists"), w(&e.id, id)))
                .collect();
            let total: f64 = neighbors.iter().map(|(_, w)| w).sum();
            if total <= 0.0 {
                continue;
            }
            for (j, wij) in neighbors {
                let bj = sys.motion.block(j);
                // Rigid sub-block only; intrinsic coordinates pass through.
                for k in 0..6 {
                    r[(bi.start + k, bj.start + k)] -= wij / total;
                }
            }
        }
        Ok(ChangeRateContext {
            pinv,
            r,
            rows: sys.residual.constraint_rows.clone(),
            ids: m.constraints().iter().map(|c| c.id.clone()).collect(),
        })
    }

    /// Change rate of constraint `c` in this snapshot.
    pub fn rate(&self, c: &ConstraintId) -> Result<f64> {
        let i = self
            .ids
            .iter()
            .position(|x| x == c)
            .ok_or_else(|| Error::UnknownConstraint(c.0.clone()))?;
        let rows = self.rows[i].clone();
        if rows.is_empty() {
            return Ok(0.0);
        }
        let dx = self.pinv.columns(rows.start, rows.len());
        Ok((&self.r * dx).norm() / (rows.len() as f64).sqrt())
    }
}

/// Rates are compared at ten significant digits so that rounding noise
/// cannot reorder options whose rates agree mathematically.
fn quantize(x: f64) -> f64 {
    format!("{x:.9e}").parse().unwrap_or(x)
}

pub fn change_rate(m: &Model, c: &ConstraintId) -> Result<f64> {
    ChangeRateContext::new(m)?.rate(c)
}

/// Sum of the change rates of the other members of `part`, evaluated on
/// the model with `c` removed.
pub fn summed_change_rate(m: &Model, part: &[ConstraintId], c: &ConstraintId) -> Result<f64> {
    summed_change_rate_with(m, part, c, &unit_weight)
}

pub fn summed_change_rate_with(
    m: &Model,
    part: &[ConstraintId],
    c: &ConstraintId,
    w: WeightFn<'_>,
) -> Result<f64> {
    if !part.contains(c) {
        return Err(Error::OutsidePart(c.0.clone()));
    }
    let reduced = m.without_constraint(c)?;
    let ctx = ChangeRateContext::with_weights(&reduced, w)?;
    part.iter().filter(|&j| j != c).map(|j| ctx.rate(j)).sum()
}

/// Change rate of `candidate` after virtually appending it to `m`.
pub fn candidate_change_rate(m: &Model, candidate: &Constraint) -> Result<f64> {
    candidate_change_rate_with(m, candidate, &unit_weight)
}

pub fn candidate_change_rate_with(
    m: &Model,
    candidate: &Constraint,
    w: WeightFn<'_>,
) -> Result<f64> {
    let next = m.with_constraint(candidate.clone())?;
    let sys = PerturbationSystem::build(&next)?;
    let rows = sys.residual.constraint_rows.last().cloned().unwrap_or(0..0);
    let scale = sys.g.amax().max(1.0);
    if (rows.start..rows.end).all(|r| sys.g.row(r).amax() <= tolerance::ZERO * scale) {
        return Err(Error::DegenerateCandidate(candidate.to_string()));
    }
    if classify(&next)?.over {
        return Err(Error::CandidateOverConstrains(candidate.to_string()));
    }
    ChangeRateContext::with_weights(&next, w)?.rate(&candidate.id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Ranking removals from an over-constrained part.
    Over,
    /// Ranking additions between well-constrained parts.
    Under,
}

/// Orders two options of the same mode; `Less` means `a` ranks first.
///
/// Over: the less important type is removed first. Under: the more
/// important type is added first. Equal precedence falls back to the lower
/// score; complete ties compare `Equal`.
pub fn compare(a: &ResolutionOption, b: &ResolutionOption, mode: Mode) -> Result<Ordering> {
    let removal = mode == Mode::Over;
    if a.is_removal() != removal || b.is_removal() != removal {
        return Err(Error::MixedFlags);
    }
    let by_type = if removal {
        b.precedence.cmp(&a.precedence)
    } else {
        a.precedence.cmp(&b.precedence)
    };
    let score = |o: &ResolutionOption| o.score.unwrap_or(f64::INFINITY);
    Ok(by_type.then_with(|| score(a).total_cmp(&score(b))))
}

/// The higher-priority option of the two; `a` on a tie.
pub fn select<'o>(
    a: &'o ResolutionOption,
    b: &'o ResolutionOption,
    mode: Mode,
) -> Result<&'o ResolutionOption> {
    Ok(if compare(a, b, mode)? == Ordering::Greater {
        b
    } else {
        a
    })
}

/// Scores and ranks `options` (all of one mode). Additions that turn out
/// degenerate or dependent are discarded.
pub fn prioritize(
    m: &Model,
    options: Vec<ResolutionOption>,
    mode: Mode,
) -> Result<Vec<ResolutionOption>> {
    prioritize_with(m, options, mode, &unit_weight)
}

pub fn prioritize_with(
    m: &Model,
    options: Vec<ResolutionOption>,
    mode: Mode,
    w: WeightFn<'_>,
) -> Result<Vec<ResolutionOption>> {
    let mut scored = Vec::with_capacity(options.len());
    for mut o in options {
        let rate = match (&o.action, &o.target) {
            (Action::Remove { constraint }, Target::Over { constraints }) => {
                summed_change_rate_with(m, constraints, constraint, w)?
            }
            (Action::Remove { constraint }, _) => {
                summed_change_rate_with(m, &[constraint.clone()], constraint, w)?
            }
            (Action::Add { constraint }, _) => match candidate_change_rate_with(m, constraint, w) {
                Ok(r) => r,
                Err(Error::DegenerateCandidate(_) | Error::CandidateOverConstrains(_)) => continue,
                Err(e) => return Err(e),
            },
        };
        o.score = Some(quantize(rate));
        scored.push(o);
    }
    for o in &scored {
        if o.is_removal() != (mode == Mode::Over) {
            return Err(Error::MixedFlags);
        }
    }
    scored.sort_by(|a, b| compare(a, b, mode).expect("modes checked"));
    Ok(scored)
}
