use std::collections::HashSet;

use super::measure::measure_entities;
use super::{Constraint, ConstraintKind, GeometricEntity, Model};
use crate::error::{Error, Result};
use crate::linearizer::{constraint_residual, witness_residual};
use crate::tolerance;

/// Brings the constraint system in line with geometry edited outside of it.
///
/// Constraints whose operands disappeared are dropped, dimensions are
/// re-measured, predicates the new geometry breaks are dropped, and angles
/// that land on 0°, 90° or 180° become parallel or perpendicular predicates.
pub fn update_gcs_after_edit(pre: &Model, post_geometry: Vec<GeometricEntity>) -> Result<Model> {
    let bare = Model::new(post_geometry, Vec::new())?;
    let present: HashSet<_> = bare.entities().iter().map(|e| e.id.clone()).collect();
    let mut kept = Vec::new();
    for c in pre.constraints() {
        if !c.operands.iter().all(|o| present.contains(o)) {
            continue;
        }
        if let Some(next) = carry_over(&bare, c)? {
            kept.push(next);
        }
    }
    let post = Model::new(bare.entities().to_vec(), kept)?;
    let residual = witness_residual(&post)?;
    if residual > tolerance::WITNESS {
        return Err(Error::WitnessInvalid {
            residual,
            tolerance: tolerance::WITNESS,
        });
    }
    Ok(post)
}

fn carry_over(bare: &Model, c: &Constraint) -> Result<Option<Constraint>> {
    if !c.kind.is_parameterized() {
        let holds = bare.check_constraint(c).is_ok()
            && constraint_residual(bare, c).is_ok_and(|r| r <= tolerance::WITNESS);
        return Ok(holds.then(|| c.clone()));
    }
    let ops: Vec<&GeometricEntity> = c
        .operands
        .iter()
        .map(|o| bare.entity(o).expect("operand present"))
        .collect();
    let value = match measure_entities(c.kind, ops[0], ops.get(1).copied()) {
        Ok(v) => v,
        // The edit destroyed what the dimension measured (e.g. planes no longer parallel).
        Err(_) => return Ok(None),
    };
    if c.kind == ConstraintKind::Angle {
        let rad = value.to_radians();
        let snap = |kind| Constraint {
            kind,
            parameter: None,
            ..c.clone()
        };
        if rad <= tolerance::ANGLE || std::f64::consts::PI - rad <= tolerance::ANGLE {
            return Ok(Some(snap(ConstraintKind::Parallel)));
        }
        if (rad - std::f64::consts::FRAC_PI_2).abs() <= tolerance::ANGLE {
            return Ok(Some(snap(ConstraintKind::Perpendicular)));
        }
    }
    let next = Constraint {
        parameter: Some(value),
        ..c.clone()
    };
    if bare.check_constraint(&next).is_err() {
        return Ok(None);
    }
    Ok(Some(next))
}
