//! Constraint-state classification from the ranks of `G`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::nullspace_basis;
use crate::linearizer::{witness_residual, PerturbationSystem};
use crate::model::Model;
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintState {
    pub over: bool,
    pub under: bool,
    /// `dim NullSpace(Gᵀ)`.
    pub over_dim: usize,
    /// `dim NullSpace(G) − dim N`.
    pub under_dim: usize,
}

impl ConstraintState {
    pub fn is_well(&self) -> bool {
        !self.over && !self.under
    }

    pub fn label(&self) -> &'static str {
        match (self.over, self.under) {
            (false, false) => "well-constrained",
            (true, false) => "over-constrained",
            (false, true) => "under-constrained",
            (true, true) => "over- and under-constrained",
        }
    }
}

/// The perturbation system together with the bases the detectors work on.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub state: ConstraintState,
    pub system: PerturbationSystem,
    /// Orthonormal basis of `NullSpace(Gᵀ)` (row dependencies).
    pub dependencies: DMatrix<f64>,
    /// Orthonormal basis of `NullSpace(G)` (free perturbations).
    pub free: DMatrix<f64>,
}

/// Builds the perturbation system of a witness-valid model and classifies it.
pub fn analyze(m: &Model) -> Result<Analysis> {
    let residual = witness_residual(m)?;
    if residual > tolerance::WITNESS {
        return Err(Error::WitnessInvalid {
            residual,
            tolerance: tolerance::WITNESS,
        });
    }
    let system = PerturbationSystem::build(m)?;
    let dependencies = nullspace_basis(&system.g.transpose(), tolerance::RANK);
    let free = nullspace_basis(&system.g, tolerance::RANK);
    let over_dim = dependencies.ncols();
    let under_dim = free.ncols().saturating_sub(system.nominal.ncols());
    let state = ConstraintState {
        over: over_dim > 0,
        under: under_dim > 0,
        over_dim,
        under_dim,
    };
    Ok(Analysis {
        state,
        system,
        dependencies,
        free,
    })
}

pub fn classify(m: &Model) -> Result<ConstraintState> {
    analyze(m).map(|a| a.state)
}
