//! First-order perturbation analysis at the witness geometry.

mod layout;
mod motion;
mod nominal;
mod residual;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::Model;

pub use layout::{EntitySlots, Layout};
pub use motion::{motion_transform, MotionTransform};
pub use nominal::{nominal_generators, nominal_space};
pub use residual::{
    assemble_system, jacobian, witness_residual, OffsetTarget, ResidualSystem, Row, RowForm,
};

pub(crate) use residual::constraint_residual;

/// `G = J·T`.
pub fn perturbation_matrix(j: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if j.ncols() != t.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "J is {}x{} but T is {}x{}",
            j.nrows(),
            j.ncols(),
            t.nrows(),
            t.ncols()
        )));
    }
    Ok(j * t)
}

/// Everything the detectors need about one model.
#[derive(Debug, Clone)]
pub struct PerturbationSystem {
    pub residual: ResidualSystem,
    pub motion: MotionTransform,
    pub g: DMatrix<f64>,
    /// Orthonormal basis of the nominal free perturbation space.
    pub nominal: DMatrix<f64>,
}

impl PerturbationSystem {
    pub fn build(m: &Model) -> Result<Self> {
        let residual = assemble_system(m)?;
        let j = jacobian(&residual, m);
        let motion = motion_transform(m);
        let g = perturbation_matrix(&j, &motion.matrix)?;
        Ok(PerturbationSystem {
            residual,
            motion,
            g,
            nominal: nominal_space(m),
        })
    }

    pub fn row_count(&self) -> usize {
        self.g.nrows()
    }

    pub fn column_count(&self) -> usize {
        self.g.ncols()
    }
}
