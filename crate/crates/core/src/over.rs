//! Minimal over-constrained parts: one sparsest independent row dependency
//! per dimension of `NullSpace(Gᵀ)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::analyzer::{analyze, Analysis};
use crate::error::{Error, Result};
use crate::kernels::{nullspace_basis, rank, sparsest_independent_null_vector, support};
use crate::model::{ConstraintId, Model};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverPart {
    /// Member constraints, in model order.
    pub constraints: Vec<ConstraintId>,
    /// Dependency vector over the rows of `G`.
    #[serde(skip)]
    pub dependency: DVector<f64>,
    /// Rows with a nonzero dependency coefficient.
    pub rows: Vec<usize>,
}

impl OverPart {
    pub fn contains(&self, id: &ConstraintId) -> bool {
        self.constraints.contains(id)
    }
}

fn constraints_of_rows(a: &Analysis, rows: &[usize]) -> Vec<ConstraintId> {
    let mut idx: Vec<usize> = rows
        .iter()
        .map(|&r| a.system.residual.rows[r].constraint_index)
        .collect();
    idx.sort_unstable();
    idx.dedup();
    idx.into_iter()
        .map(|i| {
            a.system.residual.rows[a.system.residual.constraint_rows[i].start]
                .constraint
                .clone()
        })
        .collect()
}

pub fn detect_minimal_over_parts(m: &Model) -> Result<Vec<OverPart>> {
    detect_in(&analyze(m)?)
}

pub(crate) fn detect_in(a: &Analysis) -> Result<Vec<OverPart>> {
    if !a.state.over {
        return Err(Error::NotOverConstrained);
    }
    let gt = a.system.g.transpose();
    let mut prior: Vec<DVector<f64>> = Vec::new();
    let mut parts = Vec::new();
    for _ in 0..a.state.over_dim {
        let r = sparsest_independent_null_vector(&gt, &prior)?;
        parts.push(OverPart {
            constraints: constraints_of_rows(a, &r.support),
            dependency: r.x.clone(),
            rows: r.support,
        });
        prior.push(r.x);
    }
    Ok(parts)
}

/// Greedy baseline: grow a maximal independent constraint subset starting
/// from `seed` (model order afterwards), then report, for every leftover
/// constraint, the constraints taking part in its dependency on that subset.
pub fn greedy_over_baseline(m: &Model, seed: Option<&ConstraintId>) -> Result<Vec<OverPart>> {
    let a = analyze(m)?;
    if !a.state.over {
        return Err(Error::NotOverConstrained);
    }
    let n = m.constraints().len();
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(seed) = seed {
        let s = m
            .constraint_index(seed)
            .ok_or_else(|| Error::UnknownConstraint(seed.0.clone()))?;
        order.retain(|&i| i != s);
        order.insert(0, s);
    }
    let ranges = &a.system.residual.constraint_rows;
    let g = &a.system.g;
    let stacked = |set: &[usize]| -> (DMatrix<f64>, Vec<usize>) {
        let rows: Vec<usize> = set.iter().flat_map(|&c| ranges[c].clone()).collect();
        (
            DMatrix::from_fn(rows.len(), g.ncols(), |r, col| g[(rows[r], col)]),
            rows,
        )
    };
    let mut kept: Vec<usize> = Vec::new();
    let mut leftovers = Vec::new();
    for &c in &order {
        kept.push(c);
        let (rows_mat, rows) = stacked(&kept);
        if rank(&rows_mat) < rows.len() {
            kept.pop();
            leftovers.push(c);
        }
    }
    let mut parts = Vec::new();
    for &l in &leftovers {
        let mut set = kept.clone();
        set.push(l);
        let (rows_mat, rows) = stacked(&set);
        let z = nullspace_basis(&rows_mat.transpose(), tolerance::RANK);
        let mut supp: Vec<usize> = Vec::new();
        for col in z.column_iter() {
            for i in support(&col.into_owned()) {
                if !supp.contains(&rows[i]) {
                    supp.push(rows[i]);
                }
            }
        }
        supp.sort_unstable();
        let mut dependency = DVector::zeros(g.nrows());
        if let Some(col) = z.column_iter().next() {
            for (i, &r) in rows.iter().enumerate() {
                dependency[r] = col[i];
            }
        }
        parts.push(OverPart {
            constraints: constraints_of_rows(&a, &supp),
            dependency,
            rows: supp,
        });
    }
    Ok(parts)
}
