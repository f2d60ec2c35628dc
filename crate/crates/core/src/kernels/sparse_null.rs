//! Sparsest null vector of `Gᵀ` that is independent of already found ones.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use super::linalg::{column_basis, nullspace_basis};
use super::oracle::{minimal_dependent_rowset_oracle, support};
use crate::error::{Error, Result};
use crate::tolerance;

/// Row count up to which solver answers are arbitrated by the circuit oracle.
pub const ARBITRATION_BOUND: usize = super::oracle::CIRCUIT_ORACLE_BOUND;

const IRL1_ITERATIONS: usize = 20;
const IRL1_EPSILON: f64 = 1e-4;
/// Minimum relative weight outside the span of the prior vectors.
const INDEPENDENCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseNullResult {
    pub x: DVector<f64>,
    pub support: Vec<usize>,
    /// `‖Gᵀx‖`.
    pub residual: f64,
}

/// Splits the null space of `gt` into the span of `prior` and its complement.
struct NullSplit {
    z: DMatrix<f64>,
    /// Complement directions in `z` coordinates.
    complement: DMatrix<f64>,
}

impl NullSplit {
    fn new(gt: &DMatrix<f64>, prior: &[DVector<f64>]) -> Result<Self> {
        let z = nullspace_basis(gt, tolerance::RANK);
        let d = z.ncols();
        let coords = DMatrix::from_fn(d, prior.len(), |r, c| z.column(r).dot(&prior[c]));
        let span = column_basis(&coords);
        if span.ncols() >= d {
            return Err(Error::NoIndependentNullVector(prior.len()));
        }
        let complement = if span.ncols() == 0 {
            DMatrix::identity(d, d)
        } else {
            nullspace_basis(&span.transpose(), tolerance::RANK)
        };
        Ok(NullSplit { z, complement })
    }

    /// `‖Cx‖`: norm of the component of `x` outside the prior span.
    fn independent_part(&self, x: &DVector<f64>) -> f64 {
        (self.complement.transpose() * (self.z.transpose() * x)).norm()
    }
}

/// `min Σ w_i |(Za)_i|` subject to `c·a = 1`, for null-space coordinates `a`.
fn weighted_l1(z: &DMatrix<f64>, weights: &[f64], normal: &DVector<f64>) -> Option<DVector<f64>> {
    let (m, d) = z.shape();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let a: Vec<_> = (0..d)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t: Vec<_> = (0..m)
        .map(|i| lp.add_var(weights[i], (0.0, f64::INFINITY)))
        .collect();
    for i in 0..m {
        let row: Vec<_> = (0..d)
            .filter(|&j| z[(i, j)] != 0.0)
            .map(|j| (a[j], z[(i, j)]))
            .collect();
        if row.is_empty() {
            continue;
        }
        let plus: Vec<_> = row
            .iter()
            .map(|&(v, c)| (v, -c))
            .chain([(t[i], 1.0)])
            .collect();
        let minus: Vec<_> = row.iter().copied().chain([(t[i], 1.0)]).collect();
        lp.add_constraint(plus, ComparisonOp::Ge, 0.0);
        lp.add_constraint(minus, ComparisonOp::Ge, 0.0);
    }
    let norm: Vec<_> = (0..d)
        .filter(|&j| normal[j] != 0.0)
        .map(|j| (a[j], normal[j]))
        .collect();
    lp.add_constraint(norm, ComparisonOp::Eq, 1.0);
    let sol = lp.solve().ok()?;
    Some(DVector::from_fn(d, |j, _| *sol.var_value(a[j])))
}

/// Reweighted ℓ1 refinement starting from `x`, keeping the same normalisation.
fn reweight(z: &DMatrix<f64>, normal: &DVector<f64>, mut x: DVector<f64>) -> DVector<f64> {
    let mut supp = support(&x);
    for _ in 0..IRL1_ITERATIONS {
        let top = x.amax().max(f64::MIN_POSITIVE);
        let w: Vec<f64> = x
            .iter()
            .map(|v| 1.0 / (v.abs() / top + IRL1_EPSILON))
            .collect();
        let Some(a) = weighted_l1(z, &w, normal) else {
            break;
        };
        let next = z * a;
        let next_supp = support(&next);
        if next_supp.len() > supp.len() {
            break;
        }
        let stable = next_supp == supp;
        x = next;
        supp = next_supp;
        if stable {
            break;
        }
    }
    x
}

/// Exact null vector of `gt` restricted to the rows in `supp`, when unique.
fn polish(gt: &DMatrix<f64>, x: &DVector<f64>, supp: &[usize]) -> DVector<f64> {
    let sub = DMatrix::from_fn(gt.nrows(), supp.len(), |r, c| gt[(r, supp[c])]);
    let basis = nullspace_basis(&sub, tolerance::RANK);
    let mut out = DVector::zeros(x.len());
    let xs = DVector::from_fn(supp.len(), |i, _| x[supp[i]]);
    // Project the restricted vector onto the restricted null space.
    let projected = &basis * (basis.transpose() * xs);
    for (k, &i) in supp.iter().enumerate() {
        out[i] = projected[k];
    }
    out
}

fn finish(gt: &DMatrix<f64>, split: &NullSplit, x: DVector<f64>) -> Option<SparseNullResult> {
    let supp = support(&x);
    if supp.is_empty() {
        return None;
    }
    let x = polish(gt, &x, &supp);
    let norm = x.norm();
    let c = split.independent_part(&x);
    if norm == 0.0 || c < INDEPENDENCE * norm {
        return None;
    }
    let mut x = x / c;
    let supp = support(&x);
    if x[supp[0]] < 0.0 {
        x = -x;
    }
    let residual = (gt * &x).norm();
    Some(SparseNullResult {
        x,
        support: supp,
        residual,
    })
}

fn better(a: &SparseNullResult, b: &SparseNullResult) -> bool {
    (a.support.len(), &a.support) < (b.support.len(), &b.support)
}

/// Sparsest vector in `NullSpace(gt)` independent of `prior`, normalised so
/// that its component outside `span(prior)` has unit norm.
///
/// Candidates come from an ℓ1 sweep (one linear program per coordinate and
/// per complement direction), refined by reweighted ℓ1. Inside the
/// arbitration bound the circuit oracle has the final word.
pub fn sparsest_independent_null_vector(
    gt: &DMatrix<f64>,
    prior: &[DVector<f64>],
) -> Result<SparseNullResult> {
    let split = NullSplit::new(gt, prior)?;
    let (m, d) = split.z.shape();
    let mut normals: Vec<DVector<f64>> = (0..m)
        .filter(|&k| split.z.row(k).norm() > tolerance::ZERO)
        .map(|k| split.z.row(k).transpose())
        .collect();
    normals.extend(split.complement.column_iter().map(|c| c.into_owned()));
    let ones = vec![1.0; m];

    let mut candidates: Vec<(SparseNullResult, DVector<f64>)> = Vec::new();
    for normal in &normals {
        if let Some(a) = weighted_l1(&split.z, &ones, normal) {
            if let Some(r) = finish(gt, &split, &split.z * a) {
                if !candidates.iter().any(|(c, _)| c.support == r.support) {
                    candidates.push((r, normal.clone()));
                }
            }
        }
    }
    candidates.sort_by(|(a, _), (b, _)| {
        (a.support.len(), &a.support).cmp(&(b.support.len(), &b.support))
    });
    let mut best: Option<SparseNullResult> = None;
    for (cand, normal) in candidates.iter().take(4) {
        let refined = finish(gt, &split, reweight(&split.z, normal, cand.x.clone()));
        for r in [Some(cand.clone()), refined].into_iter().flatten() {
            if best.as_ref().is_none_or(|b| better(&r, b)) {
                best = Some(r);
            }
        }
    }
    if best.is_none() {
        // The sweep can only miss when every LP failed; fall back to a plain
        // complement direction.
        best = finish(gt, &split, &split.z * split.complement.column(0));
    }
    let mut best = best.ok_or(Error::NoIndependentNullVector(prior.len()))?;

    if m <= ARBITRATION_BOUND && d > 0 {
        if let Some(exact) = oracle_choice(gt, &split)? {
            if exact.support != best.support {
                best = exact;
            }
        }
    }
    Ok(best)
}

/// The smallest circuit whose vector is independent of the prior span, ties
/// broken lexicographically.
fn oracle_choice(gt: &DMatrix<f64>, split: &NullSplit) -> Result<Option<SparseNullResult>> {
    let circuits = minimal_dependent_rowset_oracle(&gt.transpose())?;
    for c in circuits {
        let sub = DMatrix::from_fn(gt.nrows(), c.len(), |r, k| gt[(r, c[k])]);
        let basis = nullspace_basis(&sub, tolerance::RANK);
        if basis.ncols() != 1 {
            continue;
        }
        let mut x = DVector::zeros(gt.ncols());
        for (k, &i) in c.iter().enumerate() {
            x[i] = basis[(k, 0)];
        }
        if let Some(r) = finish(gt, split, x) {
            if r.support == c {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}
