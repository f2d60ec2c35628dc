//! Group-sparse fitting of `B X ≈ F`: find `X` leaving as many row groups
//! exactly satisfied as possible.
//!
//! Columns of `B` whose support lies inside a single group only ever help
//! that group, so they are projected out per group up front. What remains
//! is a small system in the shared columns.

use nalgebra::DMatrix;

use super::linalg::{column_basis, pseudoinverse};
use crate::error::{Error, Result};
use crate::tolerance;

/// Largest group count the exhaustive oracle accepts.
pub const GROUP_ORACLE_BOUND: usize = 16;

const IRLS_ITERATIONS: usize = 50;
const IRLS_SMOOTHING: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RowSparseResult {
    /// Coefficients `X*` (columns of `B` by columns of `F`).
    pub x: DMatrix<f64>,
    /// Groups whose rows of `B X* − F` vanish, ascending.
    pub zero_groups: Vec<usize>,
    /// `ℓ2` norm of each group's rows of `B X* − F`.
    pub group_norms: Vec<f64>,
}

/// Per-group data after eliminating the group-local columns of `B`.
#[derive(Debug, Clone)]
pub struct GroupedSystem {
    b: DMatrix<f64>,
    f: DMatrix<f64>,
    groups: Vec<Vec<usize>>,
    /// Shared columns of `B`, projected per group.
    shared: Vec<DMatrix<f64>>,
    /// Right-hand side, projected per group.
    rhs: Vec<DMatrix<f64>>,
    scale: f64,
}

fn rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])
}

fn cols(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])])
}

impl GroupedSystem {
    pub fn new(b: &DMatrix<f64>, f: &DMatrix<f64>, groups: &[Vec<usize>]) -> Result<Self> {
        if b.nrows() != f.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "B has {} rows, F has {}",
                b.nrows(),
                f.nrows()
            )));
        }
        let mut owner = vec![usize::MAX; b.nrows()];
        for (g, idx) in groups.iter().enumerate() {
            for &r in idx {
                if r >= b.nrows() || owner[r] != usize::MAX {
                    return Err(Error::ShapeMismatch(
                        "groups must partition the rows".into(),
                    ));
                }
                owner[r] = g;
            }
        }
        if owner.iter().any(|&o| o == usize::MAX) {
            return Err(Error::ShapeMismatch(
                "groups must partition the rows".into(),
            ));
        }
        let col_scale = b.abs().max().max(f64::MIN_POSITIVE);
        let mut local: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
        let mut shared_cols = Vec::new();
        for c in 0..b.ncols() {
            let touched: Vec<usize> = (0..b.nrows())
                .filter(|&r| b[(r, c)].abs() > 1e-12 * col_scale)
                .map(|r| owner[r])
                .collect();
            match touched.first() {
                None => {}
                Some(&g) if touched.iter().all(|&h| h == g) => local[g].push(c),
                Some(_) => shared_cols.push(c),
            }
        }
        let b_shared = cols(b, &shared_cols);
        let mut shared = Vec::with_capacity(groups.len());
        let mut rhs = Vec::with_capacity(groups.len());
        for (g, idx) in groups.iter().enumerate() {
            let l = column_basis(&rows(&cols(b, &local[g]), idx));
            let project = |m: DMatrix<f64>| &m - &l * (l.transpose() * &m);
            shared.push(project(rows(&b_shared, idx)));
            rhs.push(project(rows(f, idx)));
        }
        Ok(GroupedSystem {
            b: b.clone(),
            f: f.clone(),
            groups: groups.to_vec(),
            shared,
            rhs,
            scale: f.norm().max(1.0),
        })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    fn stacked(&self, set: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n: usize = set.iter().map(|&g| self.shared[g].nrows()).sum();
        let (k, p) = (self.shared.first().map_or(0, |s| s.ncols()), self.f.ncols());
        let mut a = DMatrix::zeros(n, k);
        let mut r = DMatrix::zeros(n, p);
        let mut at = 0;
        for &g in set {
            let h = self.shared[g].nrows();
            a.view_mut((at, 0), (h, k)).copy_from(&self.shared[g]);
            r.view_mut((at, 0), (h, p)).copy_from(&self.rhs[g]);
            at += h;
        }
        (a, r)
    }

    /// Least-squares misfit of the groups in `set` fitted jointly.
    pub fn misfit(&self, set: &[usize]) -> f64 {
        let (a, r) = self.stacked(set);
        if a.ncols() == 0 || a.nrows() == 0 {
            return r.norm();
        }
        let q = column_basis(&a);
        (&r - &q * (q.transpose() * &r)).norm()
    }

    /// Whether the groups in `set` can be satisfied simultaneously.
    pub fn consistent(&self, set: &[usize]) -> bool {
        self.misfit(set) <= tolerance::SOLVE * self.scale
    }

    /// Shared-column solution fitted on `set`, then per-group residual norms
    /// of every group (after the optimal local correction).
    fn residual_norms(&self, weights: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
        let k = self.shared.first().map_or(0, |s| s.ncols());
        let p = self.f.ncols();
        let mut lhs = DMatrix::zeros(k, k);
        let mut rhs = DMatrix::zeros(k, p);
        for g in 0..self.groups.len() {
            lhs += self.shared[g].transpose() * &self.shared[g] * weights[g];
            rhs += self.shared[g].transpose() * &self.rhs[g] * weights[g];
        }
        let x = pseudoinverse(&lhs, tolerance::RANK) * rhs;
        let norms = (0..self.groups.len())
            .map(|g| (&self.shared[g] * &x - &self.rhs[g]).norm())
            .collect();
        (x, norms)
    }

    /// Full coefficient matrix fitted on `set` and the resulting group norms
    /// of `B X − F`.
    fn fit_on(&self, set: &[usize]) -> (DMatrix<f64>, Vec<f64>) {
        let idx: Vec<usize> = set
            .iter()
            .flat_map(|&g| self.groups[g].iter().copied())
            .collect();
        let x = if idx.is_empty() {
            DMatrix::zeros(self.b.ncols(), self.f.ncols())
        } else {
            pseudoinverse(&rows(&self.b, &idx), tolerance::RANK) * rows(&self.f, &idx)
        };
        let r = &self.b * &x - &self.f;
        let norms = self.groups.iter().map(|idx| rows(&r, idx).norm()).collect();
        (x, norms)
    }
}

/// Largest consistent group set; among equal sizes the lexicographically
/// smallest. Depth-first over the (hereditary) family of consistent sets,
/// taking groups before skipping them, so the first maximum met is the
/// lexicographically smallest one.
pub fn row_sparse_oracle(
    b: &DMatrix<f64>,
    f: &DMatrix<f64>,
    groups: &[Vec<usize>],
) -> Result<Vec<usize>> {
    if groups.len() > GROUP_ORACLE_BOUND {
        return Err(Error::OracleBound {
            size: groups.len(),
            bound: GROUP_ORACLE_BOUND,
        });
    }
    let sys = GroupedSystem::new(b, f, groups)?;
    Ok(largest_consistent(&sys))
}

pub(crate) fn largest_consistent(sys: &GroupedSystem) -> Vec<usize> {
    let n = sys.group_count();
    let usable: Vec<bool> = (0..n).map(|g| sys.consistent(&[g])).collect();
    let mut best = Vec::new();
    let mut current = Vec::new();
    fn dfs(
        sys: &GroupedSystem,
        usable: &[bool],
        next: usize,
        current: &mut Vec<usize>,
        best: &mut Vec<usize>,
    ) {
        let n = usable.len();
        let remaining = (next..n).filter(|&g| usable[g]).count();
        if current.len() + remaining <= best.len() {
            return;
        }
        if next == n {
            *best = current.clone();
            return;
        }
        if usable[next] {
            current.push(next);
            if sys.consistent(current) {
                dfs(sys, usable, next + 1, current, best);
            }
            current.pop();
        }
        dfs(sys, usable, next + 1, current, best);
    }
    dfs(sys, &usable, 0, &mut current, &mut best);
    best
}

/// Greedy growth in the given order, keeping each group that stays
/// consistent with those already kept.
fn grow(sys: &GroupedSystem, order: &[usize]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for &g in order {
        kept.push(g);
        if !sys.consistent(&kept) {
            kept.pop();
        }
    }
    kept.sort_unstable();
    kept
}

/// Larger sets first, then lexicographically smaller ones.
fn preferred(a: &[usize], b: &[usize]) -> bool {
    a.len() > b.len() || (a.len() == b.len() && a < b)
}

/// Minimises the number of nonzero row groups of `B X − F`.
///
/// An `ℓ2,1` relaxation solved by iteratively reweighted least squares ranks
/// the groups; greedy rounding then grows a consistent set in that order.
/// Within the oracle bound the exhaustive answer is taken when it is larger
/// or, at equal size, lexicographically smaller.
pub fn row_sparse_fit(
    b: &DMatrix<f64>,
    f: &DMatrix<f64>,
    groups: &[Vec<usize>],
) -> Result<RowSparseResult> {
    let sys = GroupedSystem::new(b, f, groups)?;
    let n = sys.group_count();
    let mut weights = vec![1.0; n];
    let mut norms = vec![0.0; n];
    for _ in 0..IRLS_ITERATIONS {
        let (_, next) = sys.residual_norms(&weights);
        let change: f64 = next.iter().zip(&norms).map(|(a, b)| (a - b).abs()).sum();
        norms = next;
        weights = norms.iter().map(|r| 1.0 / (r + IRLS_SMOOTHING)).collect();
        if change <= tolerance::SOLVE {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)));
    let mut chosen = grow(&sys, &order);
    let natural = grow(&sys, &(0..n).collect::<Vec<_>>());
    if preferred(&natural, &chosen) {
        chosen = natural;
    }
    if n <= GROUP_ORACLE_BOUND {
        let exact = largest_consistent(&sys);
        if preferred(&exact, &chosen) {
            chosen = exact;
        }
    }
    let (x, group_norms) = sys.fit_on(&chosen);
    let zero_groups = (0..n)
        .filter(|&g| group_norms[g] <= tolerance::ZERO * sys.scale)
        .collect();
    Ok(RowSparseResult {
        x,
        zero_groups,
        group_norms,
    })
}

/// Residual norm of fitting `F` restricted to the rows of `set` by `B`.
pub fn restricted_misfit(b: &DMatrix<f64>, f: &DMatrix<f64>, row_set: &[usize]) -> f64 {
    let bs = rows(b, row_set);
    let fs = rows(f, row_set);
    if bs.ncols() == 0 || bs.nrows() == 0 {
        return fs.norm();
    }
    let q = column_basis(&bs);
    (&fs - &q * (q.transpose() * &fs)).norm()
}
