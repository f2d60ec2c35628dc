use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::tolerance;

/// Full singular value decomposition `m = U·diag(s)·Vᵀ`, `s` descending.
///
/// Computed with faer: nalgebra's bidiagonal QR occasionally returns
/// factors that do not reproduce rank-deficient inputs.
struct Svd {
    u: DMatrix<f64>,
    s: Vec<f64>,
    v: DMatrix<f64>,
}

fn decompose(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: DMatrix::identity(rows, rows),
            s: Vec::new(),
            v: DMatrix::identity(cols, cols),
        };
    }
    let a = Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = a.svd().expect("SVD of a finite matrix");
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    Svd {
        u: DMatrix::from_fn(rows, rows, |i, j| u[(i, j)]),
        s: (0..rows.min(cols)).map(|i| s[i]).collect(),
        v: DMatrix::from_fn(cols, cols, |i, j| v[(i, j)]),
    }
}

/// Zero cutoff `tol · σ_max · max(m, n)`.
pub fn rank_cutoff(singular_values: &[f64], rows: usize, cols: usize, tol: f64) -> f64 {
    let smax = singular_values.iter().copied().fold(0.0, f64::max);
    tol * smax * rows.max(cols) as f64
}

fn kept(svd: &Svd, rows: usize, cols: usize, tol: f64) -> usize {
    let cut = rank_cutoff(&svd.s, rows, cols, tol);
    svd.s.iter().filter(|&&v| v > cut).count()
}

/// Numerical rank with the `ε_rank` rule.
pub fn rank(m: &DMatrix<f64>) -> usize {
    rank_with(m, tolerance::RANK)
}

pub fn rank_with(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    kept(&decompose(m), m.nrows(), m.ncols(), tol)
}

/// Orthonormal basis of the null space of `m`, one vector per column.
pub fn nullspace_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = decompose(m);
    let r = kept(&svd, m.nrows(), m.ncols(), tol);
    svd.v.columns(r, m.ncols() - r).into_owned()
}

/// Orthonormal basis of the column space of `m`.
pub fn column_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = decompose(m);
    let r = kept(&svd, m.nrows(), m.ncols(), tolerance::RANK);
    svd.u.columns(0, r).into_owned()
}

/// Moore–Penrose pseudo-inverse with the relative cutoff `tol`.
pub fn pseudoinverse(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let svd = decompose(m);
    let mut out = DMatrix::zeros(cols, rows);
    for i in 0..kept(&svd, rows, cols, tol) {
        out += (svd.v.column(i) / svd.s[i]) * svd.u.column(i).transpose();
    }
    out
}

/// Least-squares residual norm `min_x ‖A x − b‖`, computed by projection onto
/// the column space of `A`.
pub fn lstsq_residual(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    if a.ncols() == 0 || a.nrows() == 0 {
        return b.norm();
    }
    let q = column_basis(a);
    (b - &q * (q.transpose() * b)).norm()
}
