//! Exhaustive search for the minimal dependent row sets (the circuits of the
//! row matroid) of small matrices.

use nalgebra::{DMatrix, DVector};

use super::linalg::{nullspace_basis, rank};
use crate::error::{Error, Result};
use crate::tolerance;

/// Largest row count the circuit oracle accepts.
pub const CIRCUIT_ORACLE_BOUND: usize = 22;

/// Row indices `i` with `|x_i| > τ_zero · ‖x‖∞`.
pub fn support(x: &DVector<f64>) -> Vec<usize> {
    let top = x.amax();
    if top == 0.0 {
        return Vec::new();
    }
    (0..x.len())
        .filter(|&i| x[i].abs() > tolerance::ZERO * top)
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Visits every `k`-subset of `items` in lexicographic order until `visit`
/// returns false.
pub(crate) fn for_each_combination(
    items: &[usize],
    k: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) {
    if k > items.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        if !visit(&buf) {
            return;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < items.len() - k + pos {
                break;
            }
        }
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn rows_of(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|i| big.binary_search(i).is_ok())
}

/// All inclusion-minimal row subsets `S` of `m` with `rank(m_S) < |S|`,
/// sorted by size and then lexicographically.
///
/// Two exact enumerations are available: growing row subsets by size, or
/// fixing `d − 1` coordinates of a `d`-dimensional left null space to zero.
/// The cheaper one for the instance is used.
pub fn minimal_dependent_rowset_oracle(m: &DMatrix<f64>) -> Result<Vec<Vec<usize>>> {
    if m.nrows() > CIRCUIT_ORACLE_BOUND {
        return Err(Error::OracleBound {
            size: m.nrows(),
            bound: CIRCUIT_ORACLE_BOUND,
        });
    }
    let z = nullspace_basis(&m.transpose(), tolerance::RANK);
    let d = z.ncols();
    if d == 0 {
        return Ok(Vec::new());
    }
    let active: Vec<usize> = (0..m.nrows())
        .filter(|&i| z.row(i).norm() > tolerance::ZERO)
        .collect();
    let max_size = (active.len() - d + 1).min(active.len());
    let by_size: f64 = (1..=max_size).map(|s| binomial(active.len(), s)).sum();
    let by_zeros = binomial(active.len(), d - 1);
    let mut out = if by_zeros <= by_size {
        circuits_by_zero_sets(&z, &active)
    } else {
        circuits_by_size(m, &active, max_size)
    };
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

pub(crate) fn circuits_by_size(
    m: &DMatrix<f64>,
    active: &[usize],
    max_size: usize,
) -> Vec<Vec<usize>> {
    let mut found: Vec<Vec<usize>> = Vec::new();
    for s in 1..=max_size {
        let mut fresh = Vec::new();
        for_each_combination(active, s, |set| {
            if !found.iter().any(|c| is_subset(c, set)) && rank(&rows_of(m, set)) < s {
                fresh.push(set.to_vec());
            }
            true
        });
        found.extend(fresh);
    }
    found
}

pub(crate) fn circuits_by_zero_sets(z: &DMatrix<f64>, active: &[usize]) -> Vec<Vec<usize>> {
    let d = z.ncols();
    let mut found: Vec<Vec<usize>> = Vec::new();
    for_each_combination(active, d - 1, |zeros| {
        let zt = rows_of(z, zeros);
        let coeffs = nullspace_basis(&zt, tolerance::RANK);
        if coeffs.ncols() == 1 {
            let s = support(&(z * coeffs.column(0)));
            if !s.is_empty() && !found.contains(&s) {
                found.push(s);
            }
        }
        true
    });
    let minimal: Vec<Vec<usize>> = found
        .iter()
        .filter(|s| !found.iter().any(|t| t.len() < s.len() && is_subset(t, s)))
        .cloned()
        .collect();
    minimal
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_rows_one_circuit() {
        let m = DMatrix::from_row_slice(3, 2, &[1., 0., 0., 1., 1., 1.]);
        assert_eq!(
            minimal_dependent_rowset_oracle(&m).unwrap(),
            vec![vec![0, 1, 2]]
        );
    }

    #[test]
    fn duplicated_rows() {
        let m = DMatrix::from_row_slice(3, 3, &[1., 2., 3., 0., 1., 0., 1., 2., 3.]);
        assert_eq!(
            minimal_dependent_rowset_oracle(&m).unwrap(),
            vec![vec![0, 2]]
        );
    }

    #[test]
    fn zero_row_is_a_singleton_circuit() {
        let m = DMatrix::from_row_slice(2, 2, &[1., 0., 0., 0.]);
        assert_eq!(minimal_dependent_rowset_oracle(&m).unwrap(), vec![vec![1]]);
    }

    #[test]
    fn bound_is_enforced() {
        let m = DMatrix::<f64>::zeros(23, 2);
        assert!(matches!(
            minimal_dependent_rowset_oracle(&m),
            Err(Error::OracleBound { .. })
        ));
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_combination(&[1, 4, 7, 9], 2, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen, [[1, 4], [1, 7], [1, 9], [4, 7], [4, 9], [7, 9]]);
    }

    #[test]
    fn both_enumerations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let rows = rng.random_range(4..12);
            let cols = rng.random_range(2..7);
            let mut m = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
            // Sparse structure so that circuits are small and varied.
            for i in 0..rows {
                for j in 0..cols {
                    if rng.random_bool(0.5) {
                        m[(i, j)] = 0.0;
                    }
                }
            }
            let z = nullspace_basis(&m.transpose(), tolerance::RANK);
            if z.ncols() == 0 {
                continue;
            }
            let active: Vec<usize> = (0..rows)
                .filter(|&i| z.row(i).norm() > tolerance::ZERO)
                .collect();
            let mut a = circuits_by_size(&m, &active, active.len());
            let mut b = circuits_by_zero_sets(&z, &active);
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }
}
