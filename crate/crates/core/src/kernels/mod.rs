//! Linear-algebra primitives and the two sparse-recovery solvers, each with
//! an exhaustive oracle for small inputs.

mod linalg;
mod oracle;
mod row_sparse;
mod sparse_null;

pub use linalg::{
    column_basis, lstsq_residual, nullspace_basis, pseudoinverse, rank, rank_cutoff, rank_with,
};
pub use oracle::{minimal_dependent_rowset_oracle, support, CIRCUIT_ORACLE_BOUND};
pub use row_sparse::{
    restricted_misfit, row_sparse_fit, row_sparse_oracle, GroupedSystem, RowSparseResult,
    GROUP_ORACLE_BOUND,
};
pub use sparse_null::{sparsest_independent_null_vector, SparseNullResult, ARBITRATION_BOUND};
