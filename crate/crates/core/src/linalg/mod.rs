//! Numerical kernel: compressed-column sparse matrices, a left-looking sparse
//! LU with partial pivoting, and a dense nonsymmetric eigensolver.

mod dense;
mod eigen;
mod lu;
mod order;
mod sparse;

pub use dense::DenseMatrix;
pub use eigen::{dense_eigenvalues, eigen_residual};
pub use lu::{factorize, sparse_lu_solve, LuFactors, Symbolic};
pub use order::minimum_degree;
pub use sparse::{csc_from_triplets, Csc};

use num_complex::Complex64;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LinalgError {
    #[error("index ({row}, {col}) outside {nrows}x{ncols} matrix")]
    OutOfBounds { row: usize, col: usize, nrows: usize, ncols: usize },
    #[error("slot {slot} not registered in pattern with {nnz} entries")]
    UnregisteredSlot { slot: usize, nnz: usize },
    #[error("matrix is not square ({nrows}x{ncols})")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("numerically singular matrix: zero pivot at column {pivot}")]
    Singular { pivot: usize },
    #[error("symbolic analysis does not match the matrix pattern")]
    PatternMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

/// Damping ratio of an eigenvalue; a zero eigenvalue counts as fully damped.
pub fn damping_ratio(l: Complex64) -> f64 {
    let m = l.norm();
    if m == 0.0 {
        1.0
    } else {
        -l.re / m
    }
}
