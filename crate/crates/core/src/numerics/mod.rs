//! Dense small-matrix linear algebra and seeded randomness.

mod eigen;
mod matrix;
mod norms;
mod rng;
mod solve;

pub use eigen::{singular_values, smallest_singular_value, symmetric_eigen, SymmetricEigen};
pub use matrix::{DenseMatrix, DenseVector};
pub use norms::{
    frobenius_norm, induced_inf_norm, induced_one_norm, max_abs_entry, max_row_sumsq,
    spectral_norm,
};
pub use rng::{SeededRng, UnitSource};
pub use solve::{solve_linear, LinearSolution, DEFAULT_CONDITION_CAP};
