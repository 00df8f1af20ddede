//! Exact integer linear algebra and finitely generated abelian groups.

mod group;
mod matrix;
mod snf;

pub use group::{AbGroup, AbGroupParseError, Rank};
pub use matrix::{determinant, DetSign, ExactError, IntMatrix};
pub use snf::{
    coker_with_coefficients, cokernel, kernel_rank, kernel_with_coefficients, rank, smith_normal_form,
    SnfResult,
};

/// True iff the two descriptors present isomorphic groups.
pub fn groups_isomorphic(a: &AbGroup, b: &AbGroup) -> bool {
    a == b
}
