//! Locally constant matrix generators, overflow-safe cocycle products and
//! exterior powers.

pub mod compound;
mod generator;
pub mod linalg;
mod scaled;

use thiserror::Error;

use crate::base_dynamics::{DynamicsError, Word};

pub use compound::{compound, exterior_generator};
pub use generator::{MatrixGenerator, MAX_DIM, MAX_TABLE_SLOTS};
pub use linalg::Matrix;
pub use scaled::ScaledMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CocycleError {
    #[error("window {0} is not in the generator table")]
    InadmissibleWindow(Word),
    #[error("invalid generator table: {0}")]
    InvalidTable(String),
    #[error("matrix at window {0} is singular")]
    SingularWindow(Word),
    #[error("exterior degree {degree} outside 1..={dim}")]
    InvalidExteriorDegree { degree: usize, dim: usize },
    #[error("product of length {0} exceeds the budget")]
    ProductTooLong(usize),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
