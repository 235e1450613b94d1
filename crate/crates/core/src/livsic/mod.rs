//! The coboundary equation `A(x) = P(f(x)) P(x)^{-1}`: the periodic obstruction
//! `A^n(p) = Id`, a cylinder-wise solver along a transitive orbit, verification,
//! and the inverse-Hölder estimate for `A^{-1}`.

mod holder;
mod obstruction;
mod solve;
mod transfer;

use thiserror::Error;

use crate::base_dynamics::{DynamicsError, PeriodicOrbit, Word};
use crate::cocycle::CocycleError;

pub use holder::{inverse_holder_bound, InverseHolder};
pub use obstruction::{check_periodic_obstruction, default_obstruction_tol, ObstructionReport};
pub use solve::{
    solve_coboundary, solve_coboundary_with, verify_coboundary, CoboundaryCheck, SolveOptions,
};
pub use transfer::TransferTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LivsicError {
    #[error("periodic obstruction fails at orbit {} with defect {defect:e}", orbit.word())]
    ObstructionFailed { orbit: PeriodicOrbit, defect: f64 },
    #[error("{missing} cylinders unvisited, first is {first}")]
    CoverageIncomplete { missing: usize, first: Word },
    #[error("matrix at window {0} is singular")]
    SingularWindow(Word),
    #[error("invalid transfer table: {0}")]
    InvalidTable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
