//! Two-sided subshifts of finite type: exact points, shift, metric, periodic
//! orbits, and the constructive shadowing and closing objects.

mod orbit;
mod point;
mod sft;
mod shadow;
mod word;

use thiserror::Error;

pub use orbit::PeriodicOrbit;
pub use point::{Distance, SymbolicPoint, MAX_CORE_OFFSET};
pub use sft::{Sft, DEFAULT_BUDGET};
pub use shadow::{
    anosov_close, shadow_segment, transitive_point, Closing, ClosingWitness, Shadow, ShadowCheck,
};
pub use word::{Word, WordParseError, MAX_TEXT_ALPHABET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("invalid shift: {0}")]
    InvalidSft(String),
    #[error("transition matrix is not primitive")]
    NotPrimitive,
    #[error("enumeration needs {needed} words but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("word {0} cannot be closed into a periodic orbit")]
    NotClosable(Word),
    #[error("word {0} is not admissible")]
    InadmissibleWord(Word),
    #[error("inadmissible point: {0}")]
    InadmissiblePoint(String),
}
