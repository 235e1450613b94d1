//! Lyapunov spectra with multiplicities and `-inf` values, exponents of periodic
//! measures, and the uniform growth bound `||A^n(x)|| <= C_eps e^{(rho + eps) n}`.

mod estimate;
mod growth;
mod measure;
mod spectrum;

use thiserror::Error;

use crate::base_dynamics::{DynamicsError, Word};
use crate::cocycle::CocycleError;

pub use estimate::{estimate_spectrum, BATCH_LEN};
pub use growth::{exact_sup_log_norm, find_uniform_n, growth_constant, sup_log_norm_profile, GrowthBound, SupNorm};
pub use measure::{ErgodicMeasure, MeasureKind};
pub use spectrum::{periodic_spectrum, sum_exponents, ExponentGroup, LyapunovSpectrum, SpectrumRecord, SumTarget};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LyapunovError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("orbit {0} is not admissible for the generator's shift")]
    InadmissibleOrbit(Word),
    #[error("no uniform N <= {0}: the growth hypothesis likely fails")]
    NotFound(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
