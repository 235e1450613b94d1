//! Semi-invertible matrix cocycles over subshifts of finite type.
//!
//! The crate builds locally constant matrix cocycles `A: M -> M(d, R)` over a
//! two-sided subshift of finite type and provides:
//!
//! * exact symbolic dynamics: points, shift, metric, periodic orbits and the
//!   periodic shadowing / closing constructions ([`base_dynamics`]);
//! * overflow-safe cocycle products and exterior powers ([`cocycle`]);
//! * Lyapunov spectra, including `-inf` exponents, and uniform growth bounds
//!   ([`lyapunov`]);
//! * an invertibility certificate driven by the exponents of periodic measures
//!   ([`certify`]);
//! * the periodic obstruction and a cylinder-wise solver for the coboundary
//!   equation `A(x) = P(f(x)) P(x)^{-1}` ([`livsic`]);
//! * JSON configuration and the `cocyclelab` command runner ([`cli`]).

pub mod base_dynamics;
pub mod cocycle;
pub mod lyapunov;
pub mod certify;
pub mod livsic;
pub mod cli;

mod serde_ext;
