//! Invertibility certificates from exponents of periodic measures.
//!
//! If `rho + tau < alpha theta / c` and every ergodic measure has
//! `-tau <= gamma_1 + ... + gamma_d <= rho`, then `A(x)` is invertible for every `x`.
//! Only periodic measures are enumerable, so the scan below is evidence up to
//! `max_period`, not a proof over all measures.

mod contradiction;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::base_dynamics::{DynamicsError, PeriodicOrbit, Word};
use crate::cocycle::{linalg, CocycleError, MatrixGenerator};
use crate::lyapunov::{sum_exponents, LyapunovError, SumTarget};
use crate::serde_ext;

pub use contradiction::{
    singularity_contradiction, weakest_window, ContradictionOutcome, ContradictionReport, ContradictionRow,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("invalid certificate input: {0}")]
    InvalidInput(String),
    #[error("growth hypothesis unavailable: {0}")]
    HypothesisUnavailable(String),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// The data `(rho, tau, alpha, theta, c)` of the certificate and the scan depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateInput {
    pub rho: f64,
    pub tau: f64,
    pub alpha: f64,
    pub theta: f64,
    /// Period growth factor of the shadowing construction, `k_n <= c n + S`.
    pub c: f64,
    pub max_period: usize,
}

impl CertificateInput {
    /// `alpha` and `theta` taken from the generator, `c = 2`.
    pub fn for_generator(g: &MatrixGenerator, rho: f64, tau: f64, max_period: usize) -> Self {
        CertificateInput {
            rho,
            tau,
            alpha: g.alpha(),
            theta: g.sft().theta(),
            c: 2.0,
            max_period,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<(), CertifyError> {
        let mut problems = Vec::new();
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            problems.push(format!("rho = {} must be finite and >= 0", self.rho));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            problems.push(format!("tau = {} must be finite and >= 0", self.tau));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            problems.push(format!("alpha = {} must lie in (0, 1]", self.alpha));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            problems.push(format!("theta = {} must be finite and > 0", self.theta));
        }
        if !(self.c.is_finite() && self.c >= 1.0) {
            problems.push(format!("c = {} must be finite and >= 1", self.c));
        }
        if self.max_period == 0 {
            problems.push("max_period must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CertifyError::InvalidInput(problems.join("; ")))
        }
    }

    /// `rho + tau`.
    pub fn bound_lhs(&self) -> f64 {
        self.rho + self.tau
    }

    /// `alpha theta / c`.
    pub fn bound_rhs(&self) -> f64 {
        self.alpha * self.theta / self.c
    }

    pub fn bound_ok(&self) -> bool {
        self.bound_lhs() < self.bound_rhs()
    }
}

/// The exponent sum of one periodic measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub orbit: PeriodicOrbit,
    pub period: usize,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicScan {
    pub max_period: usize,
    pub records: Vec<ScanRecord>,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub min: f64,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub max: f64,
}

/// `(1/k) log |det A^k(p)|` for every canonical orbit of least period `k <= max_period`.
pub fn periodic_exponent_scan(g: &MatrixGenerator, max_period: usize) -> Result<PeriodicScan, CertifyError> {
    let orbits = g.sft().enumerate_periodic_orbits(max_period)?;
    let records = orbits
        .into_par_iter()
        .map(|orbit| {
            let sum = sum_exponents(g, SumTarget::Orbit(&orbit))?;
            Ok(ScanRecord {
                period: orbit.period(),
                orbit,
                sum,
            })
        })
        .collect::<Result<Vec<_>, LyapunovError>>()?;
    let min = records.iter().map(|r| r.sum).fold(f64::INFINITY, f64::min);
    let max = records.iter().map(|r| r.sum).fold(f64::NEG_INFINITY, f64::max);
    Ok(PeriodicScan {
        max_period,
        records,
        min,
        max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rejection {
    /// `rho + tau >= alpha theta / c`: the theorem does not apply.
    Bound { lhs: f64, rhs: f64 },
    /// A periodic measure with exponent sum below `-tau`.
    Lower {
        orbit: PeriodicOrbit,
        #[serde(serialize_with = "serde_ext::ext_real")]
        sum: f64,
    },
    /// A periodic measure with exponent sum above `rho`.
    Upper {
        orbit: PeriodicOrbit,
        #[serde(serialize_with = "serde_ext::ext_real")]
        sum: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Rejected(Rejection),
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified)
    }
}

/// Exhaustive determinant check over the window table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub invertible: bool,
    pub windows_checked: usize,
    pub singular_windows: Vec<Word>,
}

/// `A(x)` is invertible for every `x` iff every table entry is; singularity is
/// relative, `sigma_min <= 1e-12 sigma_max`, with exact zeros always singular.
pub fn verify_invertibility_ground_truth(g: &MatrixGenerator) -> GroundTruth {
    let entries = g.entries();
    let singular_windows: Vec<Word> = entries
        .iter()
        .filter(|(_, m)| linalg::is_singular(m))
        .map(|(w, _)| w.clone())
        .collect();
    GroundTruth {
        invertible: singular_windows.is_empty(),
        windows_checked: entries.len(),
        singular_windows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvertibilityCertificate {
    pub input: CertificateInput,
    pub bound_lhs: f64,
    pub bound_rhs: f64,
    pub bound_ok: bool,
    /// Orbits are scanned up to `max(max_period, 2r + S)`, which reaches every window.
    pub scan_depth: usize,
    pub scan: PeriodicScan,
    pub verdict: Verdict,
    pub ground_truth: GroundTruth,
}

/// Runs the bound check and the periodic scan and decides the verdict.
///
/// The bound is checked first; otherwise the first orbit in scan order (period,
/// then word) violating `-tau <= sum <= rho` is the witness. A certificate is a
/// sufficient condition only: rejection does not imply a singular window.
pub fn certify_invertibility(
    g: &MatrixGenerator,
    input: &CertificateInput,
) -> Result<InvertibilityCertificate, CertifyError> {
    input.validate()?;
    // every window w sits on a periodic orbit of period at most |w| + S - 1
    let reach = 2 * g.radius() + g.sft().mixing_constant();
    let scan_depth = input.max_period.max(reach);
    let scan = periodic_exponent_scan(g, scan_depth)?;
    let verdict = if !input.bound_ok() {
        Verdict::Rejected(Rejection::Bound {
            lhs: input.bound_lhs(),
            rhs: input.bound_rhs(),
        })
    } else {
        scan.records
            .iter()
            .find_map(|r| {
                if r.sum < -input.tau {
                    Some(Rejection::Lower {
                        orbit: r.orbit.clone(),
                        sum: r.sum,
                    })
                } else if r.sum > input.rho {
                    Some(Rejection::Upper {
                        orbit: r.orbit.clone(),
                        sum: r.sum,
                    })
                } else {
                    None
                }
            })
            .map_or(Verdict::Certified, Verdict::Rejected)
    };
    Ok(InvertibilityCertificate {
        input: *input,
        bound_lhs: input.bound_lhs(),
        bound_rhs: input.bound_rhs(),
        bound_ok: input.bound_ok(),
        scan_depth,
        scan,
        verdict,
        ground_truth: verify_invertibility_ground_truth(g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_dynamics::Sft;
    use crate::cocycle::Matrix;

    fn rotations() -> MatrixGenerator {
        MatrixGenerator::rotation_by_symbol(Sft::full_shift(2), &[0.3, 1.7], None).unwrap()
    }

    fn singular() -> MatrixGenerator {
        MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn scan_examples() {
        let s = Sft::full_shift(2);
        let id = MatrixGenerator::identity(s, 2).unwrap();
        let scan = periodic_exponent_scan(&id, 4).unwrap();
        assert_eq!((scan.min, scan.max), (0.0, 0.0));
        assert_eq!(scan.records.len(), 2 + 1 + 2 + 3);

        let scan = periodic_exponent_scan(&rotations(), 5).unwrap();
        assert!(scan.min.abs() < 1e-15 && scan.max.abs() < 1e-15);

        let scan = periodic_exponent_scan(&singular(), 3).unwrap();
        assert_eq!(scan.min, f64::NEG_INFINITY);
        for r in &scan.records {
            let has_zero = r.orbit.word().symbols().contains(&0);
            assert_eq!(r.sum == f64::NEG_INFINITY, has_zero, "{}", r.orbit.word());
        }
    }

    #[test]
    fn certificate_examples() {
        let g = rotations();
        let input = CertificateInput::for_generator(&g, 0.01, 0.01, 6);
        let cert = certify_invertibility(&g, &input).unwrap();
        assert!(cert.bound_ok);
        assert!((cert.bound_rhs - std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
        assert_eq!(cert.verdict, Verdict::Certified);
        assert!(cert.ground_truth.invertible);

        // 0.2 < ln 2 / 2 = 0.3466 still leaves room
        let input = CertificateInput::for_generator(&g, 0.1, 0.1, 6);
        assert!(certify_invertibility(&g, &input).unwrap().verdict.is_certified());
        // 0.4 >= 0.3466
        let input = CertificateInput::for_generator(&g, 0.2, 0.2, 6);
        let cert = certify_invertibility(&g, &input).unwrap();
        assert!(matches!(cert.verdict, Verdict::Rejected(Rejection::Bound { .. })));

        let g = singular();
        let input = CertificateInput::for_generator(&g, 0.01, 0.01, 4);
        let cert = certify_invertibility(&g, &input).unwrap();
        match cert.verdict {
            Verdict::Rejected(Rejection::Lower { orbit, sum }) => {
                assert_eq!(orbit.word().to_string(), "0");
                assert_eq!(sum, f64::NEG_INFINITY);
            }
            v => panic!("unexpected verdict {v:?}"),
        }
        assert!(!cert.ground_truth.invertible);
        assert_eq!(cert.ground_truth.singular_windows[0].to_string(), "0");
    }

    #[test]
    fn upper_violation_and_one_sided_factor() {
        let g = MatrixGenerator::constant(Sft::full_shift(2), Matrix::identity(2, 2) * 1.2).unwrap();
        let input = CertificateInput::for_generator(&g, 0.1, 0.1, 3).with_c(1.0);
        assert!(input.bound_ok());
        let cert = certify_invertibility(&g, &input).unwrap();
        assert!(matches!(cert.verdict, Verdict::Rejected(Rejection::Upper { .. })));
        // invertible everywhere even though the certificate says no
        assert!(cert.ground_truth.invertible);
    }

    #[test]
    fn scan_reaches_every_window() {
        // radius 1 singular window "010" is only visible on orbits of period >= 2
        let s = Sft::full_shift(2);
        let g = MatrixGenerator::from_fn(s, 1, 1, 1.0, |w| {
            Matrix::from_element(1, 1, if w.to_string() == "010" { 0.0 } else { 1.0 })
        })
        .unwrap();
        let input = CertificateInput::for_generator(&g, 0.01, 0.01, 1);
        let cert = certify_invertibility(&g, &input).unwrap();
        assert_eq!(cert.scan_depth, 3);
        assert!(!cert.verdict.is_certified());
    }

    #[test]
    fn invalid_input_lists_everything() {
        let g = rotations();
        let mut input = CertificateInput::for_generator(&g, -1.0, f64::NAN, 0);
        input.c = 0.5;
        let err = input.validate().unwrap_err().to_string();
        for key in ["rho", "tau", "c =", "max_period"] {
            assert!(err.contains(key), "{err}");
        }
    }

    #[test]
    fn verdict_json_shape() {
        let v = Verdict::Rejected(Rejection::Bound { lhs: 0.2, rhs: 0.1 });
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"status":"rejected","reason":{"kind":"bound","lhs":0.2,"rhs":0.1}}"#
        );
        assert_eq!(serde_json::to_string(&Verdict::Certified).unwrap(), r#"{"status":"certified"}"#);
    }
}
