use rayon::prelude::*;
use serde::Serialize;

use crate::base_dynamics::PeriodicOrbit;
use crate::cocycle::{linalg, Matrix, MatrixGenerator};
use crate::serde_ext;

use super::LivsicError;

/// Entries that are dyadic rationals with at most this many fractional bits count as exact.
const EXACT_FRACTION_BITS: i32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub passed: bool,
    pub tol: f64,
    pub max_period: usize,
    pub orbits_checked: usize,
    /// First orbit in scan order with defect above `tol`.
    pub witness: Option<PeriodicOrbit>,
    pub worst_orbit: Option<PeriodicOrbit>,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub worst_defect: f64,
}

/// `1e-9` when every table entry is a dyadic rational of modest size (products of
/// short periods are then exact in floating point), `1e-6` otherwise.
pub fn default_obstruction_tol(g: &MatrixGenerator) -> f64 {
    let scale = 2f64.powi(EXACT_FRACTION_BITS);
    let exact = g
        .entries()
        .iter()
        .all(|(_, m)| m.iter().all(|v| (v * scale).fract() == 0.0 && v.abs() <= scale));
    if exact {
        1e-9
    } else {
        1e-6
    }
}

/// `||A^k(p) - Id||` for every canonical orbit of least period `k <= max_period`.
pub fn check_periodic_obstruction(
    g: &MatrixGenerator,
    max_period: usize,
    tol: f64,
) -> Result<ObstructionReport, LivsicError> {
    if !(tol >= 0.0) {
        return Err(LivsicError::InvalidParameter(format!("tolerance {tol} must be >= 0")));
    }
    let orbits = g.sft().enumerate_periodic_orbits(max_period)?;
    let id = Matrix::identity(g.dim(), g.dim());
    let defects = orbits
        .par_iter()
        .map(|o| {
            let p = g.orbit_product_plain(o)?;
            let defect = linalg::spectral_norm(&(p - &id));
            Ok(if defect.is_nan() { f64::INFINITY } else { defect })
        })
        .collect::<Result<Vec<f64>, LivsicError>>()?;
    let witness = orbits.iter().zip(&defects).find(|(_, &d)| d > tol).map(|(o, _)| o.clone());
    let worst = defects
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &d)| match best {
            Some((_, b)) if b >= d => best,
            _ => Some((i, d)),
        });
    Ok(ObstructionReport {
        passed: witness.is_none(),
        tol,
        max_period,
        orbits_checked: orbits.len(),
        witness,
        worst_orbit: worst.map(|(i, _)| orbits[i].clone()),
        worst_defect: worst.map_or(0.0, |(_, d)| d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_dynamics::Sft;

    #[test]
    fn identity_passes() {
        let g = MatrixGenerator::identity(Sft::golden_mean(), 3).unwrap();
        let rep = check_periodic_obstruction(&g, 6, 1e-9).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.worst_defect, 0.0);
        assert_eq!(default_obstruction_tol(&g), 1e-9);
    }

    #[test]
    fn diagonal_fails_at_fixed_point() {
        let g = MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![2.0, 0.5], vec![1.0, 1.0]]).unwrap();
        let rep = check_periodic_obstruction(&g, 3, 1e-9).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.witness.unwrap().word().to_string(), "0");
        // diag(4, 1/4) on "001" is the worst
        assert_eq!(rep.worst_orbit.unwrap().word().to_string(), "001");
        assert!((rep.worst_defect - 3.0).abs() < 1e-12);
        let single = check_periodic_obstruction(&g, 1, 1e-9).unwrap();
        assert!((single.worst_defect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coboundary_telescopes() {
        let s = Sft::full_shift(2);
        let p = MatrixGenerator::from_fn(s, 2, 0, 1.0, |w| {
            let a = w.symbols()[0] as f64;
            Matrix::from_row_slice(2, 2, &[1.0 + a, 0.3, -0.2, 0.7 + 0.1 * a])
        })
        .unwrap();
        let g = MatrixGenerator::coboundary(&p).unwrap();
        assert_eq!(default_obstruction_tol(&g), 1e-6);
        let rep = check_periodic_obstruction(&g, 8, 1e-10).unwrap();
        assert!(rep.passed, "defect {}", rep.worst_defect);
    }
}
