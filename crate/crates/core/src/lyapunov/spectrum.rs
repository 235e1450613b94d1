use serde::Serialize;

use crate::base_dynamics::PeriodicOrbit;
use crate::cocycle::linalg::{self, SINGULAR_RTOL};
use crate::cocycle::MatrixGenerator;
use crate::serde_ext;

use super::{ErgodicMeasure, LyapunovError};

/// Exact values closer than this (relative to `max(1, |value|)`) form one group.
const EXACT_GROUP_TOL: f64 = 1e-9;
/// Estimated values closer than this many combined standard errors form one group.
const ESTIMATE_GROUP_SIGMAS: f64 = 3.0;

/// Exponents `gamma_1 >= ... >= gamma_d` counted with multiplicity; `-inf` allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpectrum {
    values: Vec<f64>,
    standard_error: Option<Vec<f64>>,
    steps: Option<usize>,
    seed: Option<u64>,
}

/// One distinct exponent `lambda_i` and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentGroup {
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub value: f64,
    pub multiplicity: usize,
}

impl LyapunovSpectrum {
    /// An exactly computed spectrum; values are sorted here.
    pub fn exact(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        LyapunovSpectrum {
            values,
            standard_error: None,
            steps: None,
            seed: None,
        }
    }

    /// A sampled spectrum; `(value, standard error)` pairs are sorted by value.
    pub fn estimated(mut pairs: Vec<(f64, f64)>, steps: usize, seed: u64) -> Self {
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (values, se) = pairs.into_iter().unzip();
        LyapunovSpectrum {
            values,
            standard_error: Some(se),
            steps: Some(steps),
            seed: Some(seed),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn standard_error(&self) -> Option<&[f64]> {
        self.standard_error.as_deref()
    }

    pub fn steps(&self) -> Option<usize> {
        self.steps
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn top(&self) -> f64 {
        self.values[0]
    }

    /// `gamma_1 + ... + gamma_i`.
    pub fn partial_sum(&self, i: usize) -> f64 {
        self.values[..i].iter().sum()
    }

    /// `sqrt(se_1^2 + ... + se_i^2)`, zero for exact spectra.
    pub fn partial_sum_error(&self, i: usize) -> f64 {
        self.standard_error
            .as_ref()
            .map_or(0.0, |se| se[..i].iter().map(|e| e * e).sum::<f64>().sqrt())
    }

    /// Distinct values `lambda_1 > ... > lambda_l` with multiplicities summing to `d`.
    pub fn groups(&self) -> Vec<ExponentGroup> {
        let mut out: Vec<ExponentGroup> = Vec::new();
        let mut last: Option<usize> = None;
        for (i, &v) in self.values.iter().enumerate() {
            let joins = last.is_some_and(|j| self.same_group(j, i));
            match out.last_mut() {
                Some(g) if joins => g.multiplicity += 1,
                _ => {
                    out.push(ExponentGroup {
                        value: v,
                        multiplicity: 1,
                    });
                    last = Some(i);
                }
            }
        }
        out
    }

    fn same_group(&self, lead: usize, i: usize) -> bool {
        let (a, b) = (self.values[lead], self.values[i]);
        if a == b {
            return true;
        }
        if !a.is_finite() || !b.is_finite() {
            return false;
        }
        match &self.standard_error {
            None => (a - b).abs() <= EXACT_GROUP_TOL * a.abs().max(1.0),
            Some(se) => {
                let combined = (se[lead] * se[lead] + se[i] * se[i]).sqrt();
                (a - b).abs() <= ESTIMATE_GROUP_SIGMAS * combined
            }
        }
    }

    pub fn to_record(&self) -> SpectrumRecord {
        let groups = self.groups();
        SpectrumRecord {
            values: self.values.clone(),
            distinct: groups.iter().map(|g| g.value).collect(),
            multiplicities: groups.iter().map(|g| g.multiplicity).collect(),
            standard_error: self.standard_error.clone(),
            steps: self.steps,
            seed: self.seed,
        }
    }
}

/// The JSON shape of a spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRecord {
    #[serde(serialize_with = "serde_ext::ext_real_vec")]
    pub values: Vec<f64>,
    #[serde(serialize_with = "serde_ext::ext_real_vec")]
    pub distinct: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub standard_error: Option<Vec<f64>>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

impl Serialize for LyapunovSpectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

pub(crate) fn check_orbit(g: &MatrixGenerator, p: &PeriodicOrbit) -> Result<(), LyapunovError> {
    let sft = g.sft();
    let w = p.word();
    if !(sft.contains_symbols(w) && sft.is_admissible(w) && sft.is_cyclic(w)) {
        return Err(LyapunovError::InadmissibleOrbit(w.clone()));
    }
    Ok(())
}

/// Exponents of the periodic measure on `p`: `(1/k) log |eigenvalues of A^k(p)|`.
pub fn periodic_spectrum(g: &MatrixGenerator, p: &PeriodicOrbit) -> Result<LyapunovSpectrum, LyapunovError> {
    check_orbit(g, p)?;
    let d = g.dim();
    let k = p.period() as f64;
    let product = g.orbit_product(p)?;
    if product.is_zero() {
        return Ok(LyapunovSpectrum::exact(vec![f64::NEG_INFINITY; d]));
    }
    let body = product.body();
    let mut moduli: Vec<f64> = if d == 1 {
        vec![body[(0, 0)].abs()]
    } else {
        body.complex_eigenvalues().iter().map(|z| z.norm()).collect()
    };
    moduli.sort_by(|a, b| b.total_cmp(a));

    // Zero eigenvalues: at least the numerical corank, and any modulus lost in round-off.
    let sv = linalg::singular_values(body);
    let top = sv[0];
    let corank = sv.iter().filter(|&&s| s <= SINGULAR_RTOL * top).count();
    let tiny = moduli.iter().filter(|&&m| m <= SINGULAR_RTOL * top).count();
    let zeros = corank.max(tiny);

    let values = moduli
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            if i >= d - zeros {
                f64::NEG_INFINITY
            } else {
                (m.ln() + product.log_scale()) / k
            }
        })
        .collect();
    Ok(LyapunovSpectrum::exact(values))
}

/// The object whose exponent sum is requested.
#[derive(Debug, Clone, Copy)]
pub enum SumTarget<'a> {
    Orbit(&'a PeriodicOrbit),
    Measure(&'a ErgodicMeasure),
}

/// `gamma_1 + ... + gamma_d`, the single exponent of the determinant cocycle.
///
/// For an orbit of period `k` this is `(1/k) sum_j log |det A(f^j p)|`. For a
/// Markov measure the Birkhoff average converges to the window expectation
/// `sum_w mu[w] log |det A_w|`, which is evaluated exactly. Either is `-inf`
/// as soon as one visited (positive-measure) window is singular.
pub fn sum_exponents(g: &MatrixGenerator, target: SumTarget<'_>) -> Result<f64, LyapunovError> {
    match target {
        SumTarget::Orbit(p) => {
            check_orbit(g, p)?;
            let windows = g.orbit_windows(p);
            let mut total = 0.0;
            for w in &windows {
                let m = g.lookup(w.symbols()).expect("orbit windows are admissible");
                total += linalg::log_abs_det(m);
            }
            Ok(total / windows.len() as f64)
        }
        SumTarget::Measure(mu) => {
            check_measure(g, mu)?;
            let mut total = 0.0;
            for (w, m) in g.entries() {
                let weight = mu.cylinder(w.symbols());
                if weight > 0.0 {
                    total += weight * linalg::log_abs_det(m);
                }
            }
            Ok(total)
        }
    }
}

pub(crate) fn check_measure(g: &MatrixGenerator, mu: &ErgodicMeasure) -> Result<(), LyapunovError> {
    if mu.alphabet() != g.sft().alphabet() {
        return Err(LyapunovError::InvalidMeasure(format!(
            "measure is on {} symbols, generator on {}",
            mu.alphabet(),
            g.sft().alphabet()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_dynamics::{Sft, Word};
    use crate::cocycle::Matrix;
    use std::f64::consts::LN_2;

    fn orbit(s: &Sft, w: &str) -> PeriodicOrbit {
        PeriodicOrbit::from_cycle(s, &w.parse::<Word>().unwrap()).unwrap()
    }

    fn diag_gen() -> MatrixGenerator {
        MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap()
    }

    #[test]
    fn periodic_examples() {
        let s = Sft::full_shift(2);
        let id = MatrixGenerator::identity(s.clone(), 3).unwrap();
        assert_eq!(periodic_spectrum(&id, &orbit(&s, "011")).unwrap().values(), &[0.0; 3]);

        let g = MatrixGenerator::diagonal_by_symbol(s.clone(), &[vec![2.0, 0.5], vec![1.0, 1.0]]).unwrap();
        let sp = periodic_spectrum(&g, &orbit(&s, "0")).unwrap();
        assert!((sp.values()[0] - LN_2).abs() < 1e-12);
        assert!((sp.values()[1] + LN_2).abs() < 1e-12);

        let sp = periodic_spectrum(&diag_gen(), &orbit(&s, "01")).unwrap();
        assert!((sp.values()[0] - LN_2 / 2.0).abs() < 1e-12);
        assert!((sp.values()[1] - LN_2 / 2.0).abs() < 1e-12);
        assert_eq!(sp.groups().len(), 1);
        assert_eq!(sp.groups()[0].multiplicity, 2);
    }

    #[test]
    fn periodic_spectrum_with_kernel() {
        let s = Sft::full_shift(2);
        let g = MatrixGenerator::diagonal_by_symbol(s.clone(), &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let sp = periodic_spectrum(&g, &orbit(&s, "01")).unwrap();
        assert_eq!(sp.values(), &[0.0, f64::NEG_INFINITY]);
        let groups = sp.groups();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[1].value, f64::NEG_INFINITY);

        let nil = MatrixGenerator::constant(s.clone(), Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        let sp = periodic_spectrum(&nil, &orbit(&s, "01")).unwrap();
        assert_eq!(sp.values(), &[f64::NEG_INFINITY; 2]);
        // a single factor of a nilpotent map is not zero, but its eigenvalues are
        let sp = periodic_spectrum(&nil, &orbit(&s, "0")).unwrap();
        assert_eq!(sp.values(), &[f64::NEG_INFINITY; 2]);
    }

    #[test]
    fn rotation_periodic_spectrum() {
        let s = Sft::full_shift(2);
        let g = MatrixGenerator::rotation_by_symbol(s.clone(), &[0.3, 1.1], Some(&[2.0, 0.5])).unwrap();
        let sp = periodic_spectrum(&g, &orbit(&s, "001")).unwrap();
        let expected = (2.0 * 2.0 * 0.5f64).ln() / 3.0;
        for v in sp.values() {
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn inadmissible_orbit() {
        let g = MatrixGenerator::identity(Sft::golden_mean(), 2).unwrap();
        let bad = PeriodicOrbit::from_cycle(&Sft::full_shift(2), &"1".parse().unwrap()).unwrap();
        assert!(matches!(
            periodic_spectrum(&g, &bad),
            Err(LyapunovError::InadmissibleOrbit(_))
        ));
    }

    #[test]
    fn sum_examples() {
        let s = Sft::full_shift(2);
        let id = MatrixGenerator::identity(s.clone(), 2).unwrap();
        let mu = ErgodicMeasure::uniform_bernoulli(&s).unwrap();
        assert_eq!(sum_exponents(&id, SumTarget::Measure(&mu)).unwrap(), 0.0);

        let rot = MatrixGenerator::rotation_by_symbol(s.clone(), &[0.4, 2.0], None).unwrap();
        let skew = ErgodicMeasure::bernoulli(&s, vec![0.3, 0.7]).unwrap();
        assert!(sum_exponents(&rot, SumTarget::Measure(&skew)).unwrap().abs() < 1e-15);

        let sing = MatrixGenerator::diagonal_by_symbol(s.clone(), &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let o = orbit(&s, "01");
        assert_eq!(sum_exponents(&sing, SumTarget::Orbit(&o)).unwrap(), f64::NEG_INFINITY);
        assert_eq!(sum_exponents(&sing, SumTarget::Measure(&mu)).unwrap(), f64::NEG_INFINITY);
        // the delta at the fixed point 1 never sees the singular window
        let delta = ErgodicMeasure::bernoulli(&s, vec![0.0, 1.0]).unwrap();
        assert_eq!(sum_exponents(&sing, SumTarget::Measure(&delta)).unwrap(), 0.0);

        let v = sum_exponents(&diag_gen(), SumTarget::Measure(&skew)).unwrap();
        assert!((v - LN_2).abs() < 1e-15);
    }

    #[test]
    fn json_record_uses_strings_for_infinities() {
        let sp = LyapunovSpectrum::exact(vec![f64::NEG_INFINITY, 0.5]);
        let json = serde_json::to_string(&sp).unwrap();
        assert_eq!(
            json,
            r#"{"values":[0.5,"-inf"],"distinct":[0.5,"-inf"],"multiplicities":[1,1],"standard_error":null,"steps":null,"seed":null}"#
        );
    }
}
