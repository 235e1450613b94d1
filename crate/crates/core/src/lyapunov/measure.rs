use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::base_dynamics::{Sft, Word};

use super::LyapunovError;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Bernoulli,
    Markov,
}

/// A shift-invariant Markov measure on an SFT; Bernoulli measures are the
/// special case with identical rows.
///
/// Exactly one closed communicating class is required, which makes the
/// stationary vector unique and the measure ergodic.
#[derive(Debug, Clone, Serialize)]
pub struct ErgodicMeasure {
    kind: MeasureKind,
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

impl ErgodicMeasure {
    pub fn bernoulli(sft: &Sft, p: Vec<f64>) -> Result<Self, LyapunovError> {
        let k = sft.alphabet();
        if p.len() != k {
            return Err(LyapunovError::InvalidMeasure(format!(
                "probability vector has {} entries, alphabet has {k}",
                p.len()
            )));
        }
        check_distribution(&p, "probability vector")?;
        let rows = vec![p.clone(); k];
        check_support(sft, &rows, &p)?;
        Ok(ErgodicMeasure {
            kind: MeasureKind::Bernoulli,
            transition: rows,
            stationary: p,
        })
    }

    pub fn uniform_bernoulli(sft: &Sft) -> Result<Self, LyapunovError> {
        let k = sft.alphabet();
        Self::bernoulli(sft, vec![1.0 / k as f64; k])
    }

    pub fn markov(sft: &Sft, transition: Vec<Vec<f64>>) -> Result<Self, LyapunovError> {
        let k = sft.alphabet();
        if transition.len() != k || transition.iter().any(|r| r.len() != k) {
            return Err(LyapunovError::InvalidMeasure(format!("transition matrix must be {k}x{k}")));
        }
        for (a, row) in transition.iter().enumerate() {
            check_distribution(row, &format!("row {a}"))?;
        }
        let closed = closed_classes(&transition);
        if closed != 1 {
            return Err(LyapunovError::InvalidMeasure(format!(
                "chain has {closed} closed classes; exactly one is needed for ergodicity"
            )));
        }
        let stationary = stationary_vector(&transition)?;
        check_support(sft, &transition, &stationary)?;
        Ok(ErgodicMeasure {
            kind: MeasureKind::Markov,
            transition,
            stationary,
        })
    }

    /// The measure of maximal entropy: `P[a][b] = T[a][b] v_b / (lambda v_a)`.
    pub fn parry(sft: &Sft) -> Result<Self, LyapunovError> {
        let k = sft.alphabet();
        let t = DMatrix::from_fn(k, k, |a, b| if sft.allows(a as u8, b as u8) { 1.0 } else { 0.0 });
        // power iteration converges because T is primitive
        let mut v: DVector<f64> = DVector::from_element(k, 1.0);
        for _ in 0..10_000 {
            let next = &t * &v;
            let next = &next / next.norm();
            let done = (&next - &v).amax() < 1e-15;
            v = next;
            if done {
                break;
            }
        }
        let tv = &t * &v;
        let rows = (0..k)
            .map(|a| {
                let row: Vec<f64> = (0..k).map(|b| t[(a, b)] * v[b] / tv[a]).collect();
                let total: f64 = row.iter().sum();
                row.into_iter().map(|p| p / total).collect()
            })
            .collect();
        Self::markov(sft, rows)
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn alphabet(&self) -> usize {
        self.stationary.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `mu[w]`, the measure of the cylinder `{x : x_0 .. x_{n-1} = w}`.
    pub fn cylinder(&self, w: &[u8]) -> f64 {
        let Some((&first, _)) = w.split_first() else {
            return 1.0;
        };
        let mut p = self.stationary[first as usize];
        for pair in w.windows(2) {
            p *= self.transition[pair[0] as usize][pair[1] as usize];
        }
        p
    }

    /// A `mu`-typical word of length `len`, started from the stationary vector.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Word {
        let mut out = Vec::with_capacity(len);
        if len == 0 {
            return Word::new(out);
        }
        let start = WeightedIndex::new(&self.stationary).expect("stationary vector is a distribution");
        let rows: Vec<Option<WeightedIndex<f64>>> =
            self.transition.iter().map(|r| WeightedIndex::new(r).ok()).collect();
        let mut s = start.sample(rng);
        out.push(s as u8);
        for _ in 1..len {
            s = rows[s]
                .as_ref()
                .expect("visited symbols have a nonzero row")
                .sample(rng);
            out.push(s as u8);
        }
        Word::new(out)
    }
}

fn check_distribution(p: &[f64], what: &str) -> Result<(), LyapunovError> {
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(LyapunovError::InvalidMeasure(format!("{what} has negative or non-finite entries")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(LyapunovError::InvalidMeasure(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// Forbidden transitions between symbols the measure can visit must carry zero mass.
fn check_support(sft: &Sft, rows: &[Vec<f64>], stationary: &[f64]) -> Result<(), LyapunovError> {
    for (a, row) in rows.iter().enumerate() {
        if stationary[a] <= 0.0 {
            continue;
        }
        for (b, &p) in row.iter().enumerate() {
            if p > 0.0 && !sft.allows(a as u8, b as u8) {
                return Err(LyapunovError::InvalidMeasure(format!(
                    "positive mass on forbidden transition {a} -> {b}"
                )));
            }
        }
    }
    Ok(())
}

fn closed_classes(p: &[Vec<f64>]) -> usize {
    let k = p.len();
    let mut reach: Vec<Vec<bool>> = (0..k)
        .map(|a| (0..k).map(|b| a == b || p[a][b] > 0.0).collect())
        .collect();
    for m in 0..k {
        for a in 0..k {
            if reach[a][m] {
                for b in 0..k {
                    if reach[m][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
    }
    // a state is recurrent iff everything it reaches reaches back
    let recurrent: Vec<usize> = (0..k)
        .filter(|&a| (0..k).all(|b| !reach[a][b] || reach[b][a]))
        .collect();
    let mut seen = vec![false; k];
    let mut classes = 0;
    for &a in &recurrent {
        if !seen[a] {
            classes += 1;
            for &b in &recurrent {
                if reach[a][b] {
                    seen[b] = true;
                }
            }
        }
    }
    classes
}

/// Solves `pi P = pi`, `sum pi = 1` by replacing one balance equation with the normalization.
fn stationary_vector(p: &[Vec<f64>]) -> Result<Vec<f64>, LyapunovError> {
    let k = p.len();
    let mut m = DMatrix::from_fn(k, k, |i, j| p[j][i] - if i == j { 1.0 } else { 0.0 });
    let mut rhs = DVector::zeros(k);
    for j in 0..k {
        m[(k - 1, j)] = 1.0;
    }
    rhs[k - 1] = 1.0;
    let pi = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| LyapunovError::InvalidMeasure("stationary vector is not unique".into()))?;
    let mut pi: Vec<f64> = pi.iter().map(|&v| if v.abs() < 1e-15 { 0.0 } else { v }).collect();
    if pi.iter().any(|&v| v < -1e-12) {
        return Err(LyapunovError::InvalidMeasure("stationary vector has negative entries".into()));
    }
    for v in &mut pi {
        *v = v.max(0.0);
    }
    let total: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|v| v / total).collect())
}
