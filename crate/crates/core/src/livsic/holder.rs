use rayon::prelude::*;
use serde::Serialize;

use crate::base_dynamics::Word;
use crate::cocycle::{linalg, Matrix, MatrixGenerator};
use crate::serde_ext;

use super::LivsicError;

/// The estimate `||A(x)^{-1} - A(y)^{-1}|| <= C^2 C_1 d(x, y)^alpha` and its exhaustive check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseHolder {
    /// `max(||A||, ||A^{-1}||)` over the table.
    pub c: f64,
    /// `max(||A||, ||A||^{-1})`; smaller than `c` when some `A` is badly conditioned.
    pub c_literal: f64,
    pub c1: f64,
    /// `c^2 c1`.
    pub bound: f64,
    pub bound_literal: f64,
    /// Largest `||A_w^{-1} - A_w'^{-1}|| / (bound * b^{-m alpha})` over window pairs, where
    /// `m` is the first disagreement of the pair counted from the center.
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub max_ratio: f64,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub max_ratio_literal: f64,
    pub worst_pair: Option<(Word, Word)>,
    pub pairs_checked: usize,
    pub holds: bool,
}

pub fn inverse_holder_bound(g: &MatrixGenerator) -> Result<InverseHolder, LivsicError> {
    if let Some(w) = g.singular_windows().into_iter().next() {
        return Err(LivsicError::SingularWindow(w));
    }
    let entries = g.entries();
    let inv: Vec<(Word, Matrix)> = entries
        .iter()
        .map(|(w, m)| (w.clone(), (*m).clone().try_inverse().expect("nonsingular window")))
        .collect();
    let mut c = 0.0f64;
    let mut c_literal = 0.0f64;
    for ((_, m), (_, mi)) in entries.iter().zip(&inv) {
        let n = linalg::spectral_norm(m);
        c = c.max(n).max(linalg::spectral_norm(mi));
        c_literal = c_literal.max(n).max(1.0 / n);
    }
    let c1 = g.holder_constant();
    let bound = c * c * c1;
    let bound_literal = c_literal * c_literal * c1;
    let b = g.sft().metric_base();
    let r = g.radius();
    let alpha = g.alpha();

    // (lhs, d^alpha, i, j) for the pair maximizing lhs / d^alpha
    let worst = (0..inv.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Option<(f64, f64, usize, usize)> = None;
            for j in i + 1..inv.len() {
                let (wi, wj) = (inv[i].0.symbols(), inv[j].0.symbols());
                let m = (0..wi.len())
                    .filter(|&k| wi[k] != wj[k])
                    .map(|k| k.abs_diff(r))
                    .min()
                    .expect("distinct windows");
                let lhs = linalg::spectral_norm(&(&inv[i].1 - &inv[j].1));
                let scale = b.powf(-(m as f64) * alpha);
                if best.is_none_or(|(l, s, _, _)| lhs / scale > l / s) {
                    best = Some((lhs, scale, i, j));
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if y.0 / y.1 > x.0 / x.1 { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        );
    let ratio = |lhs: f64, scale: f64, k: f64| if lhs == 0.0 { 0.0 } else { lhs / (k * scale) };
    let (max_ratio, max_ratio_literal, worst_pair) = match worst {
        Some((lhs, scale, i, j)) => (
            ratio(lhs, scale, bound),
            ratio(lhs, scale, bound_literal),
            Some((inv[i].0.clone(), inv[j].0.clone())),
        ),
        None => (0.0, 0.0, None),
    };
    let n = inv.len();
    Ok(InverseHolder {
        c,
        c_literal,
        c1,
        bound,
        bound_literal,
        max_ratio,
        max_ratio_literal,
        worst_pair,
        pairs_checked: n * n.saturating_sub(1) / 2,
        holds: max_ratio <= 1.0 + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_dynamics::Sft;

    #[test]
    fn scalar_pair() {
        let g = MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![2.0, 2.0], vec![0.5, 0.5]]).unwrap();
        let h = inverse_holder_bound(&g).unwrap();
        assert_eq!(h.c, 2.0);
        assert_eq!(h.c1, 1.5);
        assert_eq!(h.bound, 6.0);
        assert_eq!(h.pairs_checked, 1);
        // ||2I - I/2|| = 1.5
        assert!((h.max_ratio - 0.25).abs() < 1e-15);
        assert!(h.holds);
    }

    #[test]
    fn identity_is_trivially_tight() {
        let g = MatrixGenerator::identity(Sft::full_shift(3), 2).unwrap();
        let h = inverse_holder_bound(&g).unwrap();
        assert_eq!(h.bound, 0.0);
        assert_eq!(h.max_ratio, 0.0);
        assert!(h.holds);
    }

    #[test]
    fn readings_differ_for_ill_conditioned_entries() {
        let g = MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![1.0, 0.01], vec![1.0, 1.0]]).unwrap();
        let h = inverse_holder_bound(&g).unwrap();
        assert_eq!(h.c, 100.0);
        assert_eq!(h.c_literal, 1.0);
        assert!(h.holds);
        // ||diag(1, 100) - I|| = 99 against c1 = 0.99
        assert!(h.max_ratio_literal > 1.0);
    }
}
