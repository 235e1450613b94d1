use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cocycle::linalg::SINGULAR_RTOL;
use crate::cocycle::{Matrix, MatrixGenerator};

use super::spectrum::check_measure;
use super::{ErgodicMeasure, LyapunovError, LyapunovSpectrum};

/// Batch length for the batched-means standard error.
pub const BATCH_LEN: usize = 100;

/// Lyapunov spectrum along one `mu`-typical orbit by orthonormal frame propagation.
///
/// The frame starts at the standard basis. Each step multiplies by `A(f^j x)` and
/// re-orthonormalizes with twice-iterated modified Gram-Schmidt; the log of the
/// `i`-th residual norm is the per-step stretch of direction `i`. A residual below
/// `SINGULAR_RTOL * ||A||_F` means the direction fell into the kernel: it is frozen
/// at `-inf` and dropped, and the remaining directions carry on.
pub fn estimate_spectrum(
    g: &MatrixGenerator,
    mu: &ErgodicMeasure,
    steps: usize,
    seed: u64,
) -> Result<LyapunovSpectrum, LyapunovError> {
    if steps == 0 {
        return Err(LyapunovError::InvalidParameter("steps must be at least 1".into()));
    }
    check_measure(g, mu)?;
    let d = g.dim();
    let w = g.window_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // symbols x_{-r} .. x_{steps-1+r}
    let path = mu.sample_path(&mut rng, steps + w - 1);
    let path = path.symbols();

    let mut frame = Matrix::identity(d, d);
    let mut alive: Vec<usize> = (0..d).collect();
    let mut totals = vec![0.0f64; d];
    let mut batch = vec![0.0f64; d];
    let mut batch_means: Vec<Vec<f64>> = vec![Vec::with_capacity(steps / BATCH_LEN + 1); d];
    let mut residual = nalgebra::DVector::<f64>::zeros(d);

    for (j, window) in path.windows(w).enumerate() {
        let a = g.lookup(window).expect("sampled paths are admissible");
        if !alive.is_empty() {
            let image = a * &frame;
            let floor = SINGULAR_RTOL * a.norm();
            let mut kept: Vec<usize> = Vec::with_capacity(alive.len());
            let mut next = Matrix::zeros(d, alive.len());
            for (c, &dir) in alive.iter().enumerate() {
                residual.copy_from(&image.column(c));
                for _ in 0..2 {
                    for q in 0..kept.len() {
                        let col = next.column(q);
                        let h = col.dot(&residual);
                        residual.axpy(-h, &col, 1.0);
                    }
                }
                let norm = residual.norm();
                if norm <= floor || norm == 0.0 {
                    totals[dir] = f64::NEG_INFINITY;
                    continue;
                }
                next.column_mut(kept.len()).copy_from(&(&residual / norm));
                let stretch = norm.ln();
                totals[dir] += stretch;
                batch[dir] += stretch;
                kept.push(dir);
            }
            frame = next.columns(0, kept.len()).into_owned();
            alive = kept;
        }
        if (j + 1) % BATCH_LEN == 0 {
            for dir in 0..d {
                batch_means[dir].push(batch[dir] / BATCH_LEN as f64);
                batch[dir] = 0.0;
            }
        }
    }

    let n = steps as f64;
    let pairs = (0..d)
        .map(|dir| {
            let value = totals[dir] / n;
            let se = if value.is_finite() {
                batched_standard_error(&batch_means[dir])
            } else {
                0.0
            };
            (value, se)
        })
        .collect();
    Ok(LyapunovSpectrum::estimated(pairs, steps, seed))
}

/// Standard error of the mean from batch means; `NaN` with fewer than two batches.
pub(crate) fn batched_standard_error(means: &[f64]) -> f64 {
    let b = means.len();
    if b < 2 {
        return f64::NAN;
    }
    let mean = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_dynamics::Sft;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn identity_is_exactly_zero() {
        let s = Sft::full_shift(2);
        let g = MatrixGenerator::identity(s.clone(), 3).unwrap();
        let mu = ErgodicMeasure::uniform_bernoulli(&s).unwrap();
        let sp = estimate_spectrum(&g, &mu, 1000, 1).unwrap();
        assert_eq!(sp.values(), &[0.0; 3]);
        assert_eq!(sp.standard_error().unwrap(), &[0.0; 3]);
    }

    #[test]
    fn constant_diagonal() {
        let s = Sft::full_shift(2);
        let g = MatrixGenerator::constant(s.clone(), Matrix::from_row_slice(2, 2, &[E, 0.0, 0.0, 1.0 / E])).unwrap();
        let mu = ErgodicMeasure::uniform_bernoulli(&s).unwrap();
        let sp = estimate_spectrum(&g, &mu, 500, 3).unwrap();
        assert!((sp.values()[0] - 1.0).abs() < 1e-9);
        assert!((sp.values()[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn nilpotent_collapses() {
        let s = Sft::full_shift(2);
        let g = MatrixGenerator::constant(s.clone(), Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        let mu = ErgodicMeasure::uniform_bernoulli(&s).unwrap();
        let sp = estimate_spectrum(&g, &mu, 10, 0).unwrap();
        assert_eq!(sp.values(), &[f64::NEG_INFINITY; 2]);
    }

    #[test]
    fn rank_one_keeps_top_exponent() {
        let s = Sft::full_shift(2);
        let g = MatrixGenerator::diagonal_by_symbol(s.clone(), &[vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
        let mu = ErgodicMeasure::uniform_bernoulli(&s).unwrap();
        let sp = estimate_spectrum(&g, &mu, 10_000, 5).unwrap();
        assert_eq!(sp.values()[1], f64::NEG_INFINITY);
        let se = sp.standard_error().unwrap()[0];
        assert!((sp.values()[0] - LN_2 / 2.0).abs() < 5.0 * se);
    }

    #[test]
    fn deterministic_per_seed() {
        let s = Sft::full_shift(2);
        let g = MatrixGenerator::rotation_by_symbol(s.clone(), &[0.2, 1.3], Some(&[1.5, 0.7])).unwrap();
        let mu = ErgodicMeasure::uniform_bernoulli(&s).unwrap();
        let a = estimate_spectrum(&g, &mu, 2000, 9).unwrap();
        let b = estimate_spectrum(&g, &mu, 2000, 9).unwrap();
        assert_eq!(a, b);
        let c = estimate_spectrum(&g, &mu, 2000, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn batched_error() {
        assert!(batched_standard_error(&[1.0]).is_nan());
        assert_eq!(batched_standard_error(&[2.0, 2.0, 2.0]), 0.0);
        // sample sd of {1, 3} is sqrt(2); over sqrt(2) batches gives 1
        assert!((batched_standard_error(&[1.0, 3.0]) - 1.0).abs() < 1e-15);
    }
}
