#![allow(dead_code)]

use cocyclelab::base_dynamics::{Sft, SymbolicPoint};
use cocyclelab::cocycle::{linalg, Matrix, MatrixGenerator};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Full 2- and 3-shifts, the golden mean shift and a primitive 3-symbol shift.
pub fn sft_zoo() -> Vec<Sft> {
    vec![
        Sft::full_shift(2),
        Sft::full_shift(3),
        Sft::golden_mean(),
        Sft::from_rows(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 1]], 2.0).unwrap(),
    ]
}

pub fn pick_sft<R: Rng>(rng: &mut R) -> Sft {
    let zoo = sft_zoo();
    zoo[rng.random_range(0..zoo.len())].clone()
}

pub fn random_matrix<R: Rng>(rng: &mut R, d: usize) -> Matrix {
    Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0))
}

/// Entries uniform in [-1, 1] plus `shift * Id`; `shift >= 2` keeps every entry invertible
/// (no eigenvalue can reach zero since the perturbation has norm below `d`).
pub fn random_generator<R: Rng>(rng: &mut R, sft: Sft, d: usize, r: usize, shift: f64) -> MatrixGenerator {
    let id = Matrix::identity(d, d);
    MatrixGenerator::from_fn(sft, d, r, 1.0, |_| random_matrix(rng, d) + &id * shift).unwrap()
}

/// Generator whose matrices all have singular values in `[lo, hi)`.
pub fn random_conditioned_generator<R: Rng>(rng: &mut R, sft: Sft, d: usize, r: usize, lo: f64, hi: f64) -> MatrixGenerator {
    MatrixGenerator::from_fn(sft, d, r, 1.0, |_| random_invertible(rng, d, lo, hi)).unwrap()
}

/// Well-conditioned invertible matrix: `Q diag(s) Q'` from random orthogonal factors.
pub fn random_invertible<R: Rng>(rng: &mut R, d: usize, lo: f64, hi: f64) -> Matrix {
    let q1 = random_matrix(rng, d).qr().q();
    let q2 = random_matrix(rng, d).qr().q();
    let s = Matrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| rng.random_range(lo..hi)));
    q1 * s * q2
}

pub fn random_point<R: Rng>(rng: &mut R, sft: &Sft, core_len: usize) -> SymbolicPoint {
    SymbolicPoint::random(sft, rng, core_len)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn norm(m: &Matrix) -> f64 {
    linalg::spectral_norm(m)
}
