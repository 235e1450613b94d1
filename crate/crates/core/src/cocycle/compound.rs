//! Exterior powers as compound matrices.
//!
//! `Λ^i R^d` is identified with `R^{C(d,i)}` through the basis
//! `e_{j_1} ∧ ... ∧ e_{j_i}`, `j_1 < ... < j_i`, ordered lexicographically.
//! In that basis `Λ^i A` is the matrix of `i x i` minors of `A`.

use super::linalg::Matrix;
use super::{CocycleError, MatrixGenerator};

/// All `i`-element subsets of `0..d` in lexicographic order.
pub fn index_subsets(d: usize, i: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if i > d {
        return out;
    }
    let mut current: Vec<usize> = (0..i).collect();
    loop {
        out.push(current.clone());
        // advance the rightmost index that still has room
        let Some(pos) = (0..i).rev().find(|&p| current[p] < d - i + p) else {
            return out;
        };
        current[pos] += 1;
        for q in pos + 1..i {
            current[q] = current[q - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1usize, |acc, j| acc * (n - j) / (j + 1))
}

fn minor(m: &Matrix, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    if k == 0 {
        return 1.0;
    }
    let sub = Matrix::from_fn(k, k, |a, b| m[(rows[a], cols[b])]);
    sub.determinant()
}

/// The `i`-th compound matrix: entry `(I, J)` is the minor on rows `I`, columns `J`.
///
/// # Panics
/// If `m` is not square or `i` is not in `1..=d`.
pub fn compound(m: &Matrix, i: usize) -> Matrix {
    let d = m.nrows();
    assert_eq!(d, m.ncols(), "compound of a non-square matrix");
    assert!((1..=d).contains(&i), "exterior degree {i} outside 1..={d}");
    if i == 1 {
        return m.clone();
    }
    let subsets = index_subsets(d, i);
    let n = subsets.len();
    Matrix::from_fn(n, n, |r, c| minor(m, &subsets[r], &subsets[c]))
}

/// The cocycle `x -> Λ^i A(x)` over the same shift.
pub fn exterior_generator(g: &MatrixGenerator, i: usize) -> Result<MatrixGenerator, CocycleError> {
    let d = g.dim();
    if !(1..=d).contains(&i) {
        return Err(CocycleError::InvalidExteriorDegree { degree: i, dim: d });
    }
    g.map_table(binomial(d, i), |m| compound(m, i))
}
