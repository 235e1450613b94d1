//! Small dense helpers shared by the cocycle, spectrum and certificate code.

use nalgebra::DMatrix;

pub type Matrix = DMatrix<f64>;

/// A matrix is treated as singular when `sigma_min <= SINGULAR_RTOL * sigma_max`.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Singular values in non-increasing order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut sv: Vec<f64> = match m.nrows() {
        0 => Vec::new(),
        1 if m.ncols() == 1 => vec![m[(0, 0)].abs()],
        _ => m.singular_values().iter().copied().collect(),
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Operator norm induced by the Euclidean vector norm.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 2 && m.ncols() == 2 {
        // closed form for the common planar case
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let s = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        let disc = ((s * s - 4.0 * det * det).max(0.0)).sqrt();
        return ((s + disc) / 2.0).sqrt();
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn is_exact_zero(m: &Matrix) -> bool {
    m.iter().all(|&v| v == 0.0)
}

/// Rank deficiency in the relative sense of [`SINGULAR_RTOL`]; exact zeros are singular.
pub fn is_singular(m: &Matrix) -> bool {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) => hi == 0.0 || lo <= SINGULAR_RTOL * hi,
        _ => false,
    }
}

/// `ln |det m|`, or `-inf` when `m` is singular in the sense of [`is_singular`].
pub fn log_abs_det(m: &Matrix) -> f64 {
    if m.nrows() == 1 {
        let v = m[(0, 0)].abs();
        return if v == 0.0 { f64::NEG_INFINITY } else { v.ln() };
    }
    let sv = singular_values(m);
    let hi = sv.first().copied().unwrap_or(0.0);
    if hi == 0.0 || sv.last().copied().unwrap_or(0.0) <= SINGULAR_RTOL * hi {
        return f64::NEG_INFINITY;
    }
    sv.iter().map(|s| s.ln()).sum()
}

/// Block extension `diag(1, m)`.
pub fn augment(m: &Matrix) -> Matrix {
    let d = m.nrows();
    let mut out = Matrix::zeros(d + 1, d + 1);
    out[(0, 0)] = 1.0;
    out.view_mut((1, 1), (d, d)).copy_from(m);
    out
}

pub fn from_row_major(dim: usize, entries: &[f64]) -> Option<Matrix> {
    (entries.len() == dim * dim).then(|| Matrix::from_row_slice(dim, dim, entries))
}

pub fn to_row_major(m: &Matrix) -> Vec<f64> {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect()
}

pub fn rotation(angle: f64) -> Matrix {
    let (s, c) = angle.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}
