use super::linalg::{self, Matrix};

/// A square matrix held as `exp(log_scale) * body` with `||body|| = 1`.
///
/// Products of arbitrary length never overflow or underflow. An exactly zero
/// product is absorbing: `body = 0`, `log_scale = -inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    body: Matrix,
    log_scale: f64,
}

impl ScaledMatrix {
    pub fn identity(dim: usize) -> Self {
        ScaledMatrix {
            body: Matrix::identity(dim, dim),
            log_scale: 0.0,
        }
    }

    pub fn zero(dim: usize) -> Self {
        ScaledMatrix {
            body: Matrix::zeros(dim, dim),
            log_scale: f64::NEG_INFINITY,
        }
    }

    pub fn from_matrix(m: Matrix) -> Self {
        let mut s = ScaledMatrix { body: m, log_scale: 0.0 };
        s.renormalize();
        s
    }

    fn renormalize(&mut self) {
        if self.log_scale == f64::NEG_INFINITY {
            return;
        }
        let norm = linalg::spectral_norm(&self.body);
        if norm == 0.0 {
            self.body.fill(0.0);
            self.log_scale = f64::NEG_INFINITY;
        } else if norm != 1.0 {
            self.body /= norm;
            self.log_scale += norm.ln();
        }
    }

    pub fn dim(&self) -> usize {
        self.body.nrows()
    }

    pub fn body(&self) -> &Matrix {
        &self.body
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.log_scale == f64::NEG_INFINITY
    }

    /// `self <- factor * self`.
    pub fn left_mul(&mut self, factor: &Matrix) {
        if self.is_zero() {
            return;
        }
        self.body = factor * &self.body;
        self.renormalize();
    }

    pub fn mul(&self, rhs: &ScaledMatrix) -> ScaledMatrix {
        if self.is_zero() || rhs.is_zero() {
            return ScaledMatrix::zero(self.dim());
        }
        let mut out = ScaledMatrix {
            body: &self.body * &rhs.body,
            log_scale: self.log_scale + rhs.log_scale,
        };
        out.renormalize();
        out
    }

    /// The plain matrix; may overflow to infinities for extreme scales.
    pub fn value(&self) -> Matrix {
        if self.is_zero() {
            return self.body.clone();
        }
        &self.body * self.log_scale.exp()
    }

    /// `ln ||value||`.
    pub fn log_norm(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.log_scale + linalg::spectral_norm(&self.body).ln()
    }

    /// `ln |det value|`, `-inf` when rank deficient.
    pub fn log_abs_det(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        linalg::log_abs_det(&self.body) + self.dim() as f64 * self.log_scale
    }

    /// Relative agreement `||a - b|| <= rtol * max(||a||, ||b||)` computed in scaled form.
    pub fn approx_eq(&self, other: &ScaledMatrix, rtol: f64) -> bool {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => true,
            (true, false) | (false, true) => false,
            (false, false) => {
                let top = self.log_scale.max(other.log_scale);
                let a = &self.body * (self.log_scale - top).exp();
                let b = &other.body * (other.log_scale - top).exp();
                let scale = linalg::spectral_norm(&a).max(linalg::spectral_norm(&b));
                linalg::spectral_norm(&(a - b)) <= rtol * scale
            }
        }
    }
}
