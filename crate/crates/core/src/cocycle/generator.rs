use crate::base_dynamics::{PeriodicOrbit, Sft, SymbolicPoint, Word};

use super::linalg::{self, Matrix};
use super::{CocycleError, ScaledMatrix};

/// Largest dense window table a generator may allocate.
pub const MAX_TABLE_SLOTS: usize = 1 << 20;
/// Largest matrix dimension accepted for a generator.
pub const MAX_DIM: usize = 16;

/// A locally constant map `A: M -> M(d, R)`, `A(x) = table[x_{-r} .. x_r]`.
///
/// Locally constant maps are `alpha`-Hölder for every `alpha`; the exponent
/// is carried along because the certificate bound depends on it.
#[derive(Debug, Clone)]
pub struct MatrixGenerator {
    sft: Sft,
    dim: usize,
    radius: usize,
    alpha: f64,
    /// Dense table indexed by the base-`k` code of the window.
    table: Vec<Option<Matrix>>,
}

impl MatrixGenerator {
    pub fn new<I>(sft: Sft, dim: usize, radius: usize, alpha: f64, entries: I) -> Result<Self, CocycleError>
    where
        I: IntoIterator<Item = (Word, Matrix)>,
    {
        if dim == 0 || dim > MAX_DIM {
            return Err(CocycleError::InvalidTable(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(CocycleError::InvalidTable(format!("Hölder exponent {alpha} outside (0, 1]")));
        }
        let window = 2 * radius + 1;
        let slots = u32::try_from(window)
            .ok()
            .and_then(|w| sft.alphabet().checked_pow(w))
            .filter(|&s| s <= MAX_TABLE_SLOTS)
            .ok_or_else(|| {
                CocycleError::InvalidTable(format!(
                    "window table {}^{window} exceeds {MAX_TABLE_SLOTS} slots",
                    sft.alphabet()
                ))
            })?;
        let k = sft.alphabet();
        let mut table: Vec<Option<Matrix>> = vec![None; slots];
        for (w, m) in entries {
            if w.len() != window || !sft.is_admissible(&w) {
                return Err(CocycleError::InvalidTable(format!(
                    "key {w} is not an admissible window of length {window}"
                )));
            }
            if m.nrows() != dim || m.ncols() != dim {
                return Err(CocycleError::InvalidTable(format!("entry {w} is not {dim}x{dim}")));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(CocycleError::InvalidTable(format!("entry {w} has non-finite values")));
            }
            let slot = &mut table[w.code(k)];
            if slot.is_some() {
                return Err(CocycleError::InvalidTable(format!("duplicate entry {w}")));
            }
            *slot = Some(m);
        }
        let mut missing = None;
        sft.for_each_word(window, |w| {
            if missing.is_none() && table[Word::from(w).code(k)].is_none() {
                missing = Some(Word::from(w));
            }
        })?;
        if let Some(w) = missing {
            return Err(CocycleError::InvalidTable(format!("missing entry for window {w}")));
        }
        Ok(MatrixGenerator {
            sft,
            dim,
            radius,
            alpha,
            table,
        })
    }

    /// Tabulates `f` on every admissible window.
    pub fn from_fn<F>(sft: Sft, dim: usize, radius: usize, alpha: f64, mut f: F) -> Result<Self, CocycleError>
    where
        F: FnMut(&Word) -> Matrix,
    {
        let words = sft.admissible_words(2 * radius + 1)?;
        let entries: Vec<(Word, Matrix)> = words.into_iter().map(|w| (w.clone(), f(&w))).collect();
        Self::new(sft, dim, radius, alpha, entries)
    }

    pub fn identity(sft: Sft, dim: usize) -> Result<Self, CocycleError> {
        Self::from_fn(sft, dim, 0, 1.0, |_| Matrix::identity(dim, dim))
    }

    pub fn constant(sft: Sft, m: Matrix) -> Result<Self, CocycleError> {
        let dim = m.nrows();
        Self::from_fn(sft, dim, 0, 1.0, |_| m.clone())
    }

    /// `A(x) = diag(diagonals[x_0])`.
    pub fn diagonal_by_symbol(sft: Sft, diagonals: &[Vec<f64>]) -> Result<Self, CocycleError> {
        let dim = diagonals.first().map_or(0, Vec::len);
        if diagonals.len() != sft.alphabet() || diagonals.iter().any(|d| d.len() != dim) {
            return Err(CocycleError::InvalidTable(
                "need one diagonal of common length per symbol".into(),
            ));
        }
        Self::from_fn(sft, dim, 0, 1.0, |w| {
            Matrix::from_diagonal(&nalgebra::DVector::from_vec(diagonals[w.symbols()[0] as usize].clone()))
        })
    }

    /// `A(x) = scales[x_0] * R(angles[x_0])` in the plane.
    pub fn rotation_by_symbol(sft: Sft, angles: &[f64], scales: Option<&[f64]>) -> Result<Self, CocycleError> {
        if angles.len() != sft.alphabet() || scales.is_some_and(|s| s.len() != angles.len()) {
            return Err(CocycleError::InvalidTable("need one angle (and scale) per symbol".into()));
        }
        Self::from_fn(sft, 2, 0, 1.0, |w| {
            let a = w.symbols()[0] as usize;
            linalg::rotation(angles[a]) * scales.map_or(1.0, |s| s[a])
        })
    }

    /// `A(x) = P(f(x)) P(x)^{-1}` for a locally constant invertible `P`; radius grows by one.
    pub fn coboundary(p: &MatrixGenerator) -> Result<Self, CocycleError> {
        let r = p.radius;
        let pw = 2 * r + 1;
        let mut singular = None;
        let g = Self::from_fn(p.sft.clone(), p.dim, r + 1, p.alpha, |w| {
            let s = w.symbols();
            let here = p.lookup(&s[1..1 + pw]).expect("sub-window of admissible window");
            let next = p.lookup(&s[2..2 + pw]).expect("sub-window of admissible window");
            match here.clone().try_inverse() {
                Some(inv) if !linalg::is_singular(here) => next * inv,
                _ => {
                    singular.get_or_insert_with(|| Word::from(&s[1..1 + pw]));
                    Matrix::identity(p.dim, p.dim)
                }
            }
        })?;
        match singular {
            Some(w) => Err(CocycleError::SingularWindow(w)),
            None => Ok(g),
        }
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn window_len(&self) -> usize {
        2 * self.radius + 1
    }

    /// Same table with a different Hölder exponent.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, CocycleError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(CocycleError::InvalidTable(format!("Hölder exponent {alpha} outside (0, 1]")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// Table entry for a window given as raw symbols.
    #[inline]
    pub fn lookup(&self, window: &[u8]) -> Option<&Matrix> {
        if window.len() != self.window_len() {
            return None;
        }
        let k = self.sft.alphabet();
        let mut code = 0usize;
        for &s in window {
            if s as usize >= k {
                return None;
            }
            code = code * k + s as usize;
        }
        self.table[code].as_ref()
    }

    /// Admissible windows and their matrices, in lexicographic order.
    pub fn entries(&self) -> Vec<(Word, &Matrix)> {
        let k = self.sft.alphabet();
        let len = self.window_len();
        self.table
            .iter()
            .enumerate()
            .filter_map(|(code, m)| m.as_ref().map(|m| (Word::from_code(code, k, len), m)))
            .collect()
    }

    /// `A(x)`.
    pub fn evaluate(&self, x: &SymbolicPoint) -> Result<&Matrix, CocycleError> {
        self.evaluate_at(x, 0)
    }

    /// `A(f^k(x))`.
    pub fn evaluate_at(&self, x: &SymbolicPoint, k: i64) -> Result<&Matrix, CocycleError> {
        let w = x.window(k - self.radius as i64, self.window_len());
        self.lookup(w.symbols()).ok_or(CocycleError::InadmissibleWindow(w))
    }

    /// `A^n(x) = A(f^{n-1}x) ... A(fx) A(x)`, renormalized after every factor.
    pub fn cocycle_product(&self, x: &SymbolicPoint, n: usize) -> Result<ScaledMatrix, CocycleError> {
        if n as u64 > self.sft.budget() {
            return Err(CocycleError::ProductTooLong(n));
        }
        let mut acc = ScaledMatrix::identity(self.dim);
        for k in 0..n {
            acc.left_mul(self.evaluate_at(x, k as i64)?);
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    /// Product along a window word of length `n + 2r`: `n` factors read left to right.
    pub fn product_of_word(&self, symbols: &[u8]) -> Result<ScaledMatrix, CocycleError> {
        let len = self.window_len();
        let mut acc = ScaledMatrix::identity(self.dim);
        if symbols.len() < len {
            return Ok(acc);
        }
        for win in symbols.windows(len) {
            let m = self
                .lookup(win)
                .ok_or_else(|| CocycleError::InadmissibleWindow(Word::from(win)))?;
            acc.left_mul(m);
        }
        Ok(acc)
    }

    /// The windows `p_{j-r} .. p_{j+r}`, `j = 0..k`, along a periodic orbit of period `k`.
    pub fn orbit_windows(&self, orbit: &PeriodicOrbit) -> Vec<Word> {
        let p = orbit.point();
        (0..orbit.period() as i64)
            .map(|j| p.window(j - self.radius as i64, self.window_len()))
            .collect()
    }

    /// `A^k(p)` at the canonical point of a periodic orbit of period `k`.
    pub fn orbit_product(&self, orbit: &PeriodicOrbit) -> Result<ScaledMatrix, CocycleError> {
        let mut acc = ScaledMatrix::identity(self.dim);
        for w in self.orbit_windows(orbit) {
            let m = self.lookup(w.symbols()).ok_or(CocycleError::InadmissibleWindow(w))?;
            acc.left_mul(m);
        }
        Ok(acc)
    }

    /// Unnormalized `A^k(p)`; only sensible for short periods or bounded products.
    pub fn orbit_product_plain(&self, orbit: &PeriodicOrbit) -> Result<Matrix, CocycleError> {
        let mut acc = Matrix::identity(self.dim, self.dim);
        for w in self.orbit_windows(orbit) {
            let m = self.lookup(w.symbols()).ok_or(CocycleError::InadmissibleWindow(w))?;
            acc = m * acc;
        }
        Ok(acc)
    }

    /// `C_1 = max_{w != w'} ||A_w - A_w'|| * b^{r alpha}`.
    ///
    /// Points with different windows differ somewhere in `[-r, r]`, so
    /// `d(x, y) >= b^{-r}` and the bound `||A(x) - A(y)|| <= C_1 d(x, y)^alpha` follows.
    pub fn holder_constant(&self) -> f64 {
        let entries = self.entries();
        let mut worst = 0.0f64;
        for (i, (_, a)) in entries.iter().enumerate() {
            for (_, b) in &entries[i + 1..] {
                worst = worst.max(linalg::spectral_norm(&(*a - *b)));
            }
        }
        worst * self.sft.metric_base().powf(self.radius as f64 * self.alpha)
    }

    /// Applies `f` to every entry; `f` must map `dim x dim` to `new_dim x new_dim`.
    pub fn map_table<F>(&self, new_dim: usize, mut f: F) -> Result<Self, CocycleError>
    where
        F: FnMut(&Matrix) -> Matrix,
    {
        let entries: Vec<(Word, Matrix)> = self.entries().into_iter().map(|(w, m)| (w, f(m))).collect();
        Self::new(self.sft.clone(), new_dim, self.radius, self.alpha, entries)
    }

    /// `e^s A`.
    pub fn scaled(&self, s: f64) -> Result<Self, CocycleError> {
        let factor = s.exp();
        self.map_table(self.dim, |m| m * factor)
    }

    /// The block extension `diag(1, A)`, whose products never vanish.
    pub fn augment(&self) -> Result<Self, CocycleError> {
        self.map_table(self.dim + 1, linalg::augment)
    }

    /// Windows whose matrix is singular in the relative sense of [`linalg::is_singular`].
    pub fn singular_windows(&self) -> Vec<Word> {
        self.entries()
            .into_iter()
            .filter(|(_, m)| linalg::is_singular(m))
            .map(|(w, _)| w)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn diag(a: f64, b: f64) -> Matrix {
        Matrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b])
    }

    #[test]
    fn evaluate_reads_centered_window() {
        let g = MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![2.0, 0.5], vec![1.0, 2.0]]).unwrap();
        let x = SymbolicPoint::new(w("0"), w("1"), 1, w("0")).unwrap();
        assert_eq!(g.evaluate(&x).unwrap(), &diag(2.0, 0.5));
        assert_eq!(g.evaluate_at(&x, 1).unwrap(), &diag(1.0, 2.0));

        let id = MatrixGenerator::identity(Sft::golden_mean(), 3).unwrap();
        assert_eq!(id.evaluate(&x).unwrap(), &Matrix::identity(3, 3));
    }

    #[test]
    fn radius_one_lookup() {
        let g = MatrixGenerator::from_fn(Sft::full_shift(2), 1, 1, 1.0, |w| {
            Matrix::from_element(1, 1, w.code(2) as f64)
        })
        .unwrap();
        let x = SymbolicPoint::new(w("0"), w("010"), -1, w("0")).unwrap();
        assert_eq!(g.evaluate(&x).unwrap()[(0, 0)], w("010").code(2) as f64);
    }

    #[test]
    fn inconsistent_point_is_reported() {
        let g = MatrixGenerator::identity(Sft::golden_mean(), 2).unwrap();
        let r1 = MatrixGenerator::from_fn(Sft::golden_mean(), 2, 1, 1.0, |_| Matrix::identity(2, 2)).unwrap();
        let bad = SymbolicPoint::periodic(w("11"), 0).unwrap();
        assert!(g.evaluate(&bad).is_ok());
        assert!(matches!(r1.evaluate(&bad), Err(CocycleError::InadmissibleWindow(_))));
        let outside = SymbolicPoint::periodic(w("2"), 0).unwrap();
        assert!(matches!(g.evaluate(&outside), Err(CocycleError::InadmissibleWindow(_))));
    }

    #[test]
    fn table_validation() {
        let s = Sft::golden_mean();
        let missing = MatrixGenerator::new(s.clone(), 1, 0, 1.0, [(w("0"), Matrix::identity(1, 1))]);
        assert!(matches!(missing, Err(CocycleError::InvalidTable(_))));
        let forbidden = MatrixGenerator::new(
            s.clone(),
            1,
            1,
            1.0,
            [(w("011"), Matrix::identity(1, 1))],
        );
        assert!(matches!(forbidden, Err(CocycleError::InvalidTable(_))));
        let nan = MatrixGenerator::constant(s.clone(), Matrix::from_element(1, 1, f64::NAN));
        assert!(nan.is_err());
        let alpha = MatrixGenerator::identity(s, 1).unwrap().with_alpha(1.5);
        assert!(alpha.is_err());
    }

    #[test]
    fn product_edge_cases() {
        let e = std::f64::consts::E;
        let g = MatrixGenerator::constant(Sft::full_shift(2), diag(e, 1.0 / e)).unwrap();
        let x = SymbolicPoint::periodic(w("01"), 0).unwrap();
        let p0 = g.cocycle_product(&x, 0).unwrap();
        assert_eq!(p0, ScaledMatrix::identity(2));
        let p = g.cocycle_product(&x, 100).unwrap();
        assert_relative_eq!(p.log_scale(), 100.0, max_relative = 1e-12);

        let nil = MatrixGenerator::constant(
            Sft::full_shift(2),
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        )
        .unwrap();
        let z = nil.cocycle_product(&x, 2).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.log_scale(), f64::NEG_INFINITY);
    }

    #[test]
    fn holder_constant_examples() {
        let c = MatrixGenerator::constant(Sft::full_shift(2), diag(3.0, 1.0)).unwrap();
        assert_eq!(c.holder_constant(), 0.0);

        let two = MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert_relative_eq!(two.holder_constant(), 1.0, max_relative = 1e-12);

        // r = 1, b = 2, alpha = 1: factor 2 over the largest pairwise difference.
        let r1 = MatrixGenerator::from_fn(Sft::full_shift(2), 1, 1, 1.0, |w| {
            Matrix::from_element(1, 1, w.symbols()[1] as f64 * 0.5 + w.symbols()[2] as f64)
        })
        .unwrap();
        assert_relative_eq!(r1.holder_constant(), 2.0 * 1.5, max_relative = 1e-12);
    }

    #[test]
    fn coboundary_from_transfer_table() {
        let p = MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![1.0, 2.0], vec![3.0, 0.5]]).unwrap();
        let a = MatrixGenerator::coboundary(&p).unwrap();
        assert_eq!(a.radius(), 1);
        // window 001: P(x) = P[0], P(fx) = P[1]
        let m = a.lookup(w("001").symbols()).unwrap();
        assert_relative_eq!(m[(0, 0)], 3.0, max_relative = 1e-12);
        assert_relative_eq!(m[(1, 1)], 0.25, max_relative = 1e-12);

        let singular = MatrixGenerator::diagonal_by_symbol(Sft::full_shift(2), &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            MatrixGenerator::coboundary(&singular),
            Err(CocycleError::SingularWindow(_))
        ));
    }
}
