use rand::Rng;

use super::{DynamicsError, PeriodicOrbit, Word};

/// Default cap on the number of admissible words any single enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 26;

/// A two-sided subshift of finite type given by a primitive 0/1 transition matrix.
///
/// `transitions[a][b]` is true when symbol `b` may follow symbol `a`. Points are
/// compared with `d(x, y) = b^{-m}`, `m = min{|n| : x_n != y_n}`, so the
/// contraction rate of the shift is `theta = ln b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sft {
    alphabet: usize,
    transitions: Vec<Vec<bool>>,
    metric_base: f64,
    mixing: usize,
    budget: u64,
}

impl Sft {
    pub fn new(transitions: Vec<Vec<bool>>, metric_base: f64) -> Result<Self, DynamicsError> {
        let k = transitions.len();
        if k == 0 {
            return Err(DynamicsError::InvalidSft("empty alphabet".into()));
        }
        if k > u8::MAX as usize + 1 {
            return Err(DynamicsError::InvalidSft(format!("alphabet of size {k} too large")));
        }
        for (a, row) in transitions.iter().enumerate() {
            if row.len() != k {
                return Err(DynamicsError::InvalidSft(format!(
                    "transition row {a} has length {}, expected {k}",
                    row.len()
                )));
            }
            if !row.iter().any(|&t| t) {
                return Err(DynamicsError::InvalidSft(format!("symbol {a} has no successor")));
            }
        }
        for b in 0..k {
            if !transitions.iter().any(|row| row[b]) {
                return Err(DynamicsError::InvalidSft(format!("symbol {b} has no predecessor")));
            }
        }
        if !(metric_base.is_finite() && metric_base > 1.0) {
            return Err(DynamicsError::InvalidSft(format!(
                "metric base must be a finite number > 1, got {metric_base}"
            )));
        }
        let mixing = primitivity_exponent(&transitions).ok_or(DynamicsError::NotPrimitive)?;
        Ok(Sft {
            alphabet: k,
            transitions,
            metric_base,
            mixing,
            budget: DEFAULT_BUDGET,
        })
    }

    /// Convenience constructor from 0/1 rows.
    pub fn from_rows(rows: &[&[u8]], metric_base: f64) -> Result<Self, DynamicsError> {
        Self::new(
            rows.iter().map(|r| r.iter().map(|&v| v != 0).collect()).collect(),
            metric_base,
        )
    }

    pub fn full_shift(k: usize) -> Self {
        Self::new(vec![vec![true; k]; k], 2.0).expect("full shift is primitive")
    }

    /// The golden-mean shift: `1` never follows `1`.
    pub fn golden_mean() -> Self {
        Self::from_rows(&[&[1, 1], &[1, 0]], 2.0).expect("golden mean shift is primitive")
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn transitions(&self) -> &[Vec<bool>] {
        &self.transitions
    }

    pub fn metric_base(&self) -> f64 {
        self.metric_base
    }

    /// Exponential contraction rate `ln b` of the symbolic metric.
    pub fn theta(&self) -> f64 {
        self.metric_base.ln()
    }

    #[inline]
    pub fn allows(&self, a: u8, b: u8) -> bool {
        self.transitions[a as usize][b as usize]
    }

    /// Smallest `S` with `T^S` entrywise positive.
    pub fn mixing_constant(&self) -> usize {
        self.mixing
    }

    pub fn contains_symbols(&self, w: &Word) -> bool {
        w.symbols().iter().all(|&s| (s as usize) < self.alphabet)
    }

    /// All consecutive pairs allowed (no wrap-around check).
    pub fn is_admissible(&self, w: &Word) -> bool {
        self.contains_symbols(w) && w.symbols().windows(2).all(|p| self.allows(p[0], p[1]))
    }

    /// Admissible and closes up: `T[w_last][w_0] = 1`.
    pub fn is_cyclic(&self, w: &Word) -> bool {
        match (w.first(), w.last()) {
            (Some(f), Some(l)) => self.is_admissible(w) && self.allows(l, f),
            _ => false,
        }
    }

    /// Boolean `T^m`; `T^0` is the identity.
    pub fn reachability(&self, m: usize) -> Vec<Vec<bool>> {
        let k = self.alphabet;
        let mut acc: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| i == j).collect()).collect();
        for _ in 0..m {
            acc = bool_mul(&acc, &self.transitions);
        }
        acc
    }

    /// Lexicographically least word `c` of length `len` with `a c b` admissible.
    pub fn connector(&self, a: u8, b: u8, len: usize) -> Option<Word> {
        if len == 0 {
            return self.allows(a, b).then(Word::default);
        }
        let powers: Vec<Vec<Vec<bool>>> = (0..=len).map(|m| self.reachability(m)).collect();
        let mut out = Vec::with_capacity(len);
        let mut current = a;
        for pos in 0..len {
            // after placing `s` there are `len - pos` steps left to reach `b`
            let next = (0..self.alphabet as u8)
                .find(|&s| self.allows(current, s) && powers[len - pos][s as usize][b as usize])?;
            out.push(next);
            current = next;
        }
        Some(Word::new(out))
    }

    /// Number of admissible words of length `len` (saturating).
    pub fn count_words(&self, len: usize) -> u128 {
        if len == 0 {
            return 1;
        }
        let k = self.alphabet;
        let mut v = vec![1u128; k];
        for _ in 1..len {
            let mut next = vec![0u128; k];
            for (a, &va) in v.iter().enumerate() {
                if va == 0 {
                    continue;
                }
                for (b, slot) in next.iter_mut().enumerate() {
                    if self.transitions[a][b] {
                        *slot = slot.saturating_add(va);
                    }
                }
            }
            v = next;
        }
        v.into_iter().fold(0u128, |acc, x| acc.saturating_add(x))
    }

    /// `trace(T^n)`, the number of points fixed by the `n`-th shift power.
    pub fn fixed_point_count(&self, n: usize) -> u128 {
        let k = self.alphabet;
        let t: Vec<Vec<u128>> = self
            .transitions
            .iter()
            .map(|r| r.iter().map(|&b| b as u128).collect())
            .collect();
        let mut acc: Vec<Vec<u128>> = (0..k).map(|i| (0..k).map(|j| (i == j) as u128).collect()).collect();
        for _ in 0..n {
            let mut next = vec![vec![0u128; k]; k];
            for i in 0..k {
                for l in 0..k {
                    if acc[i][l] == 0 {
                        continue;
                    }
                    for j in 0..k {
                        if t[l][j] != 0 {
                            next[i][j] = next[i][j].saturating_add(acc[i][l]);
                        }
                    }
                }
            }
            acc = next;
        }
        (0..k).fold(0u128, |s, i| s.saturating_add(acc[i][i]))
    }

    pub(crate) fn check_budget(&self, len: usize) -> Result<u128, DynamicsError> {
        let needed = self.count_words(len);
        if needed > self.budget as u128 {
            return Err(DynamicsError::BudgetExceeded {
                needed,
                budget: self.budget,
            });
        }
        Ok(needed)
    }

    /// Depth-first visit of every admissible word of length `len`, in lexicographic order.
    pub fn for_each_word<F: FnMut(&[u8])>(&self, len: usize, mut visit: F) -> Result<(), DynamicsError> {
        self.check_budget(len)?;
        if len == 0 {
            visit(&[]);
            return Ok(());
        }
        let mut buf = Vec::with_capacity(len);
        self.dfs_words(&mut buf, len, &mut visit);
        Ok(())
    }

    fn dfs_words<F: FnMut(&[u8])>(&self, buf: &mut Vec<u8>, len: usize, visit: &mut F) {
        if buf.len() == len {
            visit(buf);
            return;
        }
        for s in 0..self.alphabet as u8 {
            if buf.last().is_none_or(|&l| self.allows(l, s)) {
                buf.push(s);
                self.dfs_words(buf, len, visit);
                buf.pop();
            }
        }
    }

    pub fn admissible_words(&self, len: usize) -> Result<Vec<Word>, DynamicsError> {
        let mut out = Vec::new();
        self.for_each_word(len, |w| out.push(Word::from(w)))?;
        Ok(out)
    }

    /// One canonical representative per periodic orbit of least period `<= max_period`,
    /// sorted by `(period, word)`.
    pub fn enumerate_periodic_orbits(&self, max_period: usize) -> Result<Vec<PeriodicOrbit>, DynamicsError> {
        let mut out = Vec::new();
        for period in 1..=max_period {
            self.check_budget(period)?;
            let mut words = Vec::new();
            self.for_each_word(period, |w| {
                if self.allows(w[period - 1], w[0]) {
                    let word = Word::from(w);
                    if word.is_primitive() && word.least_rotation_index() == 0 {
                        words.push(word);
                    }
                }
            })?;
            out.extend(words.into_iter().map(PeriodicOrbit::from_canonical));
        }
        Ok(out)
    }

    /// Admissible random walk of `len` symbols starting right after `prev` (or anywhere).
    pub fn random_walk<R: Rng + ?Sized>(&self, rng: &mut R, prev: Option<u8>, len: usize) -> Word {
        let mut out = Vec::with_capacity(len);
        let mut current = prev;
        for _ in 0..len {
            let choices: Vec<u8> = (0..self.alphabet as u8)
                .filter(|&s| current.is_none_or(|c| self.allows(c, s)))
                .collect();
            let s = choices[rng.random_range(0..choices.len())];
            out.push(s);
            current = Some(s);
        }
        Word::new(out)
    }

    /// A random cyclic word: a random walk of `len` symbols closed with a connector.
    pub fn random_cycle<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Word {
        let walk = self.random_walk(rng, None, len.max(1));
        let (first, last) = (walk.first().unwrap(), walk.last().unwrap());
        let closing = self.closing_connector(last, first);
        let mut v = walk.into_inner();
        v.extend_from_slice(closing.symbols());
        Word::new(v)
    }

    /// Shortest (then lexicographically least) connector with `a c b` admissible.
    pub fn closing_connector(&self, a: u8, b: u8) -> Word {
        (0..=self.mixing.saturating_sub(1))
            .find_map(|len| self.connector(a, b, len))
            .expect("primitive shift always has a connector of length S-1")
    }
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let k = a.len();
    (0..k)
        .map(|i| (0..k).map(|j| (0..k).any(|l| a[i][l] && b[l][j])).collect())
        .collect()
}

/// Smallest `S <= k^2` with `T^S > 0`, or `None`.
fn primitivity_exponent(t: &[Vec<bool>]) -> Option<usize> {
    let k = t.len();
    let mut acc = t.to_vec();
    for s in 1..=k * k {
        if acc.iter().all(|row| row.iter().all(|&v| v)) {
            return Some(s);
        }
        acc = bool_mul(&acc, t);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn mixing_constant_examples() {
        assert_eq!(Sft::full_shift(2).mixing_constant(), 1);
        assert_eq!(Sft::golden_mean().mixing_constant(), 2);
        let cycle = Sft::from_rows(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]], 2.0);
        assert_eq!(cycle.unwrap_err(), DynamicsError::NotPrimitive);
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(matches!(
            Sft::from_rows(&[&[1, 1], &[1]], 2.0),
            Err(DynamicsError::InvalidSft(_))
        ));
        assert!(matches!(
            Sft::from_rows(&[&[1, 0], &[1, 0]], 2.0),
            Err(DynamicsError::InvalidSft(_))
        ));
        assert!(matches!(
            Sft::from_rows(&[&[1, 1], &[1, 1]], 1.0),
            Err(DynamicsError::InvalidSft(_))
        ));
    }

    #[test]
    fn orbit_enumeration_examples() {
        let full: Vec<String> = Sft::full_shift(2)
            .enumerate_periodic_orbits(2)
            .unwrap()
            .iter()
            .map(|o| o.word().to_string())
            .collect();
        assert_eq!(full, ["0", "1", "01"]);

        let golden: Vec<String> = Sft::golden_mean()
            .enumerate_periodic_orbits(2)
            .unwrap()
            .iter()
            .map(|o| o.word().to_string())
            .collect();
        assert_eq!(golden, ["0", "01"]);

        let fixed = Sft::golden_mean().enumerate_periodic_orbits(1).unwrap();
        assert_eq!(fixed.len(), 1);
        assert_eq!(fixed[0].word(), &w("0"));
    }

    #[test]
    fn budget_is_enforced() {
        let s = Sft::full_shift(2).with_budget(10);
        assert!(matches!(
            s.enumerate_periodic_orbits(5),
            Err(DynamicsError::BudgetExceeded { needed: 16, budget: 10 })
        ));
    }

    #[test]
    fn connectors_are_least() {
        let g = Sft::golden_mean();
        // 1 -> ? -> 1 must pass through 0.
        assert_eq!(g.connector(1, 1, 1), Some(w("0")));
        assert_eq!(g.connector(1, 1, 0), None);
        assert_eq!(g.connector(0, 0, 0), Some(w("")));
        assert_eq!(g.closing_connector(1, 1), w("0"));
        let f = Sft::full_shift(3);
        assert_eq!(f.connector(2, 2, 2), Some(w("00")));
    }

    #[test]
    fn word_counts() {
        let g = Sft::golden_mean();
        // Fibonacci: 2, 3, 5, 8.
        assert_eq!(
            (1..=4).map(|n| g.count_words(n)).collect::<Vec<_>>(),
            vec![2, 3, 5, 8]
        );
        assert_eq!(g.admissible_words(2).unwrap(), vec![w("00"), w("01"), w("10")]);
        // trace of golden mean powers: Lucas numbers 1, 3, 4, 7.
        assert_eq!(
            (1..=4).map(|n| g.fixed_point_count(n)).collect::<Vec<_>>(),
            vec![1, 3, 4, 7]
        );
    }
}
