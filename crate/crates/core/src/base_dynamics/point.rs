use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DynamicsError, Sft, Word};

/// An eventually periodic bi-infinite sequence.
///
/// `left` repeats towards `-inf` and ends at index `core_start - 1`; `core`
/// occupies `[core_start, core_start + core.len())`; `right` repeats towards
/// `+inf` starting at the end of the core. Shifting only moves `core_start`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct SymbolicPoint {
    left: Word,
    core: Word,
    core_start: i64,
    right: Word,
}

/// Largest core offset accepted from external input; keeps index arithmetic far from overflow.
pub const MAX_CORE_OFFSET: i64 = 1 << 40;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    left: Word,
    #[serde(default)]
    core: Word,
    #[serde(default)]
    core_start: i64,
    right: Word,
}

impl TryFrom<RawPoint> for SymbolicPoint {
    type Error = DynamicsError;

    fn try_from(raw: RawPoint) -> Result<Self, Self::Error> {
        if raw.core_start.abs() > MAX_CORE_OFFSET {
            return Err(DynamicsError::InadmissiblePoint(format!(
                "core_start {} out of range",
                raw.core_start
            )));
        }
        SymbolicPoint::new(raw.left, raw.core, raw.core_start, raw.right)
    }
}

/// Result of a metric evaluation restricted to indices `|n| <= horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    /// `b^{-m}` for the first disagreement `m`, or 0 when none was found.
    pub value: f64,
    /// `m = min{|n| : x_n != y_n}` when found within the horizon.
    pub exponent: Option<u64>,
    pub agrees_to_horizon: bool,
}

impl SymbolicPoint {
    pub fn new(left: Word, core: Word, core_start: i64, right: Word) -> Result<Self, DynamicsError> {
        if left.is_empty() || right.is_empty() {
            return Err(DynamicsError::InadmissiblePoint("periodic tails must be nonempty".into()));
        }
        Ok(SymbolicPoint {
            left,
            core,
            core_start,
            right,
        })
    }

    /// The periodic point `...www.www...` with `w_0` at index `anchor`.
    pub fn periodic(word: Word, anchor: i64) -> Result<Self, DynamicsError> {
        Self::new(word.clone(), Word::default(), anchor, word)
    }

    pub fn left(&self) -> &Word {
        &self.left
    }

    pub fn core(&self) -> &Word {
        &self.core
    }

    pub fn core_start(&self) -> i64 {
        self.core_start
    }

    pub fn right(&self) -> &Word {
        &self.right
    }

    fn core_end(&self) -> i64 {
        self.core_start + self.core.len() as i64
    }

    pub fn symbol_at(&self, n: i64) -> u8 {
        let end = self.core_end();
        if n >= end {
            let r = self.right.len() as i64;
            self.right.symbols()[(n - end).rem_euclid(r) as usize]
        } else if n >= self.core_start {
            self.core.symbols()[(n - self.core_start) as usize]
        } else {
            let l = self.left.len() as i64;
            let back = (self.core_start - 1 - n).rem_euclid(l);
            self.left.symbols()[(l - 1 - back) as usize]
        }
    }

    /// `shift(k).symbol_at(n) == self.symbol_at(n + k)`.
    pub fn shift(&self, k: i64) -> SymbolicPoint {
        SymbolicPoint {
            core_start: self.core_start - k,
            ..self.clone()
        }
    }

    /// Symbols at indices `[start, start + len)`.
    pub fn window(&self, start: i64, len: usize) -> Word {
        Word::new((0..len as i64).map(|i| self.symbol_at(start + i)).collect())
    }

    /// Checks every junction and both tails against the transition matrix.
    pub fn validate(&self, sft: &Sft) -> Result<(), DynamicsError> {
        let fail = |what: &str| Err(DynamicsError::InadmissiblePoint(format!("{what} in {self}")));
        for w in [&self.left, &self.core, &self.right] {
            if !sft.contains_symbols(w) {
                return fail("symbol outside alphabet");
            }
        }
        if !sft.is_cyclic(&self.left) {
            return fail("left tail is not a cycle");
        }
        if !sft.is_cyclic(&self.right) {
            return fail("right tail is not a cycle");
        }
        if !sft.is_admissible(&self.core) {
            return fail("forbidden transition in core");
        }
        let after_left = self.core.first().or(self.right.first()).unwrap();
        if !sft.allows(self.left.last().unwrap(), after_left) {
            return fail("forbidden junction after left tail");
        }
        if let Some(last) = self.core.last() {
            if !sft.allows(last, self.right.first().unwrap()) {
                return fail("forbidden junction before right tail");
            }
        }
        Ok(())
    }

    /// Least `|n| <= horizon` with `x_n != y_n`.
    pub fn disagreement_depth(&self, other: &SymbolicPoint, horizon: u64) -> Option<u64> {
        (0..=horizon as i64)
            .find(|&m| self.symbol_at(m) != other.symbol_at(m) || self.symbol_at(-m) != other.symbol_at(-m))
            .map(|m| m as u64)
    }

    /// `d(x, y) = b^{-m}` scanned over `|n| <= horizon`.
    pub fn distance(&self, other: &SymbolicPoint, horizon: u64, base: f64) -> Distance {
        match self.disagreement_depth(other, horizon) {
            Some(m) => Distance {
                value: base.powi(-(m as i32)),
                exponent: Some(m),
                agrees_to_horizon: false,
            },
            None => Distance {
                value: 0.0,
                exponent: None,
                agrees_to_horizon: true,
            },
        }
    }

    /// A horizon past which both points are periodic with a common period on each side.
    fn resolving_range(&self, other: &SymbolicPoint) -> (i64, i64) {
        let lcm = |a: usize, b: usize| a / gcd(a, b) * b;
        let lo = self.core_start.min(other.core_start) - lcm(self.left.len(), other.left.len()) as i64;
        let hi = self.core_end().max(other.core_end()) + lcm(self.right.len(), other.right.len()) as i64;
        (lo, hi)
    }

    /// Horizon that makes [`SymbolicPoint::distance`] exact for this pair.
    pub fn resolving_horizon(&self, other: &SymbolicPoint) -> u64 {
        let (lo, hi) = self.resolving_range(other);
        lo.unsigned_abs().max(hi.unsigned_abs())
    }

    /// Random eventually periodic admissible point.
    pub fn random<R: Rng + ?Sized>(sft: &Sft, rng: &mut R, core_len: usize) -> SymbolicPoint {
        let left_len = rng.random_range(1..=4);
        let left = sft.random_cycle(rng, left_len);
        let mut core = Vec::with_capacity(core_len + 8);
        let walk = sft.random_walk(rng, left.last(), core_len);
        core.extend_from_slice(walk.symbols());
        let right_len = rng.random_range(1..=4);
        let right = sft.random_cycle(rng, right_len);
        let tail_from = core.last().copied().unwrap_or(left.last().unwrap());
        core.extend_from_slice(sft.closing_connector(tail_from, right.first().unwrap()).symbols());
        let start = rng.random_range(-(core.len() as i64) - 3..=3);
        SymbolicPoint {
            left,
            core: Word::new(core),
            core_start: start,
            right,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl PartialEq for SymbolicPoint {
    fn eq(&self, other: &Self) -> bool {
        let (lo, hi) = self.resolving_range(other);
        (lo..hi).all(|n| self.symbol_at(n) == other.symbol_at(n))
    }
}

impl Eq for SymbolicPoint {}

impl fmt::Display for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*[{}]@{}({})*", self.left, self.core, self.core_start, self.right)
    }
}
