use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest alphabet that has a one-character text encoding (`0-9`, then `a-z`).
pub const MAX_TEXT_ALPHABET: usize = 36;

/// A finite word over the alphabet `{0, .., k-1}`.
///
/// The text form writes one base-36 digit per symbol, so `"01a"` is the word
/// `[0, 1, 10]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<u8>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordParseError {
    #[error("invalid symbol {ch:?} at position {pos}")]
    InvalidSymbol { ch: char, pos: usize },
}

impl Word {
    pub fn new(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    /// Rotation by `k` places to the left.
    pub fn rotated(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut v = Vec::with_capacity(self.0.len());
        v.extend_from_slice(&self.0[k..]);
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    /// Index of the lexicographically least rotation (Booth's algorithm).
    pub fn least_rotation_index(&self) -> usize {
        let n = self.0.len();
        if n == 0 {
            return 0;
        }
        let s = |i: isize| self.0[i as usize % n];
        let mut fail = vec![-1isize; 2 * n];
        let mut k: isize = 0;
        for j in 1..(2 * n) as isize {
            let sj = s(j);
            let mut i = fail[(j - k - 1) as usize];
            while i != -1 && sj != s(k + i + 1) {
                if sj < s(k + i + 1) {
                    k = j - i - 1;
                }
                i = fail[i as usize];
            }
            if sj != s(k + i + 1) {
                if sj < s(k) {
                    k = j;
                }
                fail[(j - k) as usize] = -1;
            } else {
                fail[(j - k) as usize] = i + 1;
            }
        }
        k as usize % n
    }

    pub fn least_rotation(&self) -> Word {
        self.rotated(self.least_rotation_index())
    }

    /// Length of the shortest `u` with `self = u^m`.
    pub fn primitive_root_len(&self) -> usize {
        let n = self.0.len();
        (1..=n)
            .filter(|p| n % p == 0)
            .find(|&p| (p..n).all(|i| self.0[i] == self.0[i - p]))
            .unwrap_or(0)
    }

    pub fn is_primitive(&self) -> bool {
        !self.0.is_empty() && self.primitive_root_len() == self.0.len()
    }

    /// Base-`k` integer code, most significant symbol first.
    pub fn code(&self, k: usize) -> usize {
        self.0.iter().fold(0usize, |acc, &s| acc * k + s as usize)
    }

    pub fn from_code(mut code: usize, k: usize, len: usize) -> Word {
        let mut v = vec![0u8; len];
        for slot in v.iter_mut().rev() {
            *slot = (code % k) as u8;
            code /= k;
        }
        Word(v)
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

impl FromStr for Word {
    type Err = WordParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(pos, ch)| {
                ch.to_digit(MAX_TEXT_ALPHABET as u32)
                    .filter(|_| !ch.is_ascii_uppercase())
                    .map(|d| d as u8)
                    .ok_or(WordParseError::InvalidSymbol { ch, pos })
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            let ch = char::from_digit(s as u32, MAX_TEXT_ALPHABET as u32).unwrap_or('?');
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
