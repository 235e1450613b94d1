use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DynamicsError, Sft, SymbolicPoint, Word};

/// A periodic orbit, stored as its canonical word: primitive and the least of its rotations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PeriodicOrbit {
    word: Word,
}

impl PeriodicOrbit {
    /// Canonicalizes any cyclic word `w`: the orbit of the periodic point `w^inf`.
    pub fn from_cycle(sft: &Sft, w: &Word) -> Result<Self, DynamicsError> {
        if !sft.is_cyclic(w) {
            return Err(DynamicsError::InadmissibleWord(w.clone()));
        }
        let root = Word::from(&w.symbols()[..w.primitive_root_len()]);
        Ok(PeriodicOrbit {
            word: root.least_rotation(),
        })
    }

    pub(crate) fn from_canonical(word: Word) -> Self {
        debug_assert!(word.is_primitive() && word.least_rotation_index() == 0);
        PeriodicOrbit { word }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    /// Least period.
    pub fn period(&self) -> usize {
        self.word.len()
    }

    /// The orbit point with the canonical word starting at index 0.
    pub fn point(&self) -> SymbolicPoint {
        SymbolicPoint::periodic(self.word.clone(), 0).expect("orbit words are nonempty")
    }
}

impl fmt::Display for PeriodicOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word)
    }
}
