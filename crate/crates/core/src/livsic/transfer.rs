use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::base_dynamics::{Sft, Word};
use crate::cocycle::{linalg, Matrix};

use super::LivsicError;

/// Piecewise-constant approximation of the transfer map `P` on centered cylinders.
///
/// The key of `P(x)` is `x_{-h} .. x_{L-1-h}` with `h = (L - 1) / 2`. Entries are
/// normalized so that the base point of the solving orbit maps to the gauge (the
/// identity unless chosen otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct TransferTable {
    depth: usize,
    dim: usize,
    entries: BTreeMap<Word, Matrix>,
    base_window: Word,
    oscillation: f64,
    steps: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    depth: usize,
    dim: usize,
    base_window: Word,
    oscillation: f64,
    #[serde(default)]
    steps: usize,
    entries: BTreeMap<Word, Vec<f64>>,
}

impl TransferTable {
    pub(crate) fn new(
        depth: usize,
        dim: usize,
        entries: BTreeMap<Word, Matrix>,
        base_window: Word,
        oscillation: f64,
        steps: usize,
    ) -> Self {
        TransferTable {
            depth,
            dim,
            entries,
            base_window,
            oscillation,
            steps,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Offset `h` of the cylinder: the key of `P(x)` starts at `x_{-h}`.
    pub fn offset(&self) -> usize {
        (self.depth - 1) / 2
    }

    pub fn base_window(&self) -> &Word {
        &self.base_window
    }

    /// Largest distance between two values assigned to one cylinder along the orbit.
    pub fn oscillation(&self) -> f64 {
        self.oscillation
    }

    /// Orbit steps walked by the solver.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn entries(&self) -> &BTreeMap<Word, Matrix> {
        &self.entries
    }

    pub fn get(&self, w: &[u8]) -> Option<&Matrix> {
        self.entries.get(&Word::from(w))
    }

    /// Overwrites one entry; meant for perturbation experiments.
    pub fn set(&mut self, w: Word, m: Matrix) -> Result<(), LivsicError> {
        check_entry(&w, &m, self.depth, self.dim)?;
        self.entries.insert(w, m);
        Ok(())
    }

    /// Every entry multiplied on the right by `g`.
    pub fn right_mul(&self, g: &Matrix) -> TransferTable {
        let mut out = self.clone();
        for m in out.entries.values_mut() {
            *m = &*m * g;
        }
        out
    }

    /// Admissible cylinders of length `depth` without an entry.
    pub fn missing(&self, sft: &Sft) -> Result<Vec<Word>, LivsicError> {
        let mut out = Vec::new();
        sft.for_each_word(self.depth, |w| {
            if !self.entries.contains_key(&Word::from(w)) {
                out.push(Word::from(w));
            }
        })?;
        Ok(out)
    }

    /// The depth `L` key contained in a depth `L + 1` key.
    pub fn parent_key(child: &Word, child_depth: usize) -> Word {
        let h_child = (child_depth - 1) / 2;
        let h = (child_depth - 2) / 2;
        let start = h_child - h;
        Word::from(&child.symbols()[start..start + child_depth - 1])
    }

    pub fn to_json(&self) -> String {
        let raw = RawTable {
            depth: self.depth,
            dim: self.dim,
            base_window: self.base_window.clone(),
            oscillation: self.oscillation,
            steps: self.steps,
            entries: self
                .entries
                .iter()
                .map(|(w, m)| (w.clone(), linalg::to_row_major(m)))
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("finite tables serialize")
    }

    /// Parses and validates a table: keys of length `depth`, `dim x dim` finite invertible entries.
    pub fn from_json(text: &str) -> Result<TransferTable, LivsicError> {
        let raw: RawTable = serde_json::from_str(text).map_err(|e| LivsicError::InvalidTable(e.to_string()))?;
        if raw.depth == 0 || raw.dim == 0 || raw.dim > crate::cocycle::MAX_DIM {
            return Err(LivsicError::InvalidTable(format!(
                "depth {} and dim {} must be positive (dim at most {})",
                raw.depth,
                raw.dim,
                crate::cocycle::MAX_DIM
            )));
        }
        if !(raw.oscillation >= 0.0 && raw.oscillation.is_finite()) {
            return Err(LivsicError::InvalidTable(format!("oscillation {} is not a finite nonnegative number", raw.oscillation)));
        }
        if raw.base_window.len() != raw.depth {
            return Err(LivsicError::InvalidTable("base window length differs from depth".into()));
        }
        let mut entries = BTreeMap::new();
        for (w, v) in raw.entries {
            let m = linalg::from_row_major(raw.dim, &v)
                .ok_or_else(|| LivsicError::InvalidTable(format!("entry {w} needs {} values", raw.dim * raw.dim)))?;
            check_entry(&w, &m, raw.depth, raw.dim)?;
            entries.insert(w, m);
        }
        Ok(TransferTable {
            depth: raw.depth,
            dim: raw.dim,
            entries,
            base_window: raw.base_window,
            oscillation: raw.oscillation,
            steps: raw.steps,
        })
    }
}

fn check_entry(w: &Word, m: &Matrix, depth: usize, dim: usize) -> Result<(), LivsicError> {
    if w.len() != depth {
        return Err(LivsicError::InvalidTable(format!("key {w} does not have length {depth}")));
    }
    if m.shape() != (dim, dim) {
        return Err(LivsicError::InvalidTable(format!("entry {w} is not {dim}x{dim}")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(LivsicError::InvalidTable(format!("entry {w} has non-finite values")));
    }
    if linalg::is_singular(m) {
        return Err(LivsicError::InvalidTable(format!("entry {w} is singular")));
    }
    Ok(())
}
