use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::base_dynamics::{transitive_point, SymbolicPoint, Word};
use crate::cocycle::{linalg, Matrix, MatrixGenerator};
use crate::serde_ext;

use super::{check_periodic_obstruction, default_obstruction_tol, LivsicError, TransferTable};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Cylinder length `L`.
    pub depth: usize,
    /// Maximal number of orbit steps walked.
    pub orbit_budget: usize,
    /// Value assigned to the base cylinder; the identity when `None`.
    pub gauge: Option<Matrix>,
    /// Periods scanned by the obstruction check; `min(L + 2r + 1, 16)` when `None`.
    pub obstruction_period: Option<usize>,
    /// Obstruction tolerance; [`default_obstruction_tol`] when `None`.
    pub tol: Option<f64>,
}

impl SolveOptions {
    pub fn new(depth: usize, orbit_budget: usize) -> Self {
        SolveOptions {
            depth,
            orbit_budget,
            gauge: None,
            obstruction_period: None,
            tol: None,
        }
    }
}

pub fn solve_coboundary(g: &MatrixGenerator, depth: usize, orbit_budget: usize) -> Result<TransferTable, LivsicError> {
    solve_coboundary_with(g, &SolveOptions::new(depth, orbit_budget))
}

/// Builds `P` on depth-`L` cylinders along the forward orbit of a transitive point `x0`:
/// `P(f^t x0) = A^t(x0) G`. Later visits to a cylinder only update the oscillation.
pub fn solve_coboundary_with(g: &MatrixGenerator, opts: &SolveOptions) -> Result<TransferTable, LivsicError> {
    let depth = opts.depth;
    let d = g.dim();
    if depth == 0 {
        return Err(LivsicError::InvalidParameter("depth must be >= 1".into()));
    }
    if let Some(w) = g.singular_windows().into_iter().next() {
        return Err(LivsicError::SingularWindow(w));
    }
    let gauge = match &opts.gauge {
        Some(m) if m.shape() != (d, d) => {
            return Err(LivsicError::InvalidParameter(format!("gauge must be {d}x{d}")));
        }
        Some(m) if m.iter().any(|v| !v.is_finite()) || linalg::is_singular(m) => {
            return Err(LivsicError::InvalidParameter("gauge must be finite and invertible".into()));
        }
        Some(m) => m.clone(),
        None => Matrix::identity(d, d),
    };
    let period = opts
        .obstruction_period
        .unwrap_or_else(|| (depth + g.window_len()).min(16));
    let tol = opts.tol.unwrap_or_else(|| default_obstruction_tol(g));
    let obstruction = check_periodic_obstruction(g, period, tol)?;
    if let Some(orbit) = obstruction.witness {
        let defect = linalg::spectral_norm(&(g.orbit_product_plain(&orbit)? - Matrix::identity(d, d)));
        return Err(LivsicError::ObstructionFailed { orbit, defect });
    }

    let sft = g.sft();
    let needed = sft.count_words(depth);
    let x0 = transitive_point(sft, depth)?;
    let h = ((depth - 1) / 2) as i64;
    // the last listed word starts before the end of the core
    let walk = ((x0.core_start() + x0.core().len() as i64).max(0) as usize).min(opts.orbit_budget);

    let mut entries: BTreeMap<Word, Matrix> = BTreeMap::new();
    let mut oscillation = 0.0f64;
    let mut p = gauge;
    for t in 0..=walk as i64 {
        let key = x0.window(t - h, depth);
        match entries.get(&key) {
            Some(prev) => oscillation = oscillation.max(linalg::spectral_norm(&(prev - &p))),
            None => {
                entries.insert(key, p.clone());
            }
        }
        if t == walk as i64 {
            break;
        }
        p = g.evaluate_at(&x0, t)? * p;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(LivsicError::InvalidParameter(format!(
                "transfer values overflow after {} steps",
                t + 1
            )));
        }
    }
    let table = TransferTable::new(depth, d, entries, x0.window(-h, depth), oscillation, walk);
    if (table.entries().len() as u128) < needed {
        let missing = table.missing(sft)?;
        return Err(LivsicError::CoverageIncomplete {
            missing: missing.len(),
            first: missing[0].clone(),
        });
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoboundaryCheck {
    /// `sup ||A(x) - P(f(x)) P(x)^{-1}||` over every admissible span word.
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub exhaustive_defect: f64,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub sampled_defect: f64,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub defect: f64,
    /// Span word (indices `span_start ..`) attaining the exhaustive maximum.
    pub worst_span: Option<Word>,
    pub span_start: i64,
    pub windows_checked: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Checks the coboundary equation on every admissible word covering the windows of
/// `A(x)`, `P(x)` and `P(f(x))`, then on `samples` seeded random points.
pub fn verify_coboundary(
    g: &MatrixGenerator,
    t: &TransferTable,
    samples: usize,
    seed: u64,
) -> Result<CoboundaryCheck, LivsicError> {
    if t.dim() != g.dim() {
        return Err(LivsicError::InvalidTable(format!(
            "table dimension {} differs from generator dimension {}",
            t.dim(),
            g.dim()
        )));
    }
    let sft = g.sft();
    if t.entries().keys().flat_map(|w| w.symbols()).any(|&s| s as usize >= sft.alphabet()) {
        return Err(LivsicError::InvalidTable("key symbol outside the alphabet".into()));
    }
    let missing = t.missing(sft)?;
    if let Some(first) = missing.first() {
        return Err(LivsicError::CoverageIncomplete {
            missing: missing.len(),
            first: first.clone(),
        });
    }
    let inverses: BTreeMap<&Word, Option<Matrix>> =
        t.entries().iter().map(|(w, m)| (w, m.clone().try_inverse())).collect();

    let h = t.offset() as i64;
    let r = g.radius() as i64;
    let depth = t.depth();
    let lo = (-h).min(-r);
    let hi = (depth as i64 - h).max(r);
    let span = (hi - lo + 1) as usize;

    let defect_of = |a: &Matrix, k0: &Word, k1: &Word| -> f64 {
        let (Some(p1), Some(Some(inv0))) = (t.entries().get(k1), inverses.get(k0)) else {
            return f64::INFINITY;
        };
        let e = linalg::spectral_norm(&(a - p1 * inv0));
        if e.is_nan() {
            f64::INFINITY
        } else {
            e
        }
    };

    let mut exhaustive = 0.0f64;
    let mut worst_span = None;
    let mut checked = 0usize;
    let mut bad: Option<LivsicError> = None;
    sft.for_each_word(span, |s| {
        if bad.is_some() {
            return;
        }
        let a_at = (-r - lo) as usize;
        let Some(a) = g.lookup(&s[a_at..a_at + g.window_len()]) else {
            bad = Some(LivsicError::InvalidTable(format!("no generator window inside {}", Word::from(s))));
            return;
        };
        let k0 = Word::from(&s[(-h - lo) as usize..(-h - lo) as usize + depth]);
        let k1 = Word::from(&s[(1 - h - lo) as usize..(1 - h - lo) as usize + depth]);
        let e = defect_of(a, &k0, &k1);
        checked += 1;
        if e > exhaustive || worst_span.is_none() {
            exhaustive = exhaustive.max(e);
            worst_span = Some(Word::from(s));
        }
    })?;
    if let Some(e) = bad {
        return Err(e);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = 0.0f64;
    for _ in 0..samples {
        let core_len = 2 * span + 8;
        let x = SymbolicPoint::random(sft, &mut rng, core_len);
        let j = rng.random_range(0..core_len as i64);
        let a = g.evaluate_at(&x, j)?;
        let k0 = x.window(j - h, depth);
        let k1 = x.window(j + 1 - h, depth);
        sampled = sampled.max(defect_of(a, &k0, &k1));
    }

    Ok(CoboundaryCheck {
        exhaustive_defect: exhaustive,
        sampled_defect: sampled,
        defect: exhaustive.max(sampled),
        worst_span,
        span_start: lo,
        windows_checked: checked,
        samples,
        seed,
    })
}
