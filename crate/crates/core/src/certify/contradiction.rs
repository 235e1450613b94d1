use serde::Serialize;

use crate::base_dynamics::{shadow_segment, PeriodicOrbit, SymbolicPoint, Word};
use crate::cocycle::{exterior_generator, linalg, MatrixGenerator};
use crate::lyapunov::{growth_constant, LyapunovError};
use crate::serde_ext;

use super::{CertificateInput, CertifyError};

/// Evidence at one segment length `n` of the replay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContradictionRow {
    pub n: usize,
    /// `2n + S`.
    pub period: usize,
    pub shadow: PeriodicOrbit,
    /// `d(p_n, x)`, exact.
    pub distance: f64,
    /// `log |det A^{2n+S}(p_n)|`.
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub measured_log: f64,
    /// `measured_log / (2n + S)`, the exponent sum of the periodic measure on `p_n`.
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub measured_exponent: f64,
    /// `log C_hat + (rho + eps - theta alpha / 2)(2n + S)`; a bound on `measured_log` when `A(x) = 0`.
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub formula_log_bound: f64,
    /// `log C_eps + (rho + eps)(2n + S - 1) + log(C_1 d(p_n, x)^alpha + |det A(x)|)`, valid for any window.
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub direct_log_bound: f64,
    /// `measured_exponent < -tau`.
    pub measured_contradiction: bool,
    /// `formula_log_bound < -tau (2n + S)`.
    pub formula_contradiction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContradictionOutcome {
    /// The periodic measure on `p_n` already violates `-tau <=` at this `n`.
    Measured { n: usize },
    /// The window is singular and the formula chain forces a violation from `n_star` on.
    Predicted { n_star: usize },
    /// No violation measured and the window is not singular: the argument is vacuous.
    NoContradiction,
}

/// The determinant cocycle run through the non-vanishing argument at a window `w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContradictionReport {
    pub window: Word,
    pub input: CertificateInput,
    /// `(alpha theta / c - rho - tau) / 2`.
    pub eps: f64,
    pub mixing_constant: usize,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub window_log_abs_det: f64,
    pub window_singular: bool,
    /// `N` and `C_eps` of the uniform growth bound for `det A`.
    pub growth_n: usize,
    pub c_eps: f64,
    /// Hölder constant of `det A`.
    pub c1: f64,
    pub delta: f64,
    /// `log(C_eps C_1 delta^alpha e^{theta alpha S})`.
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub log_c_hat: f64,
    /// The point `x` with `x_{-r} .. x_r = w`.
    pub base_point: SymbolicPoint,
    pub rows: Vec<ContradictionRow>,
    /// Smallest `n` with `(rho + tau + eps - theta alpha / 2)(2n + S) + log C_hat < 0`.
    pub predicted_threshold: usize,
    pub outcome: ContradictionOutcome,
}

/// The window whose determinant has least modulus (first in lexicographic order on ties).
pub fn weakest_window(g: &MatrixGenerator) -> Word {
    g.entries()
        .into_iter()
        .map(|(w, m)| (w, linalg::log_abs_det(m)))
        .fold(None, |best: Option<(Word, f64)>, (w, v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((w, v)),
        })
        .expect("generator tables are nonempty")
        .0
}

/// Replays the argument that a cocycle satisfying the exponent bounds cannot vanish.
///
/// Works on `det A` (the top exterior power). For `n = 1..=n_max` it builds the centered
/// shadow `p_n` of a point `x` reading `w` at the origin, measures the exponent of the
/// periodic measure on `p_n`, and evaluates the bounds of the inequality chain.
pub fn singularity_contradiction(
    g: &MatrixGenerator,
    w: &Word,
    n_max: usize,
    input: &CertificateInput,
    growth_n_max: usize,
) -> Result<ContradictionReport, CertifyError> {
    input.validate()?;
    if input.c < 2.0 {
        return Err(CertifyError::InvalidInput(format!(
            "c = {} is not realized on a two-sided shift; the centered construction needs c >= 2",
            input.c
        )));
    }
    let eps = (input.bound_rhs() - input.rho - input.tau) / 2.0;
    if !(eps > 0.0) {
        return Err(CertifyError::InvalidInput(format!(
            "rho + tau = {} leaves no room below alpha theta / c = {}",
            input.bound_lhs(),
            input.bound_rhs()
        )));
    }
    let sft = g.sft();
    let table_w = g
        .lookup(w.symbols())
        .ok_or_else(|| CertifyError::InvalidInput(format!("{w} is not a window of the generator")))?;
    let det = exterior_generator(g, g.dim())?;
    let growth = growth_constant(&det, input.rho, eps, growth_n_max).map_err(|e| match e {
        LyapunovError::NotFound(n) => {
            CertifyError::HypothesisUnavailable(format!("no uniform N <= {n} for the determinant cocycle"))
        }
        other => other.into(),
    })?;
    let c1 = det.holder_constant();
    let s = sft.mixing_constant();
    let (alpha, theta) = (input.alpha, input.theta);
    let delta = 1.0f64;
    let log_c_hat = growth.log_c_eps + c1.ln() + alpha * delta.ln() + theta * alpha * s as f64;
    let window_log_abs_det = linalg::log_abs_det(table_w);
    let window_abs_det = window_log_abs_det.exp();

    let x = base_point(g, w)?;
    let slope = input.rho + eps - theta * alpha / 2.0;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let sh = shadow_segment(sft, &x, n, true)?;
        let p = &sh.point;
        let period = sh.period;
        let mut measured_log = 0.0;
        for j in 0..period as i64 {
            let win = p.window(j - g.radius() as i64, g.window_len());
            let m = det.lookup(win.symbols()).expect("shadow windows are admissible");
            measured_log += linalg::log_abs_det(m);
        }
        let distance = x.distance(p, x.resolving_horizon(p), sft.metric_base()).value;
        let formula_log_bound = log_c_hat + slope * period as f64;
        let direct_log_bound = growth.log_bound(period - 1) + (c1 * distance.powf(alpha) + window_abs_det).ln();
        let measured_exponent = measured_log / period as f64;
        rows.push(ContradictionRow {
            n,
            period,
            shadow: sh.orbit.clone(),
            distance,
            measured_log,
            measured_exponent,
            formula_log_bound,
            direct_log_bound,
            measured_contradiction: measured_exponent < -input.tau,
            formula_contradiction: formula_log_bound < -input.tau * period as f64,
        });
    }

    let predicted_threshold = threshold(input.rho + input.tau + eps - theta * alpha / 2.0, s, log_c_hat);
    let window_singular = linalg::is_singular(table_w);
    let outcome = match rows.iter().find(|r| r.measured_contradiction) {
        Some(r) => ContradictionOutcome::Measured { n: r.n },
        None if window_singular => ContradictionOutcome::Predicted {
            n_star: predicted_threshold,
        },
        None => ContradictionOutcome::NoContradiction,
    };
    Ok(ContradictionReport {
        window: w.clone(),
        input: *input,
        eps,
        mixing_constant: s,
        window_log_abs_det,
        window_singular,
        growth_n: growth.n,
        c_eps: growth.c_eps,
        c1,
        delta,
        log_c_hat,
        base_point: x,
        rows,
        predicted_threshold,
        outcome,
    })
}

/// Smallest `n >= 1` with `a (2n + s) + log_c_hat < 0`, for `a < 0`.
fn threshold(a: f64, s: usize, log_c_hat: f64) -> usize {
    let holds = |n: usize| a * (2 * n + s) as f64 + log_c_hat < 0.0;
    if log_c_hat == f64::NEG_INFINITY || holds(1) {
        return 1;
    }
    let estimate = ((log_c_hat / -a - s as f64) / 2.0).floor().max(1.0) as usize;
    let mut n = estimate.max(1);
    while n > 1 && holds(n - 1) {
        n -= 1;
    }
    while !holds(n) {
        n += 1;
    }
    n
}

/// `x` reading `w` on `[-r, r]`, with tails on the least periodic orbit.
fn base_point(g: &MatrixGenerator, w: &Word) -> Result<SymbolicPoint, CertifyError> {
    let sft = g.sft();
    let tail = sft
        .enumerate_periodic_orbits(sft.alphabet())?
        .into_iter()
        .next()
        .expect("a primitive shift has a periodic orbit of period <= alphabet size")
        .word()
        .clone();
    let lead = sft.closing_connector(tail.last().unwrap(), w.first().unwrap());
    let trail = sft.closing_connector(w.last().unwrap(), tail.first().unwrap());
    let mut core = lead.symbols().to_vec();
    core.extend_from_slice(w.symbols());
    core.extend_from_slice(trail.symbols());
    let start = -(g.radius() as i64) - lead.len() as i64;
    let x = SymbolicPoint::new(tail.clone(), Word::new(core), start, tail)?;
    x.validate(sft)?;
    Ok(x)
}
