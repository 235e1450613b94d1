use serde::Serialize;

use super::{DynamicsError, PeriodicOrbit, Sft, SymbolicPoint, Word};

/// A periodic point shadowing an orbit segment.
#[derive(Debug, Clone, Serialize)]
pub struct Shadow {
    /// The shadowing point itself, positioned so that it copies the segment in place.
    pub point: SymbolicPoint,
    /// `n + S`, or `2n + S` for a centered segment; `point` is fixed by this shift power.
    pub period: usize,
    pub orbit: PeriodicOrbit,
    pub n: usize,
    pub centered: bool,
    pub connector: Word,
}

/// Per-step evidence for the exponential shadowing inequality with `delta = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct ShadowCheck {
    pub holds: bool,
    /// `(j, first disagreement |m| of the shifted pair if any, required exponent min{j, span-j})`.
    pub rows: Vec<(usize, Option<u64>, u64)>,
}

/// Builds the periodic point of period `n + S` (or `2n + S` when `centered`) that copies
/// `x` on `[0, n]` (resp. `[-n, n]`) and closes up with the least connector of length `S - 1`.
pub fn shadow_segment(sft: &Sft, x: &SymbolicPoint, n: usize, centered: bool) -> Result<Shadow, DynamicsError> {
    x.validate(sft)?;
    let start = if centered { -(n as i64) } else { 0 };
    let len = if centered { 2 * n + 1 } else { n + 1 };
    let segment = x.window(start, len);
    let s = sft.mixing_constant();
    let connector = sft
        .connector(segment.last().unwrap(), segment.first().unwrap(), s - 1)
        .expect("T^S > 0 guarantees a connector of length S-1");
    let mut cycle = segment.into_inner();
    cycle.extend_from_slice(connector.symbols());
    let cycle = Word::new(cycle);
    let orbit = PeriodicOrbit::from_cycle(sft, &cycle)?;
    Ok(Shadow {
        period: cycle.len(),
        point: SymbolicPoint::periodic(cycle, start)?,
        orbit,
        n,
        centered,
        connector,
    })
}

impl Shadow {
    /// Exact check of `d(f^j p, f^j x) < b^{-min{j, span-j}}` for `j = 0..=span`, where
    /// the base points are `f^{-n}` of `p` and `x` in the centered case.
    pub fn check_bound(&self, x: &SymbolicPoint) -> ShadowCheck {
        let (offset, span) = if self.centered {
            (-(self.n as i64), 2 * self.n)
        } else {
            (0, self.n)
        };
        let mut holds = true;
        let rows = (0..=span)
            .map(|j| {
                let p_j = self.point.shift(offset + j as i64);
                let x_j = x.shift(offset + j as i64);
                let required = j.min(span - j) as u64;
                let m = p_j.disagreement_depth(&x_j, p_j.resolving_horizon(&x_j));
                // b^{-m} < b^{-required}  <=>  m > required
                if m.is_some_and(|m| m <= required) {
                    holds = false;
                }
                (j, m, required)
            })
            .collect();
        ShadowCheck { holds, rows }
    }
}

/// Outcome of closing an almost-periodic word.
#[derive(Debug, Clone, Serialize)]
pub struct Closing {
    pub orbit: PeriodicOrbit,
    /// `w^inf` with `w_0` at index 0.
    pub point: SymbolicPoint,
    pub witness: Option<ClosingWitness>,
}

/// The points `z` and `y` of the closing property and the constant they realize.
#[derive(Debug, Clone, Serialize)]
pub struct ClosingWitness {
    /// A non-periodic point reading `w w` on `[0, 2n)`.
    pub z: SymbolicPoint,
    /// Agrees with `z` on `(-inf, n)` and with `p` on `[0, inf)`.
    pub y: SymbolicPoint,
    /// `d(f^n z, z)`.
    pub closing_distance: f64,
    /// Smallest `C_2` making all three closing inequalities hold on `j = 0..=n`.
    pub c2: f64,
}

/// Closes an admissible word `w` with `T[w_last][w_0] = 1` into the periodic orbit of `w^inf`.
pub fn anosov_close(sft: &Sft, w: &Word, check: bool) -> Result<Closing, DynamicsError> {
    if w.is_empty() || !sft.is_admissible(w) {
        return Err(DynamicsError::InadmissibleWord(w.clone()));
    }
    if !sft.allows(w.last().unwrap(), w.first().unwrap()) {
        return Err(DynamicsError::NotClosable(w.clone()));
    }
    let orbit = PeriodicOrbit::from_cycle(sft, w)?;
    let point = SymbolicPoint::periodic(w.clone(), 0)?;
    let witness = if check {
        Some(closing_witness(sft, w, &orbit, &point)?)
    } else {
        None
    };
    Ok(Closing { orbit, point, witness })
}

fn closing_witness(
    sft: &Sft,
    w: &Word,
    orbit: &PeriodicOrbit,
    p: &SymbolicPoint,
) -> Result<ClosingWitness, DynamicsError> {
    let n = w.len();
    let base = sft.metric_base();
    // Tails on a different orbit, when one exists, keep z off the periodic orbit.
    let tail = sft
        .enumerate_periodic_orbits(sft.alphabet().max(2))?
        .into_iter()
        .find(|o| o != orbit)
        .unwrap_or_else(|| orbit.clone())
        .word()
        .clone();
    let lead = sft.closing_connector(tail.last().unwrap(), w.first().unwrap());
    let trail = sft.closing_connector(w.last().unwrap(), tail.first().unwrap());

    let mut z_core = lead.symbols().to_vec();
    z_core.extend_from_slice(w.symbols());
    z_core.extend_from_slice(w.symbols());
    z_core.extend_from_slice(trail.symbols());
    let z = SymbolicPoint::new(tail.clone(), Word::new(z_core), -(lead.len() as i64), tail.clone())?;

    let mut y_core = lead.symbols().to_vec();
    y_core.extend_from_slice(w.symbols());
    let y = SymbolicPoint::new(tail, Word::new(y_core), -(lead.len() as i64), w.clone())?;
    z.validate(sft)?;
    y.validate(sft)?;

    let exact = |a: &SymbolicPoint, b: &SymbolicPoint| a.disagreement_depth(b, a.resolving_horizon(b));
    let closing = exact(&z.shift(n as i64), &z);
    let closing_distance = closing.map_or(0.0, |m| base.powi(-(m as i32)));

    // All distances are powers of b, so each ratio is b^{required + m_D - m}.
    let mut worst: Option<i64> = None;
    let mut record = |m: Option<u64>, required: usize| {
        if let Some(m) = m {
            let e = required as i64 + closing.map_or(0, |c| c as i64) - m as i64;
            worst = Some(worst.map_or(e, |w: i64| w.max(e)));
        }
    };
    for j in 0..=n {
        let jj = j as i64;
        record(exact(&z.shift(jj), &p.shift(jj)), j.min(n - j));
        record(exact(&y.shift(jj), &p.shift(jj)), j);
        record(exact(&z.shift(jj), &y.shift(jj)), n - j);
    }
    let c2 = match (worst, closing) {
        (None, _) => 0.0,
        // z periodic: every inequality has a zero right-hand side and nonzero left.
        (Some(_), None) => f64::INFINITY,
        (Some(e), Some(_)) => base.powi(e as i32),
    };
    Ok(ClosingWitness {
        z,
        y,
        closing_distance,
        c2,
    })
}

/// A point whose forward orbit meets every admissible cylinder of length `<= depth`.
///
/// The core lists all admissible words of length `depth` in lexicographic order, joined by
/// shortest connectors, with the first word starting at index 0.
pub fn transitive_point(sft: &Sft, depth: usize) -> Result<SymbolicPoint, DynamicsError> {
    let depth = depth.max(1);
    let words = sft.admissible_words(depth)?;
    let tail = sft
        .enumerate_periodic_orbits(sft.alphabet())?
        .into_iter()
        .next()
        .expect("a primitive shift has a periodic orbit of period <= alphabet size")
        .word()
        .clone();
    let lead = sft.closing_connector(tail.last().unwrap(), words[0].first().unwrap());
    let mut core = lead.symbols().to_vec();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            let prev = *core.last().unwrap();
            core.extend_from_slice(sft.closing_connector(prev, w.first().unwrap()).symbols());
        }
        core.extend_from_slice(w.symbols());
    }
    let trail = sft.closing_connector(*core.last().unwrap(), tail.first().unwrap());
    core.extend_from_slice(trail.symbols());
    let x = SymbolicPoint::new(tail.clone(), Word::new(core), -(lead.len() as i64), tail)?;
    debug_assert!(x.validate(sft).is_ok());
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn one_sided_shadow_on_full_shift() {
        let s = Sft::full_shift(2);
        let x = SymbolicPoint::new(w("1"), w("0110"), 0, w("0")).unwrap();
        let sh = shadow_segment(&s, &x, 3, false).unwrap();
        assert_eq!(sh.period, 4);
        assert_eq!(sh.point, SymbolicPoint::periodic(w("0110"), 0).unwrap());
        let check = sh.check_bound(&x);
        assert!(check.holds);
        assert_eq!(check.rows.len(), 4);
    }

    #[test]
    fn shadow_of_periodic_point_is_itself() {
        let s = Sft::golden_mean();
        // period n + S = 3 + 2 = 5 word that already closes with the least connector
        let x = SymbolicPoint::periodic(w("00100"), 0).unwrap();
        let sh = shadow_segment(&s, &x, 3, false).unwrap();
        assert_eq!(sh.period, 5);
        assert_eq!(sh.point, x);
    }

    #[test]
    fn centered_shadow() {
        let s = Sft::full_shift(2);
        let x = SymbolicPoint::new(w("0"), w("11010"), -2, w("1")).unwrap();
        let sh = shadow_segment(&s, &x, 2, true).unwrap();
        assert_eq!(sh.period, 5);
        for i in -2..=2 {
            assert_eq!(sh.point.symbol_at(i), x.symbol_at(i));
        }
        assert!(sh.point.shift(5) == sh.point);
        assert!(sh.check_bound(&x).holds);
    }

    #[test]
    fn golden_mean_shadows_hold() {
        let s = Sft::golden_mean();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..20 {
            let x = SymbolicPoint::random(&s, &mut rng, 30);
            for centered in [false, true] {
                let sh = shadow_segment(&s, &x, n, centered).unwrap();
                sh.point.validate(&s).unwrap();
                assert_eq!(sh.period, if centered { 2 * n + 2 } else { n + 2 });
                assert!(sh.check_bound(&x).holds);
            }
        }
    }

    #[test]
    fn closing_examples() {
        let full = Sft::full_shift(2);
        let c = anosov_close(&full, &w("01"), false).unwrap();
        assert_eq!(c.orbit.word(), &w("01"));

        let g = Sft::golden_mean();
        assert_eq!(
            anosov_close(&g, &w("11"), false).unwrap_err(),
            DynamicsError::InadmissibleWord(w("11"))
        );
        assert_eq!(
            anosov_close(&g, &w("101"), false).unwrap_err(),
            DynamicsError::NotClosable(w("101"))
        );

        let c = anosov_close(&g, &w("010"), true).unwrap();
        assert_eq!(c.orbit.word(), &w("001"));
        assert_eq!(c.point, SymbolicPoint::periodic(w("010"), 0).unwrap());
        let wit = c.witness.unwrap();
        assert!(wit.c2.is_finite() && wit.c2 > 0.0);
        assert!(wit.closing_distance > 0.0);
    }

    #[test]
    fn closing_is_identity_on_canonical_words() {
        let s = Sft::golden_mean();
        for o in s.enumerate_periodic_orbits(6).unwrap() {
            let c = anosov_close(&s, o.word(), false).unwrap();
            assert_eq!(c.orbit, o);
        }
    }

    #[test]
    fn transitive_point_examples() {
        let f = Sft::full_shift(2);
        let x = transitive_point(&f, 3).unwrap();
        let seen: BTreeSet<Word> = (0..x.core().len() as i64).map(|i| x.window(i, 3)).collect();
        assert_eq!(seen.len(), 8);

        let x = transitive_point(&f, 1).unwrap();
        let seen: BTreeSet<u8> = (0..x.core().len() as i64).map(|i| x.symbol_at(i)).collect();
        assert_eq!(seen.len(), 2);

        let g = Sft::golden_mean();
        let x = transitive_point(&g, 2).unwrap();
        x.validate(&g).unwrap();
        let seen: BTreeSet<Word> = (0..x.core().len() as i64).map(|i| x.window(i, 2)).collect();
        assert_eq!(seen, [w("00"), w("01"), w("10")].into_iter().collect());
    }
}
