mod common;

use cocyclelab::base_dynamics::{anosov_close, shadow_segment, PeriodicOrbit, SymbolicPoint, Word};
use cocyclelab::certify::{certify_invertibility, periodic_exponent_scan, verify_invertibility_ground_truth, CertificateInput};
use cocyclelab::cocycle::{compound, exterior_generator, linalg, Matrix, MatrixGenerator, ScaledMatrix};
use cocyclelab::livsic::{check_periodic_obstruction, solve_coboundary, solve_coboundary_with, verify_coboundary, SolveOptions};
use cocyclelab::lyapunov::{find_uniform_n, periodic_spectrum, sum_exponents, ErgodicMeasure, SumTarget};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn dist(x: &SymbolicPoint, y: &SymbolicPoint, b: f64) -> f64 {
    x.distance(y, x.resolving_horizon(y), b).value
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn word_text_round_trip(symbols in proptest::collection::vec(0u8..36, 0..40)) {
        let w = Word::new(symbols);
        let back: Word = w.to_string().parse().unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn metric_is_an_ultrametric(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let x = random_point(&mut rng, &s, 12);
        // y and z share long stretches with x so that distances are not all 1
        let y = SymbolicPoint::new(x.left().clone(), x.window(-6, 8), -6, random_point(&mut rng, &s, 0).right().clone());
        let z = random_point(&mut rng, &s, 12);
        let b = s.metric_base();
        for (p, q, r) in [(&x, &z, &z), (&x, &x, &z), (&z, &x, &x)] {
            prop_assert!(dist(p, r, b) <= dist(p, q, b).max(dist(q, r, b)));
        }
        if let Ok(y) = y {
            prop_assert!(dist(&x, &z, b) <= dist(&x, &y, b).max(dist(&y, &z, b)));
            prop_assert!(dist(&y, &z, b) <= dist(&y, &x, b).max(dist(&x, &z, b)));
        }
    }

    #[test]
    fn shift_expands_by_at_most_b(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let x = random_point(&mut rng, &s, 10);
        let y = random_point(&mut rng, &s, 10);
        let b = s.metric_base();
        prop_assert!(dist(&x.shift(1), &y.shift(1), b) <= b * dist(&x, &y, b));
        prop_assert!(dist(&x.shift(-1), &y.shift(-1), b) <= b * dist(&x, &y, b));
    }

    #[test]
    fn shadows_satisfy_the_bound(seed in any::<u64>(), n in 0usize..50, centered in any::<bool>()) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let x = random_point(&mut rng, &s, 2 * n + 4).shift(-(n as i64));
        let sh = shadow_segment(&s, &x, n, centered).unwrap();
        prop_assert!(sh.point.validate(&s).is_ok());
        let check = sh.check_bound(&x);
        prop_assert!(check.holds, "{:?}", check.rows);
    }

    #[test]
    fn holder_bound_on_sampled_pairs(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let r = rng.random_range(0..=1);
        let g = random_generator(&mut rng, s.clone(), 2, r, 0.0).with_alpha(rng.random_range(0.2..=1.0)).unwrap();
        let c1 = g.holder_constant();
        for _ in 0..20 {
            let x = random_point(&mut rng, &s, 6);
            let y = random_point(&mut rng, &s, 6);
            let lhs = norm(&(g.evaluate(&x).unwrap() - g.evaluate(&y).unwrap()));
            let rhs = c1 * dist(&x, &y, s.metric_base()).powf(g.alpha());
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
        }
    }
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn cocycle_law(seed in any::<u64>(), m in 0usize..20, n in 0usize..20) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let d = rng.random_range(1..=4);
        let r = rng.random_range(0..=1);
        let g = random_generator(&mut rng, s.clone(), d, r, 0.5);
        let x = random_point(&mut rng, &s, 40);
        let whole = g.cocycle_product(&x, m + n).unwrap();
        let split = g.cocycle_product(&x.shift(n as i64), m).unwrap().mul(&g.cocycle_product(&x, n).unwrap());
        prop_assert!(whole.approx_eq(&split, 1e-9));
    }

    #[test]
    fn scaled_log_norm_matches_direct_product(seed in any::<u64>(), n in 0usize..=30) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let d = rng.random_range(1..=4);
        let g = random_generator(&mut rng, s.clone(), d, 0, 0.0);
        let x = random_point(&mut rng, &s, 32);
        let mut direct = Matrix::identity(d, d);
        for k in 0..n {
            direct = g.evaluate_at(&x, k as i64).unwrap() * direct;
        }
        let scaled = g.cocycle_product(&x, n).unwrap();
        let exact = norm(&direct).ln();
        let got = scaled.log_norm();
        prop_assert!(rel_close(got, exact, 1e-9) || (exact == f64::NEG_INFINITY && got == exact), "{got} vs {exact}");
    }

    #[test]
    fn compound_is_multiplicative(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.random_range(1..=4);
        let a = random_matrix(&mut rng, d);
        let b = random_matrix(&mut rng, d);
        for i in 1..=d {
            let lhs = compound(&(&a * &b), i);
            let rhs = compound(&a, i) * compound(&b, i);
            prop_assert!(norm(&(&lhs - &rhs)) <= 1e-12 * (1.0 + norm(&lhs)));
        }
    }

    #[test]
    fn compound_of_product_is_product_of_compound(seed in any::<u64>(), n in 0usize..=20) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let d = rng.random_range(2..=4);
        let r = rng.random_range(0..=1);
        // Minors of an ill-conditioned product cancel catastrophically, so keep each factor
        // near-orthogonal and the identity is then exact to rounding.
        let g = random_conditioned_generator(&mut rng, s.clone(), d, r, 0.8, 1.25);
        let x = random_point(&mut rng, &s, 24);
        for i in 1..=d {
            let lhs = ScaledMatrix::from_matrix(compound(&g.cocycle_product(&x, n).unwrap().value(), i));
            let rhs = exterior_generator(&g, i).unwrap().cocycle_product(&x, n).unwrap();
            prop_assert!(lhs.approx_eq(&rhs, 1e-9));
        }
    }

    #[test]
    fn periodic_spectrum_is_rotation_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let d = rng.random_range(1..=3);
        let r = rng.random_range(0..=1);
        let g = random_generator(&mut rng, s.clone(), d, r, 2.5);
        let k = rng.random_range(1..=7);
        let cycle = s.random_cycle(&mut rng, k);
        let orbit = PeriodicOrbit::from_cycle(&s, &cycle).unwrap();
        let reference = periodic_spectrum(&g, &orbit).unwrap();
        let k = orbit.period();
        for shift in 0..k {
            // eigenvalue moduli of the product read from a rotated starting point
            let start = SymbolicPoint::periodic(orbit.word().rotated(shift), 0).unwrap();
            let prod = g.cocycle_product(&start, k).unwrap();
            let mut vals: Vec<f64> = prod
                .body()
                .complex_eigenvalues()
                .iter()
                .map(|z| (z.norm().ln() + prod.log_scale()) / k as f64)
                .collect();
            vals.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in vals.iter().zip(reference.values()) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{vals:?} vs {:?}", reference.values());
            }
        }
    }

    #[test]
    fn bernoulli_sum_is_closed_form(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let k = rng.random_range(2..=3);
        let s = cocyclelab::base_dynamics::Sft::full_shift(k);
        let d = rng.random_range(1..=3);
        let g = random_generator(&mut rng, s.clone(), d, 0, 2.5);
        let mut p: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let mu = ErgodicMeasure::bernoulli(&s, p.clone()).unwrap();
        let got = sum_exponents(&g, SumTarget::Measure(&mu)).unwrap();
        let expect: f64 = (0..k)
            .map(|a| p[a] * g.lookup(&[a as u8]).unwrap().determinant().abs().ln())
            .sum();
        prop_assert!((got - expect).abs() <= 1e-9, "{got} vs {expect}");
    }

    #[test]
    fn uniform_n_is_monotone_in_eps(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = cocyclelab::base_dynamics::Sft::full_shift(2);
        let g = random_generator(&mut rng, s, 2, 0, 0.0);
        let scan = periodic_exponent_scan(&g, 6).unwrap();
        let rho = scan.max.max(0.0) / 2.0 + rng.random_range(0.0..0.5);
        let mut last = usize::MAX;
        for eps in [0.05, 0.1, 0.2, 0.4, 0.8] {
            match find_uniform_n(&g, rho, eps, 12) {
                Ok(n) => {
                    prop_assert!(n <= last);
                    last = n;
                }
                Err(_) => prop_assert_eq!(last, usize::MAX, "larger eps lost a uniform N"),
            }
        }
    }
}

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn certified_implies_invertible(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let d = rng.random_range(1..=3);
        let (r, shift) = (rng.random_range(0..=1), rng.random_range(0.0..2.0));
        let mut g = random_generator(&mut rng, s.clone(), d, r, shift);
        if rng.random_bool(0.3) {
            // knock out one window
            let entries: Vec<(Word, Matrix)> = g
                .entries()
                .into_iter()
                .enumerate()
                .map(|(i, (w, m))| (w, if i == 0 { Matrix::zeros(d, d) } else { m.clone() }))
                .collect();
            g = MatrixGenerator::new(s, d, g.radius(), 1.0, entries).unwrap();
        }
        let rho = rng.random_range(0.0..0.2);
        let tau = rng.random_range(0.0..0.2);
        let cert = certify_invertibility(&g, &CertificateInput::for_generator(&g, rho, tau, 4)).unwrap();
        if cert.verdict.is_certified() {
            prop_assert!(verify_invertibility_ground_truth(&g).invertible);
        }
        let again = certify_invertibility(&g, &CertificateInput::for_generator(&g, rho, tau, 4)).unwrap();
        prop_assert_eq!(again.verdict, cert.verdict);
    }

    #[test]
    fn scan_extremes_are_monotone(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let shift = rng.random_range(0.0..1.5);
        let g = random_generator(&mut rng, s, 2, 0, shift);
        let mut prev = periodic_exponent_scan(&g, 1).unwrap();
        for p in 2..=7 {
            let next = periodic_exponent_scan(&g, p).unwrap();
            prop_assert!(next.min <= prev.min);
            prop_assert!(next.max >= prev.max);
            prev = next;
        }
    }

    #[test]
    fn scaling_shifts_every_scan_value(seed in any::<u64>(), sc in -2.0f64..2.0) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let d = rng.random_range(1..=3);
        let r = rng.random_range(0..=1);
        let g = random_generator(&mut rng, s, d, r, 2.5);
        let h = g.scaled(sc).unwrap();
        let a = periodic_exponent_scan(&g, 6).unwrap();
        let b = periodic_exponent_scan(&h, 6).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            prop_assert_eq!(&x.orbit, &y.orbit);
            prop_assert!((y.sum - x.sum - sc * d as f64).abs() <= 1e-9, "{} {}", x.sum, y.sum);
        }
        let ia = CertificateInput::for_generator(&g, 0.1, 0.1, 6);
        let ib = CertificateInput::for_generator(&h, 0.1, 0.1, 6);
        prop_assert_eq!(ia.bound_ok(), ib.bound_ok());
    }

    #[test]
    fn livsic_round_trip_and_gauge(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = pick_sft(&mut rng);
        let d = rng.random_range(1..=3);
        let rp = rng.random_range(0..=1);
        let p = MatrixGenerator::from_fn(s, d, rp, 1.0, |_| random_invertible(&mut rng, d, 0.5, 2.0)).unwrap();
        let a = MatrixGenerator::coboundary(&p).unwrap();
        let depth = 2 * rp + 1 + rng.random_range(0..=1);
        let t = solve_coboundary(&a, depth, 1 << 20).unwrap();
        let check = verify_coboundary(&a, &t, 20, seed).unwrap();
        prop_assert!(check.defect <= 1e-8, "{check:?}");

        let gauge = random_invertible(&mut rng, d, 0.5, 2.0);
        let mut opts = SolveOptions::new(depth, 1 << 20);
        opts.gauge = Some(gauge.clone());
        let tg = solve_coboundary_with(&a, &opts).unwrap();
        for (w, m) in tg.entries() {
            prop_assert!(norm(&(m - &t.entries()[w] * &gauge)) <= 1e-10 * (1.0 + norm(m)));
        }
        let cg = verify_coboundary(&a, &tg, 20, seed).unwrap();
        prop_assert!((cg.defect - check.defect).abs() <= 1e-10);
    }

    #[test]
    fn obstruction_defect_is_telescoped(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = cocyclelab::base_dynamics::Sft::full_shift(2);
        let p = MatrixGenerator::from_fn(s.clone(), 2, 0, 1.0, |_| random_invertible(&mut rng, 2, 0.7, 1.5)).unwrap();
        let exact = MatrixGenerator::coboundary(&p).unwrap();
        // perturbed cocycle: no longer an exact coboundary
        let noise = 1e-7;
        let a = exact.map_table(2, |m| m + random_matrix(&mut rng, 2) * noise).unwrap();
        let mut opts = SolveOptions::new(3, 1 << 20);
        opts.tol = Some(1e-3);
        let t = solve_coboundary_with(&a, &opts).unwrap();
        let delta0 = verify_coboundary(&a, &t, 0, 0).unwrap().defect;
        let h = t.offset() as i64;
        for orbit in s.enumerate_periodic_orbits(6).unwrap() {
            let x = orbit.point();
            let k = orbit.period();
            let mut prod_b = 1.0;
            let mut prod_bd = 1.0;
            for j in 0..k as i64 {
                let p0 = &t.entries()[&x.window(j - h, t.depth())];
                let p1 = &t.entries()[&x.window(j + 1 - h, t.depth())];
                let b = norm(&(p1 * p0.clone().try_inverse().unwrap()));
                prod_b *= b;
                prod_bd *= b + delta0;
            }
            let defect = norm(&(a.orbit_product_plain(&orbit).unwrap() - Matrix::identity(2, 2)));
            prop_assert!(defect <= prod_bd - prod_b + 1e-12, "{}: {defect} > {}", orbit.word(), prod_bd - prod_b);
        }
        prop_assert!(check_periodic_obstruction(&a, 6, 1e-3).unwrap().passed);
    }
}

#[test]
fn orbit_counts_match_traces() {
    for s in sft_zoo() {
        let orbits = s.enumerate_periodic_orbits(10).unwrap();
        for n in 1..=10 {
            let points: u128 = orbits
                .iter()
                .filter(|o| n % o.period() == 0)
                .map(|o| o.period() as u128)
                .sum();
            assert_eq!(points, s.fixed_point_count(n), "n = {n}");
        }
    }
}

#[test]
fn closing_fixes_canonical_orbit_words() {
    for s in sft_zoo() {
        for orbit in s.enumerate_periodic_orbits(7).unwrap() {
            let c = anosov_close(&s, orbit.word(), false).unwrap();
            assert_eq!(c.orbit, orbit);
            assert_eq!(c.point, orbit.point());
        }
    }
}

#[test]
fn oscillation_vanishes_once_cylinders_resolve_p() {
    let mut rng = rng(11);
    let s = cocyclelab::base_dynamics::Sft::full_shift(2);
    let p = MatrixGenerator::from_fn(s, 2, 1, 1.0, |_| random_invertible(&mut rng, 2, 0.5, 2.0)).unwrap();
    let a = MatrixGenerator::coboundary(&p).unwrap();
    let osc: Vec<f64> = (1..=6).map(|l| solve_coboundary(&a, l, 1 << 20).unwrap().oscillation()).collect();
    // P depends on x_{-1} x_0 x_1, so depth-3 cylinders (and finer) determine it
    assert!(osc[0] > 1e-3, "{osc:?}");
    for &o in &osc[2..] {
        assert!(o <= 1e-9, "{osc:?}");
    }
}

#[test]
fn measure_sum_matches_estimated_spectrum() {
    use cocyclelab::lyapunov::estimate_spectrum;
    let mut rng = rng(5);
    for _ in 0..5 {
        let s = pick_sft(&mut rng);
        let g = random_generator(&mut rng, s.clone(), 3, 0, 2.5);
        let mu = ErgodicMeasure::parry(&s).unwrap();
        let spec = estimate_spectrum(&g, &mu, 20_000, rng.random()).unwrap();
        let exact = sum_exponents(&g, SumTarget::Measure(&mu)).unwrap();
        let est = spec.partial_sum(3);
        let se = spec.partial_sum_error(3);
        assert!((est - exact).abs() <= 5.0 * se + 1e-12, "{est} vs {exact} (se {se})");
    }
}

#[test]
fn singular_window_is_seen_by_scan_and_ground_truth() {
    let s = cocyclelab::base_dynamics::Sft::golden_mean();
    let g = MatrixGenerator::from_fn(s, 2, 1, 1.0, |w| {
        if w.symbols() == [0, 1, 0] {
            Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0])
        } else {
            Matrix::identity(2, 2)
        }
    })
    .unwrap();
    let gt = verify_invertibility_ground_truth(&g);
    assert_eq!(gt.singular_windows, vec!["010".parse::<Word>().unwrap()]);
    let cert = certify_invertibility(&g, &CertificateInput::for_generator(&g, 0.0, 0.0, 1)).unwrap();
    assert!(!cert.verdict.is_certified());
    assert!(linalg::is_singular(g.lookup(&[0, 1, 0]).unwrap()));
}
