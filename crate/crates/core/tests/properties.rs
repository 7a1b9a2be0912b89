//! Volume and property-based checks of the structural invariants: grid
//! tiling and nesting, covering postconditions, measure partitions,
//! quadrature-vs-closed-form agreement, bracket lower bounds, exponent
//! identities, and operator linearity/monotonicity.

use bekolle::geometry::{
    dyadic_squares_containing, DyadicIndex, Interval, Rect, Shift,
};
use bekolle::harness::{level_set_decomposition, ExperimentContext, TestFunctionSpec};
use bekolle::measure::{
    bekolle_constant, bpq_constant, dv_alpha, exponents_from, integrate_weight_adaptive,
    interval_family, p0q0, GridFunction, Weight,
};
use bekolle::operators::{apply_t, DyadicOperator, OperatorConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn tiling_random_points_find_exactly_one_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100_000 {
        let x: f64 = rng.gen_range(-1000.0..1000.0);
        let j = rng.gen_range(-20..=20);
        for beta in Shift::BOTH {
            let cell = DyadicIndex::cell_containing(beta, j, x);
            assert!(cell.contains_x(x));
            assert!(!DyadicIndex::new(beta, j, cell.m - 1).contains_x(x));
            assert!(!DyadicIndex::new(beta, j, cell.m + 1).contains_x(x));
        }
    }
}

#[test]
fn random_interval_pairs_are_nested_or_disjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..100_000 {
        let beta = if rng.gen_bool(0.5) { Shift::Zero } else { Shift::Third };
        let a = DyadicIndex::new(beta, rng.gen_range(-12..=8), rng.gen_range(-64..64));
        let b = DyadicIndex::new(beta, rng.gen_range(-12..=8), rng.gen_range(-64..64));
        let (ia, ib) = (a.interval(), b.interval());
        let nested = a.is_descendant_of(&b) || b.is_descendant_of(&a);
        let slack = 1e-12 * ia.length.max(ib.length);
        if nested {
            let (inner, outer) = if a.is_descendant_of(&b) { (ia, ib) } else { (ib, ia) };
            assert!(outer.left <= inner.left + slack);
            assert!(inner.right() <= outer.right() + slack);
        } else {
            // Realized intervals overlap at most at rounding scale.
            let overlap = ia.right().min(ib.right()) - ia.left.max(ib.left);
            assert!(overlap <= slack, "overlap {overlap} for {a:?} vs {b:?}");
        }
    }
}

#[test]
fn covering_postconditions_hold_in_volume() {
    let rep = bekolle::harness::find_cover_checks(10_000, 7).unwrap();
    assert_eq!(rep.failures, 0);
    assert!(rep.max_cover_blowup <= 8.0);
}

#[test]
fn squares_containing_tracks_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..20_000 {
        let x = rng.gen_range(-8.0..8.0);
        let y = rng.gen_range(1e-4..4.0);
        let beta = if rng.gen_bool(0.5) { Shift::Zero } else { Shift::Third };
        let found = dyadic_squares_containing(x, y, beta, -6, 4);
        for idx in &found {
            assert!(idx.square_contains(x, y));
        }
        // One index per scale, scales strictly above Im(z).
        let mut seen = std::collections::HashSet::new();
        for idx in &found {
            assert!(seen.insert(idx.j));
            assert!(bekolle::geometry::pow2(idx.j) > y);
        }
    }
}

#[test]
fn halves_partition_for_all_alphas() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for _ in 0..2000 {
        let interval =
            Interval::new(rng.gen_range(-10.0..10.0), 2f64.powf(rng.gen_range(-8.0..4.0)))
                .unwrap();
        let sq = interval.carleson_square();
        for alpha in [-0.5, 0.0, 1.0, 2.5] {
            let q = dv_alpha(&sq.rect(), alpha).unwrap();
            let t = dv_alpha(&sq.top_half(), alpha).unwrap();
            let b = dv_alpha(&sq.bottom_half(), alpha).unwrap();
            assert!((t + b - q).abs() <= 8.0 * f64::EPSILON * q);
        }
    }
}

#[test]
fn quadrature_agrees_with_closed_form_on_corpus() {
    // 1000 random rectangles; exponents keep a margin from the divergence
    // boundary where the strip quadrature cost blows up.
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let mut checked = 0;
    while checked < 1000 {
        let x0 = rng.gen_range(-3.0..3.0);
        let y0 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..2.0) };
        let r = Rect::new(
            x0,
            x0 + rng.gen_range(0.05..2.0),
            y0,
            y0 + rng.gen_range(0.05..2.0),
        )
        .unwrap();
        let s = rng.gen_range(-0.5..1.5);
        let alpha = rng.gen_range(-0.5..1.5);
        if s + alpha <= -0.8 && r.y0 == 0.0 {
            continue;
        }
        checked += 1;
        let w = Weight::power(s);
        let exact = w.integrate(&r, alpha).unwrap();
        let quad = integrate_weight_adaptive(&w, &r, alpha, 1e-6).unwrap();
        assert!(
            (exact - quad).abs() <= 1e-5 * exact.abs().max(1.0),
            "s={s} alpha={alpha} rect={r:?}: {exact} vs {quad}"
        );
    }
}

#[test]
fn brackets_are_at_least_one_when_finite() {
    let window = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let family = interval_family(&window, -6, 3, 200, 31);
    let mut rng = ChaCha8Rng::seed_from_u64(127);
    for _ in 0..60 {
        let alpha = rng.gen_range(-0.6..2.0);
        let p = rng.gen_range(1.2..3.0);
        let q = rng.gen_range(p..p + 3.0);
        let p_prime = p / (p - 1.0);
        // Admissible power exponent.
        let s = rng.gen_range(-0.9 * (alpha + 1.0) / q..0.9 * (alpha + 1.0) / p_prime);
        let w = Weight::power(s);
        let b = bpq_constant(&w, p, q, alpha, &family, 1e-9).unwrap();
        assert!(b.value >= 1.0 - 1e-12, "bpq {} for s={s}", b.value);
        let bek = bekolle_constant(&w, p, alpha, &family, 1e-9).unwrap();
        if bek.value.is_finite() {
            assert!(bek.value >= 1.0 - 1e-12);
        }
    }
}

#[test]
fn power_bracket_scale_invariance() {
    // The bracket of a power weight is the same on every Carleson square.
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    for _ in 0..50 {
        let alpha = rng.gen_range(-0.5..1.5);
        let p = rng.gen_range(1.3..3.0);
        let q = rng.gen_range(p..p + 2.0);
        let p_prime = p / (p - 1.0);
        let s = rng.gen_range(-0.8 * (alpha + 1.0) / q..0.8 * (alpha + 1.0) / p_prime);
        let w = Weight::power(s);
        let reference = bekolle::measure::power_bpq_closed_form(s, p, q, alpha);
        for _ in 0..4 {
            let iv = Interval::new(
                rng.gen_range(-50.0..50.0),
                2f64.powf(rng.gen_range(-6.0..6.0)),
            )
            .unwrap();
            let one = bpq_constant(&w, p, q, alpha, &[iv], 1e-9).unwrap();
            assert!(rel_close(one.value, reference, 1e-10), "{} vs {reference}", one.value);
        }
    }
}

#[test]
fn level_set_squares_are_pairwise_non_nested() {
    let f = TestFunctionSpec::indicator_of_unit_square()
        .realize_at(&Rect::new(0.0, 1.0, 0.0, 1.0).unwrap(), 8, 8)
        .unwrap();
    let cfg = OperatorConfig::default();
    for lambda in [0.4, 0.9, 1.4, 2.0, 3.0] {
        let rep = level_set_decomposition(&f, 0.0, 0.5, Shift::Zero, lambda, &cfg).unwrap();
        for (i, a) in rep.maximal_squares.iter().enumerate() {
            for b in rep.maximal_squares.iter().skip(i + 1) {
                assert!(!a.is_descendant_of(b) && !b.is_descendant_of(a));
            }
        }
        // Values exceed lambda, parents do not.
        for v in &rep.square_values {
            assert!(*v > lambda);
        }
        for p in &rep.parent_values {
            assert!(*p <= lambda);
        }
    }
}

#[test]
fn operator_linearity_and_monotonicity() {
    let window = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let cfg = OperatorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(137);
    for _ in 0..10 {
        let f = GridFunction::from_fn(window, 6, 6, |x, y| 0.2 + x + y).unwrap();
        let g = GridFunction::from_fn(window, 6, 6, |x, y| 0.5 + x * y).unwrap();
        let (zx, zy) = (rng.gen_range(0.0..1.0), rng.gen_range(0.05..1.0));
        let (alpha, gamma) = (0.5, 0.5);

        let tf = apply_t(&f, alpha, gamma, zx, zy, &cfg).unwrap();
        let t2f = apply_t(&f.scale(2.0), alpha, gamma, zx, zy, &cfg).unwrap();
        assert!((t2f - 2.0 * tf).abs() <= 2.0 * cfg.quad_tol + 1e-9 * tf);

        // Monotone: f <= f + g pointwise.
        let sum = f.add(&g);
        let tsum = apply_t(&sum, alpha, gamma, zx, zy, &cfg).unwrap();
        assert!(tf <= tsum + 2.0 * cfg.quad_tol);

        let q = DyadicOperator::new(&f, alpha, gamma, Shift::Third, &cfg).unwrap();
        let qsum = DyadicOperator::new(&sum, alpha, gamma, Shift::Third, &cfg).unwrap();
        let a = q.eval(zx, zy).unwrap().truncated_value;
        let b = qsum.eval(zx, zy).unwrap().truncated_value;
        assert!(a <= b + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The derived exponents satisfy their defining identities.
    #[test]
    fn exponent_identities(
        alpha in -0.9f64..3.0,
        t in 0.01f64..0.95,
        pfrac in 0.05f64..0.95,
    ) {
        let gamma = t * (2.0 + alpha);
        let p_max = (2.0 + alpha) / gamma;
        let p = 1.0 + (p_max - 1.0) * pfrac;
        let e = exponents_from(alpha, gamma, p).unwrap();
        prop_assert!((1.0 / e.p - 1.0 / e.q - t).abs() <= 1e-12 * t.max(1.0));
        prop_assert!((e.r - (1.0 + e.q / e.p_prime)).abs() <= 1e-12 * e.r);
        let eta = (2.0 + alpha) * (e.q / e.p - 1.0) + alpha;
        prop_assert!((e.eta - eta).abs() <= 1e-12 * eta.abs().max(1.0));
    }

    /// p0/q0 satisfy the displayed identities and the exponent comparison.
    #[test]
    fn p0q0_identities(alpha in -0.9f64..3.0, t in 0.01f64..0.99) {
        let gamma = t * (2.0 + alpha);
        let (p0, q0) = p0q0(alpha, gamma).unwrap();
        prop_assert!((1.0 / q0 - (1.0 / p0 - t)).abs() <= 1e-12);
        let p0_prime = p0 / (p0 - 1.0);
        prop_assert!((q0 / p0_prime - (1.0 - t)).abs() <= 1e-12);
        prop_assert!(q0 < 1.0 + p0_prime / p0 + q0 / p0_prime);
    }

    /// In/out split reproduces the full truncated dyadic sum.
    #[test]
    fn split_consistency(
        zx in -0.5f64..1.5,
        zy in 0.01f64..2.0,
        gamma in 0.0f64..1.5,
        seed in 0u64..1000,
    ) {
        let window = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..2.0)).collect();
        let f = GridFunction::new(window, 4, 4, values).unwrap();
        let cfg = OperatorConfig::default();
        let op = DyadicOperator::new(&f, 0.5, gamma, Shift::Zero, &cfg).unwrap();
        let support = DyadicIndex::new(Shift::Zero, 0, 0);
        let total = op.eval(zx, zy).unwrap().truncated_value;
        let split = op.eval_split(&support, zx, zy).unwrap();
        let sum = split.in_part + split.out_part.truncated_value;
        prop_assert!((sum - total).abs() <= 8.0 * f64::EPSILON * total.max(1.0));
    }
}

#[test]
fn inequality_reports_are_monotone_in_the_suite_constant() {
    let mk = |c_max: f64| ExperimentContext {
        nx: 16,
        ny: 16,
        family_random: 30,
        c_max,
        cfg: OperatorConfig { quad_tol: 1e-4, ..OperatorConfig::default() },
        ..ExperimentContext::default()
    };
    let functions = vec![TestFunctionSpec::indicator_of_unit_square()];
    let w = Weight::power(0.15);
    let tight = bekolle::harness::strong_inequality_experiment(
        0.0, 0.0, 2.0, &w, &functions, &mk(1e-2),
    )
    .unwrap();
    let loose = bekolle::harness::strong_inequality_experiment(
        0.0, 0.0, 2.0, &w, &functions, &mk(1e3),
    )
    .unwrap();
    // Pass at a constant implies pass at every larger constant.
    for (a, b) in tight.entries.iter().zip(&loose.entries) {
        assert!(!a.pass || b.pass);
    }
    assert!(loose.pass);
}
