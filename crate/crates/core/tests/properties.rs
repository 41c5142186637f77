use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sgsp_core::criteria::{blackscholes_parameter_gate, hhte_parameter_gate};
use sgsp_core::probes::{density_estimate, fh_hit_density, periodic_approximant, Ball, Indicator, SpectralDictionary};
use sgsp_core::semigroup::{
    translate, BlackScholesSemigroup, SecondOrderSemigroup, Semigroup, State, TranslationSemigroup,
};
use sgsp_core::shadowing::{
    construct_shadowing_point, far_error_bound, kn_membership, random_kn_function, random_spec, required_gap,
    verify_shadowing, RandomSpecParams,
};
use sgsp_core::spaces::{lp_v_norm, CoefficientPair, Extension, GridFunction, MonomialCombo, TailIntegral, WeightFunction};

fn exp1() -> WeightFunction {
    WeightFunction::exp_decay(1.0).unwrap()
}

fn kn(seed: u64, n: u32, len: f64) -> GridFunction {
    random_kn_function(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.01, len).unwrap()
}

fn norm(f: &GridFunction, v: &WeightFunction, p: f64) -> f64 {
    lp_v_norm(f, v, p).unwrap().upper()
}

#[test]
fn exp_decay_tail_is_closed_form() {
    for rate in [0.5, 1.0, 3.0] {
        let v = WeightFunction::exp_decay(rate).unwrap();
        for c in [0.0, 0.7, 5.0, 30.0] {
            let TailIntegral::Finite(t) = v.tail_integral(c).unwrap() else { panic!() };
            assert_eq!(t, (-rate * c).exp() / rate);
        }
    }
}

#[test]
fn quadrature_converges_at_second_order() {
    let v = exp1();
    let f = |h: f64| GridFunction::from_fn(h, 40.0, Extension::Zero, |x| Complex64::new(1.0 / (1.0 + x), 0.0)).unwrap();
    // ∫ e^{-x}/(1+x) = e·E1(1), up to the e^{-40} cut.
    let exact = 0.596_347_362_323_194_1;
    let e: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| (lp_v_norm(&f(h), &v, 1.0).unwrap().finite().unwrap().estimate - exact).abs())
        .collect();
    for w in e.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}, errors {e:?}");
    }
}

#[test]
fn density_of_interval_unions_is_exact() {
    let ivs = vec![(1.0, 3.0), (10.0, 12.5), (40.0, 100.0)];
    let d = density_estimate(&Indicator::Intervals(ivs.clone()), 200.0, 1.0, 0.5).unwrap();
    for &(t, r) in &d.ratios {
        let mu: f64 = ivs.iter().map(|&(a, b)| (b.min(t) - a).max(0.0)).sum();
        assert_eq!(r, mu / t);
    }
}

#[test]
fn translation_approximant_is_bitwise_periodic() {
    let e = TranslationSemigroup::new(exp1(), 1.0, 0.01).unwrap();
    for seed in 0..5 {
        let target = State::Grid(kn(seed, 2, 3.0));
        let a = periodic_approximant(&e, &target, 0.3, SpectralDictionary::default()).unwrap();
        let q = a.q.as_grid().unwrap();
        assert_eq!(&translate(q, a.period).unwrap(), q);
        assert!(a.error < 0.3);
    }
}

#[test]
fn gates_are_pure() {
    for (a, t, r) in [(1.0, 1.0, 3.0), (2.0, 1.0, 1.0), (0.3, 4.0, 2.0)] {
        assert_eq!(hhte_parameter_gate(a, t, r), hhte_parameter_gate(a, t, r));
    }
    for (s, ty, sg) in [(4.0, 0.0, 0.4), (4.0, 0.0, 0.2), (1.0, 0.0, 3.0)] {
        assert_eq!(blackscholes_parameter_gate(s, ty, sg), blackscholes_parameter_gate(s, ty, sg));
    }
}

fn engines() -> Vec<Box<dyn Semigroup>> {
    vec![
        Box::new(TranslationSemigroup::new(exp1(), 1.0, 0.01).unwrap()),
        Box::new(SecondOrderSemigroup::new(1.0, Some(1.0), 3.0, 30).unwrap()),
        Box::new(SecondOrderSemigroup::new(1.0, None, 3.0, 30).unwrap()),
        Box::new(BlackScholesSemigroup::new(0.4, 0.05).unwrap().with_points_per_decade(256).unwrap()),
    ]
}

fn state_for(e: &dyn Semigroup, seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::Rng;
    let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    if e.as_translation().is_some() {
        State::Grid(kn(seed, 2, 2.5))
    } else if let Some(so) = e.as_second_order() {
        let n = so.n_trunc();
        let a = (0..=n).map(|i| c() * 0.5f64.powi(i as i32)).collect();
        let b = (0..=n).map(|i| c() * 0.5f64.powi(i as i32)).collect();
        State::Coefficients(CoefficientPair::new(so.rho(), a, b).unwrap())
    } else {
        let terms = vec![(Complex64::new(0.5, 0.3), c()), (Complex64::new(2.0, -0.4), c())];
        State::Monomials(MonomialCombo::new(terms).unwrap())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_homogeneous(seed in 0u64..1000, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let alpha = Complex64::new(re, im);
        for e in engines() {
            let f = state_for(e.as_ref(), seed);
            let lhs = e.norm(&f.scale(alpha)).unwrap();
            let rhs = alpha.norm() * e.norm(&f).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300), "{:?}: {} vs {}", e.kind(), lhs, rhs);
        }
    }

    #[test]
    fn triangle_inequality(a in 0u64..1000, b in 0u64..1000) {
        for e in engines() {
            let (f, g) = (state_for(e.as_ref(), a), state_for(e.as_ref(), b));
            let sum = f.axpy(Complex64::new(1.0, 0.0), &g).unwrap();
            let lhs = e.norm(&sum).unwrap();
            let rhs = e.norm(&f).unwrap() + e.norm(&g).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{:?}", e.kind());
        }
    }

    #[test]
    fn evolution_is_linear(a in 0u64..1000, b in 0u64..1000, t in 0.0f64..1.0, re in -2.0f64..2.0) {
        let alpha = Complex64::new(re, 0.5);
        for e in engines() {
            let t = if e.as_translation().is_some() { (t * 100.0).round() / 100.0 } else { t };
            let (f, g) = (state_for(e.as_ref(), a), state_for(e.as_ref(), b));
            let combo = f.axpy(alpha, &g).unwrap();
            let lhs = e.apply(t, &combo).unwrap();
            let rhs = e.apply(t, &f).unwrap().axpy(alpha, &e.apply(t, &g).unwrap()).unwrap();
            let scale = e.norm(&lhs).unwrap().max(1e-300);
            prop_assert!(e.distance(&lhs, &rhs).unwrap() <= 1e-10 * scale, "{:?}", e.kind());
        }
    }

    #[test]
    fn constant_weight_contracts(seed in 0u64..1000, k in 0usize..500) {
        let v = WeightFunction::constant(1.0).unwrap();
        let f = kn(seed, 3, 4.0);
        let t = k as f64 * 0.01;
        prop_assert!(norm(&translate(&f, t).unwrap(), &v, 1.0) <= norm(&f, &v, 1.0));
    }

    #[test]
    fn classes_are_translation_invariant(seed in 0u64..10_000, n in 1u32..4, t in 0.0f64..8.0) {
        let f = kn(seed, n, 3.0);
        prop_assert!(kn_membership(&f, n).member);
        prop_assert!(kn_membership(&translate(&f, t).unwrap(), n).member);
    }

    #[test]
    fn gap_is_monotone(d1 in 0.05f64..2.0, d2 in 0.05f64..2.0, n1 in 1u32..8, n2 in 1u32..8) {
        let v = exp1();
        let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (nl, nh) = if n1 <= n2 { (n1, n2) } else { (n2, n1) };
        prop_assert!(required_gap(dh, nl, &v, 1.0).unwrap().m <= required_gap(dl, nl, &v, 1.0).unwrap().m);
        prop_assert!(required_gap(dl, nl, &v, 1.0).unwrap().m <= required_gap(dl, nh, &v, 1.0).unwrap().m);
    }

    #[test]
    fn hit_density_is_monotone_in_radius(r1 in 0.01f64..1.0, r2 in 0.01f64..1.0) {
        let e = TranslationSemigroup::new(exp1(), 1.0, 0.01).unwrap();
        let x0 = State::Grid(kn(3, 1, 2.0));
        let c = State::Grid(GridFunction::zero(0.01, 0.01).unwrap());
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let s = fh_hit_density(&e, &x0, &[Ball { center: c.clone(), radius: lo }, Ball { center: c, radius: hi }], 30.0, 0.1).unwrap();
        prop_assert!(s.estimates[0].lower <= s.estimates[1].lower);
        prop_assert!(s.estimates[0].upper <= s.estimates[1].upper);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn certificates_are_sound_and_within_budget(seed in 0u64..100_000, n in 1u32..4, s in 2usize..6, delta in 0.1f64..1.0) {
        let v = exp1();
        let spec = random_spec(&mut ChaCha8Rng::seed_from_u64(seed), &RandomSpecParams::new(n, s, delta), &v).unwrap();
        let cert = construct_shadowing_point(&spec).unwrap();
        let r = verify_shadowing(&cert, &spec, 0.01).unwrap();
        prop_assert!(r.pass, "{:?}", r.failures);
        prop_assert_eq!(r.period_residual, 0.0);
        let budget = far_error_bound(&spec, cert.cut).unwrap() + n as f64 * 0.01;
        for p in &r.pieces {
            prop_assert!(p.max_error <= budget, "{} > {}", p.max_error, budget);
        }
    }
}
