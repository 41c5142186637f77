//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are pinned as constants below.

use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use sgsp_core::criteria::{
    blackscholes_parameter_gate, eigenfield_check, hhte_field, hhte_parameter_gate, translation_equivalences,
    EquivalenceConfig, Overall,
};
use sgsp_core::probes::{
    density_estimate, dyadic_union, irregular_vector, mixing_witness, periodic_approximant, return_set_scan,
    IrregularParams, SpectralDictionary, DEFAULT_TAIL_FRACTION,
};
use sgsp_core::scenario::{law_suite, run_scenario, RunOptions, Scenario};
use sgsp_core::semigroup::{BlackScholesSemigroup, SecondOrderSemigroup, Semigroup, State, TranslationSemigroup};
use sgsp_core::shadowing::{required_gap, shadowing_suite, SuiteParams};
use sgsp_core::spaces::{GridFunction, MonomialCombo, TailIntegral, WeightFunction};

const LAW_CASES: usize = 20;
const COMPOSITION_TRANSLATION: f64 = 0.0;
const COMPOSITION_BLACK_SCHOLES: f64 = 1e-12;
const COMPOSITION_SECOND_ORDER: f64 = 1e-8;
const LAWS_BUDGET: Duration = Duration::from_secs(10);

const SHADOW_CASES: usize = 100;
const SHADOW_T_STEP: f64 = 0.01;
const SHADOW_BUDGET: Duration = Duration::from_secs(60);

const GAP_TOL: f64 = 1e-9;

const INTEGRAL_TOL_EXP: f64 = 1e-9;
const INTEGRAL_TOL_RATIONAL: f64 = 1e-6;
const DICHOTOMY_BUDGET: Duration = Duration::from_secs(120);

const MIXING_RADIUS: f64 = 0.5;
const MIXING_HORIZON: f64 = 50.0;
const MIXING_STEP: f64 = 0.1;
const REVERIFY_TOL: f64 = 1e-9;

const IRREGULAR_EPSILON: f64 = 0.1;
const IRREGULAR_HORIZON: f64 = 1e4;
const IRREGULAR_MIN: f64 = 0.9;

const DYADIC_UPPER: (f64, f64) = (0.617, 0.717);
const DYADIC_LOWER: (f64, f64) = (0.283, 0.383);

const EIGEN_RESIDUAL: f64 = 1e-8;
const PERIODIC_RETURN: f64 = 1e-4;

const BS_DRIFT: f64 = 1e-14;
const BS_DISCOUNT: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn laws() -> Outcome {
    let start = Instant::now();
    let engines: Vec<(Box<dyn Semigroup>, f64)> = vec![
        (
            Box::new(TranslationSemigroup::new(WeightFunction::exp_decay(1.0).unwrap(), 1.0, 0.01).unwrap()),
            COMPOSITION_TRANSLATION,
        ),
        (
            Box::new(BlackScholesSemigroup::new(0.4, 0.05).unwrap().with_space(4.0, 0.0).unwrap()),
            COMPOSITION_BLACK_SCHOLES,
        ),
        (
            Box::new(SecondOrderSemigroup::new(1.0, Some(1.0), 3.0, 60).unwrap()),
            COMPOSITION_SECOND_ORDER,
        ),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (e, tol) in &engines {
        let rows = match law_suite(e.as_ref(), 2024, LAW_CASES) {
            Ok(r) => r,
            Err(err) => return outcome(false, format!("{}: {err}", e.kind().name())),
        };
        let id = rows.iter().map(|r| r.identity).fold(0.0, f64::max);
        let comp = rows.iter().map(|r| r.composition).fold(0.0, f64::max);
        let t_ok = e.as_second_order().is_none() || rows.iter().all(|r| r.t1 + r.t2 <= 1.0);
        pass &= id == 0.0 && comp <= *tol && t_ok && rows.len() == LAW_CASES;
        detail.push(format!("{} id {id:e} comp {comp:e} (tol {tol:e})", e.kind().name()));
    }
    let el = start.elapsed();
    pass &= el < LAWS_BUDGET;
    outcome(pass, format!("{}; {:.2}s", detail.join(", "), el.as_secs_f64()))
}

fn shadowing() -> Outcome {
    let start = Instant::now();
    let mut params = SuiteParams::new(7, SHADOW_CASES);
    params.t_step = SHADOW_T_STEP;
    let cases = match shadowing_suite(&params, &WeightFunction::exp_decay(1.0).unwrap()) {
        Ok(c) => c,
        Err(e) => return outcome(false, e.to_string()),
    };
    let good = cases
        .iter()
        .filter(|c| c.pass && c.period_residual == 0.0 && c.in_class)
        .count();
    let worst = cases.iter().map(|c| c.max_error / c.delta).fold(0.0, f64::max);
    let el = start.elapsed();
    outcome(
        good == SHADOW_CASES && el < SHADOW_BUDGET,
        format!("{good}/{SHADOW_CASES} certificates verified, worst error/delta {worst:.3}; {:.2}s", el.as_secs_f64()),
    )
}

fn gap_law() -> Outcome {
    let v = WeightFunction::exp_decay(1.0).unwrap();
    let m = required_gap(0.4, 1, &v, 1.0).unwrap().m;
    let want = 10f64.ln() + 2.0;
    let deltas: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let mut grid = vec![vec![0.0; 10]; 10];
    for (i, &d) in deltas.iter().enumerate() {
        for n in 1..=10u32 {
            grid[i][n as usize - 1] = required_gap(d, n, &v, 1.0).unwrap().m;
        }
    }
    let in_delta = (1..10).all(|i| (0..10).all(|j| grid[i][j] <= grid[i - 1][j]));
    let in_n = (0..10).all(|i| (1..10).all(|j| grid[i][j] >= grid[i][j - 1]));
    outcome(
        (m - want).abs() <= GAP_TOL && in_delta && in_n,
        format!("M(0.4, 1) = {m} vs ln 10 + 2 = {want}; monotone in delta {in_delta}, in n {in_n}"),
    )
}

fn dichotomy() -> Outcome {
    let start = Instant::now();
    let cfg = EquivalenceConfig::default();
    let run = |v: WeightFunction| translation_equivalences(&v, 1.0, &[], &cfg);
    let (exp, constant, rational) = match (
        run(WeightFunction::exp_decay(1.0).unwrap()),
        run(WeightFunction::constant(1.0).unwrap()),
        run(WeightFunction::rational_decay(2.0).unwrap()),
    ) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (a, b, c) => return outcome(false, format!("{:?} {:?} {:?}", a.err(), b.err(), c.err())),
    };
    let positive = |r: &sgsp_core::criteria::EquivalenceReport| {
        r.overall == Overall::Consistent
            && [r.shadowing_ok, r.periodic_density_ok, r.mixing_ok, r.fh_ok]
                .iter()
                .all(|x| *x == Some(true))
    };
    let ie = exp.integral.finite().unwrap_or(f64::NAN);
    let ir = rational.integral.finite().unwrap_or(f64::NAN);
    let exp_ok = positive(&exp) && (ie - 1.0).abs() <= INTEGRAL_TOL_EXP;
    let rat_ok = positive(&rational) && (ir - 1.0).abs() <= INTEGRAL_TOL_RATIONAL;
    let const_ok = constant.integral == TailIntegral::Divergent
        && constant.gap_refusal.is_some()
        && constant.mixing_ok == Some(true)
        && constant.fh_ok == Some(true)
        && constant.overall == Overall::Consistent;
    let el = start.elapsed();
    outcome(
        exp_ok && rat_ok && const_ok && el < DICHOTOMY_BUDGET,
        format!(
            "exp_decay {:?} integral {ie}; constant {:?} refused {}; rational {:?} integral {ir}; {:.2}s",
            exp.overall,
            constant.overall,
            constant.gap_refusal.is_some(),
            rational.overall,
            el.as_secs_f64()
        ),
    )
}

fn mixing() -> Outcome {
    let v = WeightFunction::exp_decay(1.0).unwrap();
    let e = TranslationSemigroup::new(v.clone(), 1.0, 0.01).unwrap();
    let u = GridFunction::tent(0.01, 1.0, 1.0).unwrap();
    let k = (MIXING_HORIZON / MIXING_STEP).round() as usize;
    let grid: Vec<f64> = (0..=k).map(|i| i as f64 * MIXING_STEP).collect();
    let scan = match return_set_scan(&e, &u, MIXING_RADIUS, MIXING_RADIUS, &grid) {
        Ok(s) => s,
        Err(err) => return outcome(false, err.to_string()),
    };
    let Some(first) = scan.first_all_pass else {
        return outcome(false, "no scanned time passes".into());
    };
    let bound = required_gap(MIXING_RADIUS / 2.0, 1, &v, 1.0).unwrap().m + 1.0;
    let tail: Vec<f64> = grid.iter().copied().filter(|&t| t >= first).collect();
    let all_in = grid
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= first)
        .all(|(i, _)| scan.in_uw[i] && scan.in_wu[i]);
    let worst = tail
        .par_iter()
        .map(|&t| {
            let w = mixing_witness(&e, &u, MIXING_RADIUS, MIXING_RADIUS, t).ok()?;
            w.reverify(&e, &u).ok()
        })
        .collect::<Vec<_>>();
    let verified = worst.iter().all(|r| r.is_some_and(|d| d <= REVERIFY_TOL));
    outcome(
        all_in && verified && first <= bound,
        format!(
            "first_all_pass {first:.2} <= {bound:.4}: {}; {} witnesses re-verified: {verified}",
            first <= bound,
            tail.len()
        ),
    )
}

fn irregular() -> Outcome {
    let v = WeightFunction::exp_decay(1.0).unwrap();
    let run = |h: f64| irregular_vector(&v, 1.0, IRREGULAR_EPSILON, h, IrregularParams::default());
    let (a, b) = match (run(IRREGULAR_HORIZON), run(2.0 * IRREGULAR_HORIZON)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return outcome(false, format!("{:?} {:?}", a.err(), b.err())),
    };
    let high = a.big.upper >= IRREGULAR_MIN && a.small.upper >= IRREGULAR_MIN;
    let grows = b.big.upper >= a.big.upper && b.small.upper >= a.small.upper;
    outcome(
        high && grows,
        format!(
            "big {:.4} -> {:.4}, small {:.4} -> {:.4} (horizon 1e4 -> 2e4)",
            a.big.upper, b.big.upper, a.small.upper, b.small.upper
        ),
    )
}

fn dyadic() -> Outcome {
    let h = 4f64.powi(10);
    let d = density_estimate(&dyadic_union(h), h, 1.0, DEFAULT_TAIL_FRACTION).unwrap();
    let inr = |x: f64, (lo, hi): (f64, f64)| lo <= x && x <= hi;
    outcome(
        inr(d.upper, DYADIC_UPPER) && inr(d.lower, DYADIC_LOWER),
        format!("upper {:.4}, lower {:.4}", d.upper, d.lower),
    )
}

fn hhte() -> Outcome {
    let gate = hhte_parameter_gate(1.0, 1.0, 3.0);
    let e = SecondOrderSemigroup::new(1.0, Some(1.0), 3.0, 60).unwrap();
    let ts: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
    let r = eigenfield_check(&e, &|t| hhte_field(&e, t), &ts, &[], EIGEN_RESIDUAL).unwrap();
    let target = State::Coefficients(
        sgsp_core::spaces::CoefficientPair::from_fn(
            3.0,
            60,
            |n| Complex64::new(0.5f64.powi(n as i32), 0.0),
            |_| Complex64::default(),
        )
        .unwrap(),
    );
    let p = periodic_approximant(&e, &target, 0.5, SpectralDictionary { theta0: 1.0, count: 1 });
    let (ret, size) = p.as_ref().map_or((f64::INFINITY, 0), |p| (p.period_residual, p.dictionary_size));
    outcome(
        gate && r.rejections.is_empty() && r.residual_sup < EIGEN_RESIDUAL && ret <= PERIODIC_RETURN && size > 0,
        format!(
            "gate {gate}; eigen residual sup {:e} over {} samples; periodic point ({size} atoms) returns within {ret:e}",
            r.residual_sup,
            r.residuals.len()
        ),
    )
}

fn black_scholes() -> Outcome {
    let bs = BlackScholesSemigroup::new(0.4, 0.05).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::default();
    let mut drift = 0.0f64;
    let mut disc = 0.0f64;
    for t in [0.5, 1.0, 5.0] {
        let x1 = bs.apply_monomials(t, &MonomialCombo::monomial(one, one)).unwrap();
        drift = drift.max((x1.coefficient(one).unwrap_or(zero) - one).norm());
        let x0 = bs.apply_monomials(t, &MonomialCombo::monomial(zero, one)).unwrap();
        disc = disc.max((x0.coefficient(zero).unwrap_or(zero) - (-0.05 * t).exp()).norm());
    }
    let gates = blackscholes_parameter_gate(4.0, 0.0, 0.4)
        && !blackscholes_parameter_gate(4.0, 0.0, 0.2)
        && !blackscholes_parameter_gate(1.0, 0.0, 0.4);
    outcome(
        drift < BS_DRIFT && disc < BS_DISCOUNT && gates,
        format!("x^1 drift {drift:e}, x^0 discount error {disc:e}, gates {gates}"),
    )
}

fn determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/scenarios");
    let mut files: Vec<_> = match std::fs::read_dir(&dir) {
        Ok(d) => d.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.extension().is_some_and(|x| x == "toml")).collect(),
        Err(e) => return outcome(false, format!("{}: {e}", dir.display())),
    };
    files.sort();
    let tmp = tempfile::tempdir().unwrap();
    let mut compared = 0;
    for f in &files {
        let s = Scenario::load(f).unwrap();
        let run = |sub: &str| {
            let opts = RunOptions {
                output_root: tmp.path().join(sub),
                ..RunOptions::default()
            };
            run_scenario(&s, &opts).map(|_| opts.output_root.join(&s.name))
        };
        let (a, b) = match (run("a"), run("b")) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => return outcome(false, format!("{}: {:?} {:?}", f.display(), a.err(), b.err())),
        };
        let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")) {
            if std::fs::read(a.join(n)).unwrap() != std::fs::read(b.join(n)).unwrap() {
                return outcome(false, format!("{}: {} differs", s.name, n.to_string_lossy()));
            }
            compared += 1;
        }
    }
    outcome(
        compared > 0,
        format!("{} scenarios, {compared} CSV files byte-identical across reruns", files.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("semigroup laws", laws),
        ("shadowing soundness", shadowing),
        ("gap law", gap_law),
        ("integral dichotomy", dichotomy),
        ("mixing construction", mixing),
        ("distributional irregularity", irregular),
        ("density estimator oracle", dyadic),
        ("HHTE spectral structure", hhte),
        ("Black-Scholes exactness", black_scholes),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
