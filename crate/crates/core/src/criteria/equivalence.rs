use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::probes::{fh_hit_density, periodic_approximant, return_set_scan, Ball, SpectralDictionary};
use crate::semigroup::{State, TranslationSemigroup};
use crate::shadowing::{required_gap, shadowing_suite, SuiteParams};
use crate::spaces::{GridFunction, TailIntegral, WeightFunction};

/// Sizes and radii of the probes run by [`translation_equivalences`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceConfig {
    pub seed: u64,
    pub step: f64,
    pub shadow_cases: usize,
    /// Range of `δ` drawn for the shadowing suite.
    pub delta_range: (f64, f64),
    /// Radius of the periodic approximation test.
    pub periodic_delta: f64,
    /// Radius of both the `U` and `W` balls of the mixing scan.
    pub mixing_radius: f64,
    pub mixing_horizon: f64,
    pub mixing_step: f64,
    pub fh_radius: f64,
    pub fh_horizon: f64,
    pub fh_step: f64,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        EquivalenceConfig {
            seed: 1,
            step: 0.01,
            shadow_cases: 12,
            delta_range: (0.3, 1.0),
            periodic_delta: 0.3,
            mixing_radius: 0.5,
            mixing_horizon: 40.0,
            mixing_step: 0.5,
            fh_radius: 0.3,
            fh_horizon: 400.0,
            fh_step: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowingSuite {
    pub cases: usize,
    pub passed: usize,
    /// One line per failing case.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicCheck {
    pub target: usize,
    pub period: f64,
    pub error: f64,
    pub period_residual: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FhEvidence {
    pub target: String,
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// What each characterization says about one weight.
///
/// For `∫v < ∞` every property is expected to hold: the shadowing suite, the
/// periodic approximations, a bounded return-set complement and positive hit
/// densities. For `∫v = ∞` the gap must be refused, no mixing witness can be
/// built, and when `v` is nonincreasing an orbit cannot enter a ball beyond
/// its starting norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub integral: TailIntegral,
    pub shadowing: Option<ShadowingSuite>,
    pub shadowing_ok: Option<bool>,
    /// Refusal message of `required_gap` on the divergent side.
    pub gap_refusal: Option<String>,
    pub periodic: Vec<PeriodicCheck>,
    pub periodic_density_ok: Option<bool>,
    pub mixing_first_all_pass: Option<f64>,
    pub mixing_threshold: Option<f64>,
    pub mixing_ok: Option<bool>,
    pub fh_evidence: Vec<FhEvidence>,
    pub fh_ok: Option<bool>,
    pub overall: Overall,
}

fn default_dictionary(step: f64) -> Result<Vec<GridFunction>> {
    let tent = GridFunction::tent(step, 1.0, 1.0)?;
    let wide = GridFunction::tent(step, 2.0, 0.5)?;
    let len = (3.0 / step).round() as usize;
    let bump = GridFunction::zero_extended(
        step,
        (0..=len)
            .map(|i| {
                let x = i as f64 * step;
                Complex64::new((std::f64::consts::PI * x / 3.0).sin() * 0.4, 0.0)
            })
            .collect(),
    )?;
    Ok(vec![tent, wide, bump])
}

/// Runs the characterization of chaos for the translation semigroup on
/// `L^p_v(ℝ₊)`. An empty `dictionary` selects three bump functions.
pub fn translation_equivalences(
    v: &WeightFunction,
    p: f64,
    dictionary: &[GridFunction],
    config: &EquivalenceConfig,
) -> Result<EquivalenceReport> {
    let engine = TranslationSemigroup::new(v.clone(), p, config.step)?;
    let owned;
    let dictionary = if dictionary.is_empty() {
        owned = default_dictionary(config.step)?;
        &owned[..]
    } else {
        dictionary
    };
    let integral = v.tail_integral(0.0)?;
    let mut report = EquivalenceReport {
        integral,
        shadowing: None,
        shadowing_ok: None,
        gap_refusal: None,
        periodic: Vec::new(),
        periodic_density_ok: None,
        mixing_first_all_pass: None,
        mixing_threshold: None,
        mixing_ok: None,
        fh_evidence: Vec::new(),
        fh_ok: None,
        overall: Overall::Inconclusive,
    };
    match integral {
        TailIntegral::Inconclusive { .. } => Ok(report),
        TailIntegral::Finite(_) => {
            finite_side(&engine, dictionary, config, &mut report)?;
            let ok = [report.shadowing_ok, report.periodic_density_ok, report.mixing_ok, report.fh_ok]
                .iter()
                .all(|x| *x == Some(true));
            report.overall = if ok { Overall::Consistent } else { Overall::Inconsistent };
            Ok(report)
        }
        TailIntegral::Divergent => {
            divergent_side(&engine, dictionary, config, &mut report)?;
            let ok = report.gap_refusal.is_some()
                && report.shadowing_ok.is_none()
                && report.mixing_ok == Some(true)
                && report.fh_ok.unwrap_or(true);
            report.overall = if ok { Overall::Consistent } else { Overall::Inconsistent };
            Ok(report)
        }
    }
}

fn run_suite(engine: &TranslationSemigroup, config: &EquivalenceConfig) -> Result<ShadowingSuite> {
    let mut params = SuiteParams::new(config.seed, config.shadow_cases);
    params.delta_range = config.delta_range;
    params.p = engine.p();
    params.step = config.step;
    let cases = shadowing_suite(&params, engine.weight())?;
    let failures: Vec<String> = cases
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("case {}: {}", c.case, c.failures.join("; ")))
        .collect();
    Ok(ShadowingSuite {
        cases: cases.len(),
        passed: cases.len() - failures.len(),
        failures,
    })
}

fn finite_side(
    engine: &TranslationSemigroup,
    dictionary: &[GridFunction],
    config: &EquivalenceConfig,
    report: &mut EquivalenceReport,
) -> Result<()> {
    let suite = run_suite(engine, config)?;
    report.shadowing_ok = Some(suite.failures.is_empty() && suite.cases > 0);
    report.shadowing = Some(suite);

    let mut approximants = Vec::with_capacity(dictionary.len());
    for (j, target) in dictionary.iter().enumerate() {
        let a = periodic_approximant(
            engine,
            &State::Grid(target.clone()),
            config.periodic_delta,
            SpectralDictionary::default(),
        )?;
        report.periodic.push(PeriodicCheck {
            target: j,
            period: a.period,
            error: a.error,
            period_residual: a.period_residual,
            ok: a.error < config.periodic_delta && a.period_residual == 0.0,
        });
        approximants.push(a.q);
    }
    report.periodic_density_ok = Some(report.periodic.iter().all(|c| c.ok));

    let u = &dictionary[0];
    let t_grid = scan_grid(config.mixing_horizon, config.mixing_step);
    let scan = return_set_scan(engine, u, config.mixing_radius, config.mixing_radius, &t_grid)?;
    report.mixing_threshold = scan.threshold;
    report.mixing_first_all_pass = scan.first_all_pass;
    // The construction covers every t from the threshold on.
    report.mixing_ok = Some(match (scan.first_all_pass, scan.threshold) {
        (Some(f), Some(th)) => f <= th + config.mixing_step,
        _ => false,
    });

    let x0 = approximants[0].clone();
    let zero = State::Grid(GridFunction::zero(config.step, config.step)?);
    let targets = vec![
        Ball { center: x0.clone(), radius: config.fh_radius },
        Ball { center: zero, radius: config.fh_radius },
    ];
    let hits = fh_hit_density(engine, &x0, &targets, config.fh_horizon, config.fh_step)?;
    report.fh_evidence = ["B(q, r)", "B(0, r)"]
        .iter()
        .zip(&hits.estimates)
        .map(|(name, e)| FhEvidence {
            target: name.to_string(),
            radius: config.fh_radius,
            lower: e.lower,
            upper: e.upper,
        })
        .collect();
    report.fh_ok = Some(report.fh_evidence.iter().all(|e| e.lower > 0.0));
    Ok(())
}

fn divergent_side(
    engine: &TranslationSemigroup,
    dictionary: &[GridFunction],
    config: &EquivalenceConfig,
    report: &mut EquivalenceReport,
) -> Result<()> {
    match required_gap(config.periodic_delta, 1, engine.weight(), engine.p()) {
        Err(e @ Error::NoFiniteGap) => report.gap_refusal = Some(e.to_string()),
        Err(e) => return Err(e),
        Ok(_) => {}
    }
    let u = &dictionary[0];
    let scan = return_set_scan(engine, u, config.mixing_radius, config.mixing_radius, &[config.mixing_horizon])?;
    report.mixing_ok = Some(scan.unavailable.is_some());

    if engine.weight().nonincreasing_from(0.0) {
        // Norms along the orbit never grow, so a ball around a vector of
        // three times the norm is out of reach.
        let x0 = State::Grid(u.clone());
        let far = State::Grid(u.scale(Complex64::new(3.0, 0.0)));
        let hits = fh_hit_density(
            engine,
            &x0,
            &[Ball { center: far, radius: config.fh_radius }],
            config.fh_horizon,
            config.fh_step,
        )?;
        let e = &hits.estimates[0];
        report.fh_evidence.push(FhEvidence {
            target: "B(3u, r)".to_string(),
            radius: config.fh_radius,
            lower: e.lower,
            upper: e.upper,
        });
        report.fh_ok = Some(e.upper == 0.0);
    }
    Ok(())
}

fn scan_grid(horizon: f64, step: f64) -> Vec<f64> {
    let k = (horizon / step + 1e-9).floor() as usize;
    (0..=k).map(|i| i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> EquivalenceConfig {
        EquivalenceConfig {
            shadow_cases: 4,
            fh_horizon: 100.0,
            ..EquivalenceConfig::default()
        }
    }

    #[test]
    fn exp_decay_is_consistent() {
        let r = translation_equivalences(&WeightFunction::exp_decay(1.0).unwrap(), 1.0, &[], &quick()).unwrap();
        assert_eq!(r.overall, Overall::Consistent, "{r:#?}");
        assert!((r.integral.finite().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_weight_is_refused_consistently() {
        let r = translation_equivalences(&WeightFunction::constant(1.0).unwrap(), 1.0, &[], &quick()).unwrap();
        assert_eq!(r.integral, TailIntegral::Divergent);
        assert!(r.gap_refusal.is_some());
        assert_eq!(r.fh_ok, Some(true));
        assert_eq!(r.overall, Overall::Consistent, "{r:#?}");
    }
}
