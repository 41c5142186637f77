use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::csv::{num, Csv};
use crate::criteria::{
    blackscholes_parameter_gate, eigenfield_check, hhte_field, hhte_parameter_gate, translation_equivalences,
    EquivalenceConfig, Overall,
};
use crate::error::{Error, Result};
use crate::probes::{
    density_estimate, dyadic_union, fh_hit_density, irregular_vector, periodic_approximant, return_set_scan, Ball,
    Indicator, IrregularParams, SpectralDictionary, DEFAULT_TAIL_FRACTION,
};
use crate::semigroup::{check_semigroup_laws, EngineKind, Semigroup, State, TranslationSemigroup};
use crate::shadowing::{random_kn_function, required_gap, shadowing_suite, SuiteParams};
use crate::spaces::{CoefficientPair, GridFunction, MonomialCombo};

/// Parameters of one `[[probe]]` entry with typed, located accessors.
#[derive(Clone, Debug)]
pub struct ProbeParams {
    index: usize,
    values: toml::Table,
}

impl ProbeParams {
    pub fn new(index: usize, values: toml::Table) -> Self {
        ProbeParams { index, values }
    }

    fn err(&self, key: &str, msg: impl Into<String>) -> Error {
        Error::Config {
            location: format!("probe[{}].{key}", self.index),
            msg: msg.into(),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(toml::Value::Float(x)) => Ok(*x),
            Some(toml::Value::Integer(i)) => Ok(*i as f64),
            Some(other) => Err(self.err(key, format!("expected a number, found {other}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.values.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(other) => Err(self.err(key, format!("expected a nonnegative integer, found {other}"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str> {
        match self.values.get(key) {
            None => Ok(default),
            Some(toml::Value::String(s)) => Ok(s),
            Some(other) => Err(self.err(key, format!("expected a string, found {other}"))),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    other => Err(self.err(key, format!("expected numbers, found {other}"))),
                })
                .collect(),
            Some(other) => Err(self.err(key, format!("expected an array, found {other}"))),
        }
    }

    /// An optional closed range `[lo, hi]`.
    pub fn range(&self, key: &str) -> Result<Option<(f64, f64)>> {
        if !self.values.contains_key(key) {
            return Ok(None);
        }
        match self.f64_list_or(key, &[])?[..] {
            [lo, hi] if lo <= hi => Ok(Some((lo, hi))),
            _ => Err(self.err(key, "expected [lo, hi] with lo <= hi")),
        }
    }
}

/// Everything a probe sees while running.
pub struct ProbeContext<'a> {
    pub engine: &'a dyn Semigroup,
    pub params: &'a ProbeParams,
    pub seed: Option<u64>,
    pub tolerances: &'a BTreeMap<String, f64>,
}

impl ProbeContext<'_> {
    pub fn tol(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    fn seed(&self) -> u64 {
        self.seed.expect("the runner checks seeds of randomized probes")
    }

    fn translation(&self) -> &TranslationSemigroup {
        self.engine.as_translation().expect("the runner checks engine kinds")
    }
}

/// Result of one probe: its CSV, the summary metrics (each also a row of
/// `summary.csv`) and whether its own success criterion held.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeOutput {
    pub csv: Csv,
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub passed: bool,
}

pub trait ScenarioProbe: Send + Sync {
    fn kind(&self) -> &'static str;
    fn engines(&self) -> &'static [EngineKind];
    fn needs_seed(&self) -> bool {
        false
    }
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput>;
}

const ALL: &[EngineKind] = &[EngineKind::Translation, EngineKind::SecondOrder, EngineKind::BlackScholes];
const TRANSLATION: &[EngineKind] = &[EngineKind::Translation];

/// Kind → probe map used by the scenario runner.
pub struct ProbeRegistry {
    probes: BTreeMap<&'static str, Box<dyn ScenarioProbe>>,
}

impl Default for ProbeRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl ProbeRegistry {
    pub fn empty() -> Self {
        ProbeRegistry { probes: BTreeMap::new() }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Laws));
        r.register(Box::new(Shadowing));
        r.register(Box::new(Mixing));
        r.register(Box::new(Density));
        r.register(Box::new(Irregular));
        r.register(Box::new(Periodic));
        r.register(Box::new(Fh));
        r.register(Box::new(Equivalences));
        r.register(Box::new(HhteEigenfield));
        r.register(Box::new(BsExactness));
        r.register(Box::new(Gate));
        r
    }

    pub fn register(&mut self, probe: Box<dyn ScenarioProbe>) {
        self.probes.insert(probe.kind(), probe);
    }

    pub fn get(&self, kind: &str) -> Option<&dyn ScenarioProbe> {
        self.probes.get(kind).map(|b| b.as_ref())
    }

    pub fn kinds(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.probes.keys().copied()
    }
}

fn flag(b: bool) -> String {
    b.to_string()
}

fn metric(k: &str, v: f64) -> (String, f64) {
    (k.to_string(), v)
}

fn time_grid(horizon: f64, step: f64) -> Vec<f64> {
    let k = (horizon / step + 1e-9).floor() as usize;
    (0..=k).map(|i| i as f64 * step).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawRow {
    pub case: usize,
    pub t1: f64,
    pub t2: f64,
    pub identity: f64,
    pub composition: f64,
    pub continuity: f64,
    pub error_estimate: f64,
    pub truncation_limited: bool,
}

fn random_state(engine: &dyn Semigroup, rng: &mut ChaCha8Rng, k: usize) -> Result<(State, f64, f64)> {
    let c = |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    if let Some(tr) = engine.as_translation() {
        let h = tr.step();
        let len = rng.gen_range(0.5..4.0);
        let f = random_kn_function(rng, 1 + (k % 3) as u32, h, len)?;
        let t1 = rng.gen_range(0..=200) as f64 * h;
        let t2 = rng.gen_range(0..=200) as f64 * h;
        return Ok((State::Grid(f), t1, t2));
    }
    if let Some(so) = engine.as_second_order() {
        let n = so.n_trunc();
        let a: Vec<Complex64> = (0..=n).map(|i| c(rng) * 0.5f64.powi(i as i32)).collect();
        let b: Vec<Complex64> = (0..=n).map(|i| c(rng) * 0.5f64.powi(i as i32)).collect();
        let t1 = rng.gen_range(0.0..0.5);
        let t2 = rng.gen_range(0.0..0.5);
        return Ok((State::Coefficients(CoefficientPair::new(so.rho(), a, b)?), t1, t2));
    }
    if let Some(bs) = engine.as_black_scholes() {
        let hi = (bs.space().s - 0.5).max(0.5);
        let terms = (0..3)
            .map(|_| (Complex64::new(rng.gen_range(0.0..hi), rng.gen_range(-1.0..1.0)), c(rng)))
            .collect();
        let t1 = rng.gen_range(0.0..2.0);
        let t2 = rng.gen_range(0.0..2.0);
        return Ok((State::Monomials(MonomialCombo::new(terms)?), t1, t2));
    }
    Err(Error::invalid("no seeded states for this engine"))
}

/// Semigroup-law residuals on `cases` seeded states. Translation times are
/// grid-aligned; second-order times satisfy `t1 + t2 ≤ 1`.
pub fn law_suite(engine: &dyn Semigroup, seed: u64, cases: usize) -> Result<Vec<LawRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|case| {
            let (f, t1, t2) = random_state(engine, &mut rng, case)?;
            let r = check_semigroup_laws(engine, &f, t1, t2)?;
            Ok(LawRow {
                case,
                t1,
                t2,
                identity: r.identity_residual,
                composition: r.composition_residual,
                continuity: r.continuity_residual,
                error_estimate: r.max_error_estimate,
                truncation_limited: r.truncation_limited,
            })
        })
        .collect()
}

struct Laws;

impl ScenarioProbe for Laws {
    fn kind(&self) -> &'static str {
        "laws"
    }
    fn engines(&self) -> &'static [EngineKind] {
        ALL
    }
    fn needs_seed(&self) -> bool {
        true
    }
    /// CSV: `case,t1,t2,identity,composition,continuity,error_estimate,truncation_limited`.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let cases = ctx.params.usize_or("cases", 20)?;
        let default_tol = match ctx.engine.kind() {
            EngineKind::Translation => 0.0,
            EngineKind::SecondOrder => 1e-8,
            EngineKind::BlackScholes => 1e-12,
        };
        let tol = ctx.tol("composition", default_tol);
        let rows = law_suite(ctx.engine, ctx.seed(), cases)?;
        let mut csv = Csv::new(&[
            "case",
            "t1",
            "t2",
            "identity",
            "composition",
            "continuity",
            "error_estimate",
            "truncation_limited",
        ]);
        for r in &rows {
            csv.push(vec![
                r.case.to_string(),
                num(r.t1),
                num(r.t2),
                num(r.identity),
                num(r.composition),
                num(r.continuity),
                num(r.error_estimate),
                flag(r.truncation_limited),
            ]);
        }
        let max_id = rows.iter().map(|r| r.identity).fold(0.0, f64::max);
        let max_comp = rows.iter().map(|r| r.composition).fold(0.0, f64::max);
        Ok(ProbeOutput {
            csv,
            metrics: vec![
                metric("max_identity", max_id),
                metric("max_composition", max_comp),
                metric("composition_tol", tol),
            ],
            notes: vec![],
            passed: max_id == 0.0 && max_comp <= tol,
        })
    }
}

struct Shadowing;

impl ScenarioProbe for Shadowing {
    fn kind(&self) -> &'static str {
        "shadowing"
    }
    fn engines(&self) -> &'static [EngineKind] {
        TRANSLATION
    }
    fn needs_seed(&self) -> bool {
        true
    }
    /// CSV: `case,n,s,delta,period,gap,required_gap,max_error,period_residual,in_class,pass`.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let e = ctx.translation();
        let mut params = SuiteParams::new(ctx.seed(), ctx.params.usize_or("cases", 100)?);
        if let Some(r) = ctx.params.range("delta")? {
            params.delta_range = r;
        }
        params.p = e.p();
        params.step = e.step();
        params.t_step = ctx.params.f64_or("t_step", params.t_step)?;
        let cases = shadowing_suite(&params, e.weight())?;
        let mut csv = Csv::new(&[
            "case",
            "n",
            "s",
            "delta",
            "period",
            "gap",
            "required_gap",
            "max_error",
            "period_residual",
            "in_class",
            "pass",
        ]);
        for c in &cases {
            csv.push(vec![
                c.case.to_string(),
                c.n.to_string(),
                c.s.to_string(),
                num(c.delta),
                num(c.period),
                num(c.gap),
                num(c.required_gap),
                num(c.max_error),
                num(c.period_residual),
                flag(c.in_class),
                flag(c.pass),
            ]);
        }
        let passed = cases.iter().filter(|c| c.pass).count();
        Ok(ProbeOutput {
            csv,
            metrics: vec![metric("cases", cases.len() as f64), metric("passed", passed as f64)],
            notes: cases
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("case {}: {}", c.case, c.failures.join("; ")))
                .collect(),
            passed: passed == cases.len(),
        })
    }
}

fn bump(step: f64, name: &str, ctx: &ProbeContext) -> Result<GridFunction> {
    match name {
        "tent" => GridFunction::tent(step, 1.0, 1.0),
        "zero" => GridFunction::zero(step, step),
        other => Err(ctx.params.err("center", format!("unknown function `{other}` (tent, zero)"))),
    }
}

struct Mixing;

impl ScenarioProbe for Mixing {
    fn kind(&self) -> &'static str {
        "mixing"
    }
    fn engines(&self) -> &'static [EngineKind] {
        TRANSLATION
    }
    /// CSV: `t,in_uw,in_wu,x_to_u,tx_norm,w_norm,tw_to_u` (distances empty
    /// where no witness was built).
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let e = ctx.translation();
        let u = bump(e.step(), ctx.params.str_or("center", "tent")?, ctx)?;
        let ru = ctx.params.f64_or("radius_u", 0.5)?;
        let rw = ctx.params.f64_or("radius_w", 0.5)?;
        let grid = time_grid(ctx.params.f64_or("horizon", 50.0)?, ctx.params.f64_or("step", 0.1)?);
        let scan = return_set_scan(e, &u, ru, rw, &grid)?;
        let mut csv = Csv::new(&["t", "in_uw", "in_wu", "x_to_u", "tx_norm", "w_norm", "tw_to_u"]);
        for (i, &t) in scan.t_grid.iter().enumerate() {
            let m = scan.witnesses[i];
            csv.push(vec![
                num(t),
                flag(scan.in_uw[i]),
                flag(scan.in_wu[i]),
                num(m.map(|m| m.x_to_u)),
                num(m.map(|m| m.tx_norm)),
                num(m.map(|m| m.w_norm)),
                num(m.map(|m| m.tw_to_u)),
            ]);
        }
        let mut notes = Vec::new();
        if let Some(msg) = &scan.unavailable {
            notes.push(msg.clone());
        }
        let mut metrics = Vec::new();
        let mut passed = false;
        if let (Some(th), Some(first)) = (scan.threshold, scan.first_all_pass) {
            let bound = if rw.is_infinite() {
                0.0
            } else {
                required_gap(ru.min(rw) / 2.0, crate::shadowing::class_index(&u), e.weight(), e.p())?.m + 1.0
            };
            metrics.push(metric("threshold", th));
            metrics.push(metric("first_all_pass", first));
            metrics.push(metric("gap_bound", bound));
            passed = first <= bound;
        }
        Ok(ProbeOutput {
            csv,
            metrics,
            notes,
            passed,
        })
    }
}

struct Density;

impl ScenarioProbe for Density {
    fn kind(&self) -> &'static str {
        "density"
    }
    fn engines(&self) -> &'static [EngineKind] {
        ALL
    }
    /// CSV: `t,ratio`. `set` is `dyadic` (`∪[4^k, 2·4^k]`), `all` or `empty`.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let horizon = ctx.params.f64_or("horizon", 4f64.powi(10))?;
        let step = ctx.params.f64_or("step", 1.0)?;
        let ind = match ctx.params.str_or("set", "dyadic")? {
            "dyadic" => dyadic_union(horizon),
            "all" => Indicator::Intervals(vec![(0.0, f64::INFINITY)]),
            "empty" => Indicator::Intervals(vec![]),
            other => return Err(ctx.params.err("set", format!("unknown set `{other}`"))),
        };
        let d = density_estimate(&ind, horizon, step, ctx.params.f64_or("tail_fraction", DEFAULT_TAIL_FRACTION)?)?;
        let mut csv = Csv::new(&["t", "ratio"]);
        for (t, r) in &d.ratios {
            csv.push(vec![num(*t), num(*r)]);
        }
        let within = |r: Option<(f64, f64)>, x: f64| r.is_none_or(|(lo, hi)| lo <= x && x <= hi);
        let passed = within(ctx.params.range("upper_range")?, d.upper) && within(ctx.params.range("lower_range")?, d.lower);
        let mut notes = Vec::new();
        if d.low_confidence {
            notes.push("low confidence: horizon too short for the tail window".to_string());
        }
        Ok(ProbeOutput {
            csv,
            metrics: vec![metric("upper", d.upper), metric("lower", d.lower)],
            notes,
            passed,
        })
    }
}

struct Irregular;

impl ScenarioProbe for Irregular {
    fn kind(&self) -> &'static str {
        "irregular"
    }
    fn engines(&self) -> &'static [EngineKind] {
        TRANSLATION
    }
    /// CSV: `s,norm,norm_upper,big,small`.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let e = ctx.translation();
        let eps = ctx.params.f64_or("epsilon", 0.1)?;
        let horizon = ctx.params.f64_or("horizon", 1e4)?;
        let min = ctx.params.f64_or("min_density", 0.9)?;
        let params = IrregularParams {
            growth: ctx.params.f64_or("growth", 4.0)?,
            ..IrregularParams::default()
        };
        let r = irregular_vector(e.weight(), e.p(), eps, horizon, params)?;
        let mut csv = Csv::new(&["s", "norm", "norm_upper", "big", "small"]);
        for n in &r.norms {
            csv.push(vec![
                num(n.s),
                num(n.estimate),
                num(n.upper),
                flag(n.estimate >= 1.0 / eps),
                flag(n.upper < eps),
            ]);
        }
        Ok(ProbeOutput {
            csv,
            metrics: vec![
                metric("height", r.height),
                metric("big_upper_density", r.big.upper),
                metric("small_upper_density", r.small.upper),
            ],
            notes: vec![],
            passed: r.big.upper >= min && r.small.upper >= min,
        })
    }
}

fn periodic_target(ctx: &ProbeContext) -> Result<State> {
    let e = ctx.engine;
    if let Some(tr) = e.as_translation() {
        return Ok(State::Grid(bump(tr.step(), ctx.params.str_or("target", "tent")?, ctx)?));
    }
    if let Some(so) = e.as_second_order() {
        let c = CoefficientPair::from_fn(
            so.rho(),
            so.n_trunc(),
            |n| Complex64::new(0.5f64.powi(n as i32), 0.0),
            |_| Complex64::default(),
        )?;
        return Ok(State::Coefficients(c));
    }
    if let Some(bs) = e.as_black_scholes() {
        let theta = ctx.params.f64_or("theta", 1.0)?;
        let beta = *bs
            .imaginary_eigen_exponents(theta)
            .first()
            .ok_or_else(|| Error::NoImaginaryEigen(format!("no exponent with eigenvalue i·{theta} in the space")))?;
        return Ok(State::Monomials(MonomialCombo::monomial(beta, Complex64::new(1.0, 0.0))));
    }
    Err(Error::invalid("no periodic target for this engine"))
}

struct Periodic;

impl ScenarioProbe for Periodic {
    fn kind(&self) -> &'static str {
        "periodic"
    }
    fn engines(&self) -> &'static [EngineKind] {
        ALL
    }
    /// CSV: `period,error,period_residual,guaranteed,dictionary_size`.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let delta = ctx.params.f64_or("delta", 0.3)?;
        let dict = SpectralDictionary {
            theta0: ctx.params.f64_or("theta0", 1.0)?,
            count: ctx.params.usize_or("count", 4)?,
        };
        let target = periodic_target(ctx)?;
        let a = periodic_approximant(ctx.engine, &target, delta, dict)?;
        let mut csv = Csv::new(&["period", "error", "period_residual", "guaranteed", "dictionary_size"]);
        csv.push(vec![
            num(a.period),
            num(a.error),
            num(a.period_residual),
            flag(a.guaranteed),
            a.dictionary_size.to_string(),
        ]);
        let tol = ctx.tol("period_residual", 1e-4);
        let passed = if a.guaranteed {
            a.error < delta && a.period_residual == 0.0
        } else {
            a.period_residual <= tol * (1.0 + ctx.engine.norm(&a.q)?)
        };
        Ok(ProbeOutput {
            csv,
            metrics: vec![
                metric("period", a.period),
                metric("error", a.error),
                metric("period_residual", a.period_residual),
            ],
            notes: vec![],
            passed,
        })
    }
}

struct Fh;

impl ScenarioProbe for Fh {
    fn kind(&self) -> &'static str {
        "fh"
    }
    fn engines(&self) -> &'static [EngineKind] {
        TRANSLATION
    }
    /// Orbit of the periodized tent against balls around itself and around
    /// zero. CSV: `t,dist_self,dist_zero,hit_self,hit_zero`.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let e = ctx.translation();
        let radius = ctx.params.f64_or("radius", 0.3)?;
        let horizon = ctx.params.f64_or("horizon", 400.0)?;
        let step = ctx.params.f64_or("step", 0.1)?;
        let tent = State::Grid(GridFunction::tent(e.step(), 1.0, 1.0)?);
        let x0 = periodic_approximant(e, &tent, 0.3, SpectralDictionary::default())?.q;
        let zero = State::Grid(GridFunction::zero(e.step(), e.step())?);
        let scan = fh_hit_density(
            e,
            &x0,
            &[Ball { center: x0.clone(), radius }, Ball { center: zero, radius }],
            horizon,
            step,
        )?;
        let mut csv = Csv::new(&["t", "dist_self", "dist_zero", "hit_self", "hit_zero"]);
        for (k, &t) in scan.times.iter().enumerate() {
            let (a, b) = (scan.distances[0][k], scan.distances[1][k]);
            csv.push(vec![num(t), num(a), num(b), flag(a < radius), flag(b < radius)]);
        }
        let (s, z) = (&scan.estimates[0], &scan.estimates[1]);
        Ok(ProbeOutput {
            csv,
            metrics: vec![metric("lower_self", s.lower), metric("lower_zero", z.lower)],
            notes: vec!["evidence on two targets, not a verdict".to_string()],
            passed: s.lower > 0.0 && z.lower > 0.0,
        })
    }
}

struct Equivalences;

impl ScenarioProbe for Equivalences {
    fn kind(&self) -> &'static str {
        "equivalences"
    }
    fn engines(&self) -> &'static [EngineKind] {
        TRANSLATION
    }
    fn needs_seed(&self) -> bool {
        true
    }
    /// CSV: `item,value`, one row per measured quantity.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let e = ctx.translation();
        let d = EquivalenceConfig::default();
        let config = EquivalenceConfig {
            seed: ctx.seed(),
            step: e.step(),
            shadow_cases: ctx.params.usize_or("shadow_cases", d.shadow_cases)?,
            fh_horizon: ctx.params.f64_or("fh_horizon", d.fh_horizon)?,
            ..d
        };
        let r = translation_equivalences(e.weight(), e.p(), &[], &config)?;
        let mut items: Vec<(String, f64)> = Vec::new();
        let b = |x: Option<bool>| x.map_or(f64::NAN, |v| v as u8 as f64);
        match r.integral {
            crate::spaces::TailIntegral::Finite(i) => items.push(metric("integral", i)),
            crate::spaces::TailIntegral::Divergent => items.push(metric("integral", f64::INFINITY)),
            crate::spaces::TailIntegral::Inconclusive { partial } => items.push(metric("integral_partial", partial)),
        }
        if let Some(s) = &r.shadowing {
            items.push(metric("shadowing_cases", s.cases as f64));
            items.push(metric("shadowing_passed", s.passed as f64));
        }
        items.push(metric("shadowing_ok", b(r.shadowing_ok)));
        items.push(metric("gap_refused", r.gap_refusal.is_some() as u8 as f64));
        for c in &r.periodic {
            items.push(metric(&format!("periodic_{}_error", c.target), c.error));
        }
        items.push(metric("periodic_ok", b(r.periodic_density_ok)));
        if let Some(f) = r.mixing_first_all_pass {
            items.push(metric("mixing_first_all_pass", f));
        }
        items.push(metric("mixing_ok", b(r.mixing_ok)));
        for f in &r.fh_evidence {
            items.push(metric(&format!("fh_lower {}", f.target), f.lower));
        }
        items.push(metric("fh_ok", b(r.fh_ok)));
        items.push(metric("consistent", (r.overall == Overall::Consistent) as u8 as f64));
        let mut csv = Csv::new(&["item", "value"]);
        for (k, v) in &items {
            csv.push(vec![k.clone(), num(*v)]);
        }
        let overall = match r.overall {
            Overall::Consistent => "consistent",
            Overall::Inconsistent => "inconsistent",
            Overall::Inconclusive => "inconclusive",
        };
        let mut notes = vec![format!("overall = {overall}")];
        notes.extend(r.gap_refusal.iter().cloned());
        if let Some(s) = &r.shadowing {
            notes.extend(s.failures.iter().cloned());
        }
        Ok(ProbeOutput {
            csv,
            metrics: items,
            notes,
            passed: r.overall == Overall::Consistent,
        })
    }
}

struct HhteEigenfield;

impl ScenarioProbe for HhteEigenfield {
    fn kind(&self) -> &'static str {
        "hhte_eigenfield"
    }
    fn engines(&self) -> &'static [EngineKind] {
        &[EngineKind::SecondOrder]
    }
    /// CSV: `t,residual,status` (`status` is `ok` or the rejection reason).
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let so = ctx.engine.as_second_order().expect("engine kind checked");
        let lo = ctx.params.f64_or("t_min", -1.0)?;
        let hi = ctx.params.f64_or("t_max", 1.0)?;
        let k = ctx.params.usize_or("samples", 41)?.max(2);
        let ts: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
        let tol = ctx.tol("eigen_residual", 1e-8);
        let r = eigenfield_check(ctx.engine, &|t| hhte_field(so, t), &ts, &[], tol)?;
        let mut csv = Csv::new(&["t", "residual", "status"]);
        for (t, res) in &r.residuals {
            csv.push(vec![num(*t), num(*res), "ok".into()]);
        }
        for rej in &r.rejections {
            csv.push(vec![num(rej.t), String::new(), rej.reason.clone()]);
        }
        Ok(ProbeOutput {
            csv,
            metrics: vec![
                metric("residual_sup", r.residual_sup),
                metric("boundedness", r.boundedness),
                metric("rejected", r.rejections.len() as f64),
            ],
            notes: vec![],
            passed: r.residual_sup < tol && !r.degenerate,
        })
    }
}

struct BsExactness;

impl ScenarioProbe for BsExactness {
    fn kind(&self) -> &'static str {
        "bs_exactness"
    }
    fn engines(&self) -> &'static [EngineKind] {
        &[EngineKind::BlackScholes]
    }
    /// CSV: `t,x1_drift,x0_coefficient,x0_expected,x0_error`.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let bs = ctx.engine.as_black_scholes().expect("engine kind checked");
        let ts = ctx.params.f64_list_or("times", &[0.5, 1.0, 5.0])?;
        let one = Complex64::new(1.0, 0.0);
        let x1 = MonomialCombo::monomial(one, one);
        let x0 = MonomialCombo::monomial(Complex64::default(), one);
        let mut csv = Csv::new(&["t", "x1_drift", "x0_coefficient", "x0_expected", "x0_error"]);
        let (mut drift, mut err) = (0.0f64, 0.0f64);
        for &t in &ts {
            let d = (bs.apply_monomials(t, &x1)?.coefficient(one).unwrap_or_default() - one).norm();
            let c = bs.apply_monomials(t, &x0)?.coefficient(Complex64::default()).unwrap_or_default();
            let want = (-bs.r() * t).exp();
            let e = (c - want).norm();
            drift = drift.max(d);
            err = err.max(e);
            csv.push(vec![num(t), num(d), num(c.re), num(want), num(e)]);
        }
        Ok(ProbeOutput {
            csv,
            metrics: vec![metric("max_x1_drift", drift), metric("max_x0_error", err)],
            notes: vec![],
            passed: drift < ctx.tol("x1_drift", 1e-14) && err < ctx.tol("x0_error", 1e-12),
        })
    }
}

struct Gate;

impl ScenarioProbe for Gate {
    fn kind(&self) -> &'static str {
        "gate"
    }
    fn engines(&self) -> &'static [EngineKind] {
        &[EngineKind::SecondOrder, EngineKind::BlackScholes]
    }
    /// CSV: `quantity,value`, ending with the gate value as 0/1.
    fn run(&self, ctx: &ProbeContext) -> Result<ProbeOutput> {
        let mut rows: Vec<(String, f64)> = Vec::new();
        let gate = if let Some(so) = ctx.engine.as_second_order() {
            let tau = so.tau().ok_or_else(|| Error::invalid("the wave equation has no relaxation time"))?;
            rows.push(metric("alpha", so.alpha()));
            rows.push(metric("tau", tau));
            rows.push(metric("rho", so.rho()));
            rows.push(metric("alpha_tau_rho", so.alpha() * tau * so.rho()));
            hhte_parameter_gate(so.alpha(), tau, so.rho())
        } else {
            let bs = ctx.engine.as_black_scholes().expect("engine kind checked");
            let sp = bs.space();
            rows.push(metric("s", sp.s));
            rows.push(metric("tau_y", sp.tau_y));
            rows.push(metric("sigma", bs.sigma()));
            rows.push(metric("s_nu", sp.s * bs.nu()));
            blackscholes_parameter_gate(sp.s, sp.tau_y, bs.sigma())
        };
        rows.push(metric("gate", gate as u8 as f64));
        let mut csv = Csv::new(&["quantity", "value"]);
        for (k, v) in &rows {
            csv.push(vec![k.clone(), num(*v)]);
        }
        Ok(ProbeOutput {
            csv,
            metrics: rows,
            notes: vec![],
            passed: gate,
        })
    }
}
