use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::csv::{num, Csv};
use super::probes::{ProbeContext, ProbeParams, ProbeRegistry};
use super::{Expectation, Scenario};
use crate::error::{Error, Result};
use crate::semigroup::EngineRegistry;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory the scenario's `output_dir` (or name) is resolved against.
    pub output_root: PathBuf,
    /// Replaces the seed of every probe.
    pub seed: Option<u64>,
    /// Entries merged over the scenario's `[tolerances]`.
    pub tolerances: Vec<(String, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Refused,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub index: usize,
    pub kind: String,
    pub seed: Option<u64>,
    pub expect: Option<Expectation>,
    pub verdict: Verdict,
    pub expectation_met: Option<bool>,
    pub refusal: Option<String>,
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub csv: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub engine: String,
    pub tolerances: Vec<(String, f64)>,
    pub probes: Vec<ProbeRecord>,
    pub exit_code: i32,
}

/// Outcome of [`run_scenario_file`]: exit code `0` when every declared
/// expectation held, `1` when one failed, `2` on a configuration error.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Option<ScenarioReport>,
    pub output_dir: Option<PathBuf>,
    pub error: Option<Error>,
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::Config { .. } | Error::Unknown { .. } | Error::Parse { .. } | Error::Io { .. })
}

pub fn run_scenario_file(path: &Path, options: &RunOptions) -> RunOutcome {
    let fail = |e: Error| RunOutcome {
        exit_code: 2,
        report: None,
        output_dir: None,
        error: Some(e),
    };
    let scenario = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let dir = output_dir(&scenario, options);
    match run_scenario(&scenario, options) {
        Ok(report) => RunOutcome {
            exit_code: report.exit_code,
            report: Some(report),
            output_dir: Some(dir),
            error: None,
        },
        Err(e) => fail(e),
    }
}

fn output_dir(s: &Scenario, options: &RunOptions) -> PathBuf {
    options
        .output_root
        .join(s.output_dir.clone().unwrap_or_else(|| PathBuf::from(&s.name)))
}

/// Checks the whole scenario, runs the probes in order and writes the
/// artifacts. Configuration problems are errors; numerical refusals are
/// recorded in the report.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<ScenarioReport> {
    let registry = ProbeRegistry::with_builtin();
    let engine = EngineRegistry::with_builtin()
        .build(&scenario.engine, &scenario.engine_params)
        .map_err(|e| match e {
            e @ (Error::Config { .. } | Error::Io { .. }) => e,
            e => Error::Config {
                location: "engine".into(),
                msg: e.to_string(),
            },
        })?;
    let mut tolerances = scenario.tolerances.clone();
    for (k, v) in &options.tolerances {
        tolerances.insert(k.clone(), *v);
    }
    for (i, p) in scenario.probes.iter().enumerate() {
        let probe = registry.get(&p.kind).ok_or_else(|| Error::Config {
            location: format!("probe[{i}].kind"),
            msg: format!("unknown probe `{}`", p.kind),
        })?;
        if !probe.engines().contains(&engine.kind()) {
            return Err(Error::Config {
                location: format!("probe[{i}].kind"),
                msg: format!("probe `{}` does not support engine `{}`", p.kind, scenario.engine),
            });
        }
        if probe.needs_seed() && p.seed.or(options.seed).is_none() {
            return Err(Error::Config {
                location: format!("probe[{i}].seed"),
                msg: format!("probe `{}` is randomized and needs a seed", p.kind),
            });
        }
    }

    let dir = output_dir(scenario, options);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut records = Vec::with_capacity(scenario.probes.len());
    let mut summary = Csv::new(&["probe", "kind", "key", "value"]);
    for (i, p) in scenario.probes.iter().enumerate() {
        let probe = registry.get(&p.kind).expect("checked above");
        let seed = options.seed.or(p.seed);
        let params = ProbeParams::new(i, p.params.clone());
        let ctx = ProbeContext {
            engine: engine.as_ref(),
            params: &params,
            seed,
            tolerances: &tolerances,
        };
        let file = format!("{i:02}_{}.csv", p.kind);
        let (verdict, refusal, out) = match probe.run(&ctx) {
            Ok(out) => (if out.passed { Verdict::Pass } else { Verdict::Fail }, None, Some(out)),
            Err(e) if is_config_error(&e) => return Err(e),
            Err(e) => (Verdict::Refused, Some(e.to_string()), None),
        };
        let csv = out.as_ref().map(|o| o.csv.clone()).unwrap_or_else(|| {
            let mut c = Csv::new(&["refusal"]);
            c.push(vec![refusal.clone().unwrap_or_default()]);
            c
        });
        let path = dir.join(&file);
        std::fs::write(&path, csv.render()).map_err(|e| Error::io(&path, e))?;
        let (metrics, notes) = out.map(|o| (o.metrics, o.notes)).unwrap_or_default();
        for (k, v) in &metrics {
            summary.push(vec![i.to_string(), p.kind.clone(), k.clone(), num(*v)]);
        }
        let expectation_met = p.expect.map(|e| {
            matches!(
                (e, verdict),
                (Expectation::Pass, Verdict::Pass) | (Expectation::Fail, Verdict::Fail) | (Expectation::Refused, Verdict::Refused)
            )
        });
        records.push(ProbeRecord {
            index: i,
            kind: p.kind.clone(),
            seed,
            expect: p.expect,
            verdict,
            expectation_met,
            refusal,
            metrics,
            notes,
            csv: file,
        });
    }
    let exit_code = if records.iter().all(|r| r.expectation_met != Some(false)) { 0 } else { 1 };
    let report = ScenarioReport {
        name: scenario.name.clone(),
        engine: scenario.engine.clone(),
        tolerances: tolerances.into_iter().collect(),
        probes: records,
        exit_code,
    };
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write("summary.csv", summary.render())?;
    write("summary.txt", render_summary(&report))?;
    write(
        "report.json",
        serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
    )?;
    Ok(report)
}

/// Human-readable report; every number is also a row of `summary.csv`.
pub fn render_summary(report: &ScenarioReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario {} (engine {})", report.name, report.engine);
    for (k, v) in &report.tolerances {
        let _ = writeln!(s, "tolerance {k} = {}", num(*v));
    }
    if report.probes.is_empty() {
        let _ = writeln!(s, "no probes");
    }
    for r in &report.probes {
        let verdict = match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Refused => "refused",
        };
        let expect = match (r.expect, r.expectation_met) {
            (Some(e), Some(true)) => format!(", expected {} (met)", e.name()),
            (Some(e), _) => format!(", expected {} (NOT MET)", e.name()),
            _ => String::new(),
        };
        let _ = writeln!(s, "[{}] {}: {verdict}{expect} -> {}", r.index, r.kind, r.csv);
        if let Some(msg) = &r.refusal {
            let _ = writeln!(s, "    refused: {msg}");
        }
        for (k, v) in &r.metrics {
            let _ = writeln!(s, "    {k} = {}", num(*v));
        }
        for n in &r.notes {
            let _ = writeln!(s, "    note: {n}");
        }
    }
    let _ = writeln!(s, "exit code {}", report.exit_code);
    s
}
