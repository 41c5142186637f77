//! Scenario runner: a TOML file names an engine, tolerances and an ordered
//! list of probes; running it writes one CSV per probe plus `summary.csv`,
//! `summary.txt` and `report.json`.
//!
//! ```toml
//! name = "translation_expdecay"
//! output_dir = "translation_expdecay"   # optional, relative to the output root
//!
//! [engine]
//! name = "translation"
//! weight = "exp_decay"
//! rate = 1.0
//!
//! [tolerances]
//! composition = 0.0
//!
//! [[probe]]
//! kind = "laws"
//! seed = 7
//! expect = "pass"      # or "fail" / "refused"; omit for no claim
//! cases = 20
//! ```

mod csv;
mod probes;
mod runner;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub use csv::Csv;
pub use probes::{law_suite, LawRow, ProbeContext, ProbeOutput, ProbeParams, ProbeRegistry, ScenarioProbe};
pub use runner::{run_scenario, run_scenario_file, ProbeRecord, RunOptions, RunOutcome, ScenarioReport, Verdict};

use crate::error::{Error, Result};
use crate::semigroup::EngineParams;

/// Claim a probe entry makes about its own outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Pass,
    Fail,
    Refused,
}

impl Expectation {
    fn parse(s: &str, location: &str) -> Result<Self> {
        match s {
            "pass" => Ok(Expectation::Pass),
            "fail" => Ok(Expectation::Fail),
            "refused" => Ok(Expectation::Refused),
            other => Err(Error::Config {
                location: location.to_string(),
                msg: format!("expect must be pass, fail or refused, found `{other}`"),
            }),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Expectation::Pass => "pass",
            Expectation::Fail => "fail",
            Expectation::Refused => "refused",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub kind: String,
    pub seed: Option<u64>,
    pub expect: Option<Expectation>,
    /// Every other key of the entry.
    pub params: toml::Table,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub output_dir: Option<PathBuf>,
    pub engine: String,
    pub engine_params: EngineParams,
    pub tolerances: BTreeMap<String, f64>,
    pub probes: Vec<ProbeConfig>,
}

fn config_err(location: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config {
        location: location.into(),
        msg: msg.into(),
    }
}

fn as_f64(v: &toml::Value, location: &str) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(config_err(location, format!("expected a number, found {other}"))),
    }
}

impl Scenario {
    /// Parses scenario text. Relative `weight_file` paths are resolved
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Scenario> {
        let mut root: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            config_err("scenario", e.to_string())
        })?;
        let name = match root.remove("name") {
            Some(toml::Value::String(s)) => s,
            Some(_) => return Err(config_err("name", "expected a string")),
            None => return Err(config_err("name", "missing scenario name")),
        };
        let output_dir = match root.remove("output_dir") {
            Some(toml::Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(config_err("output_dir", "expected a string")),
            None => None,
        };
        let mut engine = match root.remove("engine") {
            Some(toml::Value::Table(t)) => t,
            Some(_) => return Err(config_err("engine", "expected a table")),
            None => return Err(config_err("engine", "missing [engine] section")),
        };
        let engine_name = match engine.remove("name") {
            Some(toml::Value::String(s)) => s,
            _ => return Err(config_err("engine.name", "missing engine name")),
        };
        if let (Some(base), Some(toml::Value::String(f))) = (base_dir, engine.get_mut("weight_file")) {
            if Path::new(f.as_str()).is_relative() {
                *f = base.join(&*f).to_string_lossy().into_owned();
            }
        }
        let mut tolerances = BTreeMap::new();
        match root.remove("tolerances") {
            Some(toml::Value::Table(t)) => {
                for (k, v) in t {
                    let loc = format!("tolerances.{k}");
                    tolerances.insert(k, as_f64(&v, &loc)?);
                }
            }
            Some(_) => return Err(config_err("tolerances", "expected a table")),
            None => {}
        }
        let mut probes = Vec::new();
        match root.remove("probe") {
            Some(toml::Value::Array(items)) => {
                for (i, item) in items.into_iter().enumerate() {
                    let loc = format!("probe[{i}]");
                    let toml::Value::Table(mut t) = item else {
                        return Err(config_err(loc, "expected a table"));
                    };
                    let kind = match t.remove("kind") {
                        Some(toml::Value::String(s)) => s,
                        _ => return Err(config_err(format!("{loc}.kind"), "missing probe kind")),
                    };
                    let seed = match t.remove("seed") {
                        Some(toml::Value::Integer(s)) if s >= 0 => Some(s as u64),
                        Some(_) => return Err(config_err(format!("{loc}.seed"), "expected a nonnegative integer")),
                        None => None,
                    };
                    let expect = match t.remove("expect") {
                        Some(toml::Value::String(s)) => Some(Expectation::parse(&s, &format!("{loc}.expect"))?),
                        Some(_) => return Err(config_err(format!("{loc}.expect"), "expected a string")),
                        None => None,
                    };
                    probes.push(ProbeConfig {
                        kind,
                        seed,
                        expect,
                        params: t,
                    });
                }
            }
            Some(_) => return Err(config_err("probe", "expected [[probe]] entries")),
            None => {}
        }
        if let Some(key) = root.keys().next() {
            return Err(config_err(key.clone(), "unknown top-level key"));
        }
        Ok(Scenario {
            name,
            output_dir,
            engine: engine_name,
            engine_params: EngineParams::new(engine),
            tolerances,
            probes,
        })
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::parse(&text, path.parent())
    }

    /// TOML text that parses back to an equal scenario.
    pub fn to_toml_string(&self) -> String {
        let mut root = toml::Table::new();
        root.insert("name".into(), self.name.clone().into());
        if let Some(d) = &self.output_dir {
            root.insert("output_dir".into(), d.to_string_lossy().into_owned().into());
        }
        let mut engine = self.engine_params.table().clone();
        engine.insert("name".into(), self.engine.clone().into());
        root.insert("engine".into(), engine.into());
        if !self.tolerances.is_empty() {
            let t: toml::Table = self.tolerances.iter().map(|(k, v)| (k.clone(), (*v).into())).collect();
            root.insert("tolerances".into(), t.into());
        }
        if !self.probes.is_empty() {
            let items: Vec<toml::Value> = self
                .probes
                .iter()
                .map(|p| {
                    let mut t = p.params.clone();
                    t.insert("kind".into(), p.kind.clone().into());
                    if let Some(s) = p.seed {
                        t.insert("seed".into(), (s as i64).into());
                    }
                    if let Some(e) = p.expect {
                        t.insert("expect".into(), e.name().into());
                    }
                    t.into()
                })
                .collect();
            root.insert("probe".into(), items.into());
        }
        toml::to_string(&root).expect("a TOML table always serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
name = "demo"
[engine]
name = "translation"
weight = "exp_decay"
rate = 1.0
[tolerances]
composition = 0.0
[[probe]]
kind = "laws"
seed = 3
expect = "pass"
cases = 4
[[probe]]
kind = "dyadic"
"#;

    #[test]
    fn parse_and_round_trip() {
        let s = Scenario::parse(TEXT, None).unwrap();
        assert_eq!(s.engine, "translation");
        assert_eq!(s.probes.len(), 2);
        assert_eq!(s.probes[0].seed, Some(3));
        assert_eq!(s.probes[0].expect, Some(Expectation::Pass));
        assert_eq!(s.probes[0].params.get("cases").and_then(|v| v.as_integer()), Some(4));
        let again = Scenario::parse(&s.to_toml_string(), None).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn errors_carry_locations() {
        let bad = TEXT.replace("expect = \"pass\"", "expect = \"maybe\"");
        match Scenario::parse(&bad, None) {
            Err(Error::Config { location, .. }) => assert_eq!(location, "probe[0].expect"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Scenario::parse("name = \"x\"", None), Err(Error::Config { .. })));
    }
}
