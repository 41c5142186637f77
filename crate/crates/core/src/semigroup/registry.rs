use std::collections::BTreeMap;

use super::{BlackScholesSemigroup, SecondOrderSemigroup, Semigroup, TranslationSemigroup};
use crate::error::{Error, Result};
use crate::spaces::{table_io, WeightFunction};

/// Named engine parameters as they appear in a scenario's `[engine]` table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EngineParams {
    values: toml::Table,
}

impl EngineParams {
    pub fn new(values: toml::Table) -> Self {
        EngineParams { values }
    }

    pub fn table(&self) -> &toml::Table {
        &self.values
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(Error::Config {
                location: format!("engine.{key}"),
                msg: format!("expected a number, found {other}"),
            }),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?.ok_or_else(|| Error::Config {
            location: format!("engine.{key}"),
            msg: "missing required parameter".into(),
        })
    }

    pub fn get_str(&self, key: &str) -> Result<Option<&str>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(Error::Config {
                location: format!("engine.{key}"),
                msg: format!("expected a string, found {other}"),
            }),
        }
    }

    /// Weight from `weight = "exp_decay" | "constant" | "rational_decay"`
    /// with `rate` / `level` / `exponent`, or from `weight_file`.
    pub fn weight(&self) -> Result<WeightFunction> {
        if let Some(path) = self.get_str("weight_file")? {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            return table_io::read_weight(&text);
        }
        let cfg = |e: Error| Error::Config {
            location: "engine.weight".into(),
            msg: e.to_string(),
        };
        match self.get_str("weight")?.unwrap_or("exp_decay") {
            "exp_decay" => WeightFunction::exp_decay(self.f64_or("rate", 1.0)?).map_err(cfg),
            "constant" => WeightFunction::constant(self.f64_or("level", 1.0)?).map_err(cfg),
            "rational_decay" => {
                WeightFunction::rational_decay(self.f64_or("exponent", 2.0)?).map_err(cfg)
            }
            other => Err(Error::Unknown {
                what: "weight",
                name: other.to_string(),
            }),
        }
    }
}

pub type EngineFactory = fn(&EngineParams) -> Result<Box<dyn Semigroup>>;

/// Name → factory map for semigroup engines.
#[derive(Debug, Clone)]
pub struct EngineRegistry {
    factories: BTreeMap<String, EngineFactory>,
}

impl Default for EngineRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl EngineRegistry {
    pub fn empty() -> Self {
        EngineRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// `translation`, `second_order` (alias `hhte`), `wave`, `black_scholes`.
    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register("translation", build_translation);
        r.register("second_order", build_second_order);
        r.register("hhte", build_second_order);
        r.register("wave", build_wave);
        r.register("black_scholes", build_black_scholes);
        r
    }

    pub fn register(&mut self, name: &str, factory: EngineFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, params: &EngineParams) -> Result<Box<dyn Semigroup>> {
        let factory = self.factories.get(name).ok_or_else(|| Error::Unknown {
            what: "engine",
            name: name.to_string(),
        })?;
        factory(params)
    }
}

fn build_translation(p: &EngineParams) -> Result<Box<dyn Semigroup>> {
    let v = p.weight()?;
    let engine = TranslationSemigroup::new(v, p.f64_or("p", 1.0)?, p.f64_or("step", 0.01)?)?;
    Ok(Box::new(engine))
}

fn second_order_common(p: &EngineParams, tau: Option<f64>) -> Result<Box<dyn Semigroup>> {
    let n_trunc = p.f64_or("n_trunc", 60.0)?;
    if n_trunc < 2.0 || n_trunc.fract() != 0.0 {
        return Err(Error::Config {
            location: "engine.n_trunc".into(),
            msg: format!("expected an integer >= 2, got {n_trunc}"),
        });
    }
    let engine = SecondOrderSemigroup::new(
        p.f64_or("alpha", 1.0)?,
        tau,
        p.f64_or("rho", 3.0)?,
        n_trunc as usize,
    )?
    .with_tolerance(p.f64_or("tol", 1e-8)?);
    Ok(Box::new(engine))
}

fn build_second_order(p: &EngineParams) -> Result<Box<dyn Semigroup>> {
    second_order_common(p, Some(p.f64_or("tau", 1.0)?))
}

fn build_wave(p: &EngineParams) -> Result<Box<dyn Semigroup>> {
    second_order_common(p, None)
}

fn build_black_scholes(p: &EngineParams) -> Result<Box<dyn Semigroup>> {
    let engine = BlackScholesSemigroup::new(p.f64_or("sigma", 0.4)?, p.f64_or("r", 0.05)?)?
        .with_space(p.f64_or("s", 4.0)?, p.f64_or("tau_y", 0.0)?)?
        .with_points_per_decade(p.f64_or("points_per_decade", 4096.0)? as usize)?;
    Ok(Box::new(engine))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::EngineKind;

    #[test]
    fn builtin_names_resolve() {
        let r = EngineRegistry::with_builtin();
        for (name, kind) in [
            ("translation", EngineKind::Translation),
            ("hhte", EngineKind::SecondOrder),
            ("wave", EngineKind::SecondOrder),
            ("black_scholes", EngineKind::BlackScholes),
        ] {
            let e = r.build(name, &EngineParams::default()).unwrap();
            assert_eq!(e.kind(), kind);
        }
    }

    #[test]
    fn unknown_engine_is_reported() {
        let r = EngineRegistry::with_builtin();
        let err = r.build("heat", &EngineParams::default()).unwrap_err();
        assert!(matches!(err, Error::Unknown { what: "engine", .. }));
    }

    #[test]
    fn wave_has_no_relaxation() {
        let r = EngineRegistry::with_builtin();
        let e = r.build("wave", &EngineParams::default()).unwrap();
        assert_eq!(e.as_second_order().unwrap().tau(), None);
    }

    #[test]
    fn weight_selection() {
        let mut t = toml::Table::new();
        t.insert("weight".into(), toml::Value::String("constant".into()));
        let w = EngineParams::new(t).weight().unwrap();
        assert_eq!(w, WeightFunction::constant(1.0).unwrap());
    }
}
