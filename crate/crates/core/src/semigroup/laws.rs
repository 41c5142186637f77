use serde::Serialize;

use super::{Semigroup, State};
use crate::error::{Error, Result};

pub const CONTINUITY_EPSILON: f64 = 1e-3;

/// Residuals of the semigroup laws in the engine's native norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LawReport {
    /// `‖T_0 f - f‖`.
    pub identity_residual: f64,
    /// `‖T_{t1+t2} f - T_{t1} T_{t2} f‖`.
    pub composition_residual: f64,
    /// `‖T_{t1+ε} f - T_{t1} f‖` with `ε = 1e-3`.
    pub continuity_residual: f64,
    /// Largest error indicator reported by the engine along the way.
    pub max_error_estimate: f64,
    pub truncation_limited: bool,
}

pub fn check_semigroup_laws(
    engine: &dyn Semigroup,
    f: &State,
    t1: f64,
    t2: f64,
) -> Result<LawReport> {
    if !(t1 >= 0.0 && t2 >= 0.0) {
        return Err(Error::invalid(format!("times must be >= 0, got {t1}, {t2}")));
    }
    let mut max_err = 0.0f64;
    let mut limited = false;
    let mut run = |t: f64, s: &State| -> Result<State> {
        let e = engine.evolve(t, s)?;
        max_err = max_err.max(e.error_estimate);
        limited |= e.truncation_limited;
        Ok(e.state)
    };
    let id = run(0.0, f)?;
    let sum = run(t1 + t2, f)?;
    let inner = run(t2, f)?;
    let nested = run(t1, &inner)?;
    let at_t1 = run(t1, f)?;
    let nudged = run(t1 + CONTINUITY_EPSILON, f)?;
    Ok(LawReport {
        identity_residual: engine.distance(&id, f)?,
        composition_residual: engine.distance(&sum, &nested)?,
        continuity_residual: engine.distance(&nudged, &at_t1)?,
        max_error_estimate: max_err,
        truncation_limited: limited,
    })
}
