use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::semigroup::{SecondOrderSemigroup, Semigroup, State};
use crate::span::residual_curve;

/// A sample of the field the sampler refused, with the reason.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rejection {
    pub t: f64,
    pub reason: String,
}

/// Relative least-squares residual of one dictionary target against the
/// span of the first `k` accepted samples, `k = 1, 2, …`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpanCurve {
    pub target: usize,
    pub residuals: Vec<f64>,
}

impl SpanCurve {
    pub fn last(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenfieldReport {
    /// `(t, ‖A f(t) - i·t·f(t)‖)` for every accepted sample.
    pub residuals: Vec<(f64, f64)>,
    pub rejections: Vec<Rejection>,
    /// `sup ‖f(t)‖` over the accepted samples.
    pub boundedness: f64,
    pub span_surrogate: Vec<SpanCurve>,
    pub residual_sup: f64,
    /// All sampled vectors vanish, so the span test says nothing.
    pub degenerate: bool,
    /// Residuals and every span residual below `tol` on a nondegenerate field.
    pub satisfied: bool,
    pub tol: f64,
}

/// Samples `t ↦ f(t)` and measures how well it is an eigenvector field
/// `A f(t) = i·t·f(t)` whose values span a dense set, as seen through a
/// finite dictionary of targets. The verdict is empirical.
pub fn eigenfield_check(
    engine: &dyn Semigroup,
    field: &(dyn Fn(f64) -> Result<State> + Sync),
    t_samples: &[f64],
    dictionary: &[State],
    tol: f64,
) -> Result<EigenfieldReport> {
    let sampled: Vec<(f64, Result<State>)> = t_samples.par_iter().map(|&t| (t, field(t))).collect();
    let mut accepted = Vec::new();
    let mut rejections = Vec::new();
    for (t, s) in sampled {
        match s {
            Ok(s) => accepted.push((t, s)),
            Err(e) => rejections.push(Rejection { t, reason: e.to_string() }),
        }
    }
    let residuals: Vec<(f64, f64)> = accepted
        .par_iter()
        .map(|(t, f)| {
            let af = engine.generator(f)?;
            let expected = f.scale(Complex64::new(0.0, *t));
            Ok((*t, engine.distance(&af, &expected)?))
        })
        .collect::<Result<_>>()?;
    let mut boundedness = 0.0f64;
    for (_, f) in &accepted {
        boundedness = boundedness.max(engine.norm(f)?);
    }
    let feats: Vec<Vec<Complex64>> = accepted.iter().map(|(_, f)| engine.features(f)).collect::<Result<_>>()?;
    let span_surrogate = dictionary
        .par_iter()
        .enumerate()
        .map(|(j, target)| {
            Ok(SpanCurve {
                target: j,
                residuals: residual_curve(&feats, &engine.features(target)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let residual_sup = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    let degenerate = boundedness == 0.0;
    let satisfied = !degenerate
        && !accepted.is_empty()
        && residual_sup < tol
        && span_surrogate.iter().all(|c| c.last() < tol);
    Ok(EigenfieldReport {
        residuals,
        rejections,
        boundedness,
        span_surrogate,
        residual_sup,
        degenerate,
        satisfied,
        tol,
    })
}

/// Closed-form eigenvector field of the second-order engine: `f(t) = e^{μ(t)x}`
/// paired with `i·t·e^{μ(t)x}`, where `c·μ² = (it)² - e·it`. Fails where
/// `|μ(t)| ≥ ρ`.
pub fn hhte_field(engine: &SecondOrderSemigroup, t: f64) -> Result<State> {
    Ok(State::Coefficients(engine.eigenvector(Complex64::new(0.0, t))?))
}
