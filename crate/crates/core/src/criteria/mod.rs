//! Checkable sufficient conditions: the translation-semigroup dichotomy,
//! the eigenvector-field criterion and the parameter gates of the worked
//! examples.

mod eigenfield;
mod equivalence;

pub use eigenfield::{eigenfield_check, hhte_field, EigenfieldReport, Rejection, SpanCurve};
pub use equivalence::{
    translation_equivalences, EquivalenceConfig, EquivalenceReport, FhEvidence, Overall, PeriodicCheck, ShadowingSuite,
};

/// Chaos gate of the hyperbolic heat transfer equation: `α·τ·ρ > 2`.
pub fn hhte_parameter_gate(alpha: f64, tau: f64, rho: f64) -> bool {
    alpha * tau * rho > 2.0
}

/// Chaos gate of the Black–Scholes semigroup on `Y^{s,τ}`:
/// `s > 1`, `τ ≥ 0` and `s·σ/√2 > 1`.
pub fn blackscholes_parameter_gate(s: f64, tau_y: f64, sigma: f64) -> bool {
    s > 1.0 && tau_y >= 0.0 && s * sigma / std::f64::consts::SQRT_2 > 1.0
}
