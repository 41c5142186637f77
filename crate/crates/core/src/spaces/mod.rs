//! Function spaces, their elements and norms.
//!
//! * [`GridFunction`]: sampled functions on `[0, ∞)` for the translation engine.
//! * [`CoefficientPair`]: truncated elements of `X_ρ ⊕ X_ρ`.
//! * [`MonomialCombo`]: finite combinations of `x^β`, the Black–Scholes states.
//! * [`WeightFunction`]: admissible weights `v` for `L^p_v(ℝ₊)`.

mod coeff;
mod grid;
mod monomial;
mod norms;
pub mod table_io;
mod weight;

pub use coeff::CoefficientPair;
pub use grid::{grid_index, Extension, GridFunction};
pub use monomial::MonomialCombo;
pub use norms::{
    lp_v_distance, lp_v_norm, x_rho_norm, y_stau_norm, Difference, LpNorm, NodeSeries,
    NormEstimate, Shifted, SpaceParams, Tail, YNorm, DEFAULT_POINTS_PER_DECADE,
};
pub use weight::{
    admissibility_check, Admissibility, AdmissibilityReport, AdmissibilityVerdict, TailIntegral,
    WeightFunction, WeightKind,
};
