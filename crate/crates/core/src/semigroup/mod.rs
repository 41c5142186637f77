//! Semigroup engines behind one trait.
//!
//! Each engine is a [`Semigroup`] strategy registered by name in an
//! [`EngineRegistry`]; scenarios pick one at runtime. States are carried in
//! the [`State`] enum so that probes can stay engine-agnostic.

mod black_scholes;
mod expm;
mod laws;
mod registry;
mod second_order;
mod translation;

use std::fmt::Debug;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use black_scholes::BlackScholesSemigroup;
pub use expm::expm;
pub use laws::{check_semigroup_laws, LawReport, CONTINUITY_EPSILON};
pub use registry::{EngineFactory, EngineParams, EngineRegistry};
pub use second_order::{SecondOrderSemigroup, TRUNCATION_PROBE_EXTRA};
pub use translation::{translate, TranslationSemigroup};

use crate::error::{Error, Result};
use crate::spaces::{CoefficientPair, GridFunction, MonomialCombo};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Translation,
    SecondOrder,
    BlackScholes,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Translation => "translation",
            EngineKind::SecondOrder => "second_order",
            EngineKind::BlackScholes => "black_scholes",
        }
    }
}

/// An element of one of the three state spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Grid(GridFunction),
    Coefficients(CoefficientPair),
    Monomials(MonomialCombo),
}

impl State {
    pub fn type_name(&self) -> &'static str {
        match self {
            State::Grid(_) => "grid function",
            State::Coefficients(_) => "coefficient pair",
            State::Monomials(_) => "monomial combination",
        }
    }

    pub fn scale(&self, alpha: Complex64) -> State {
        match self {
            State::Grid(f) => State::Grid(f.scale(alpha)),
            State::Coefficients(u) => State::Coefficients(u.scale(alpha)),
            State::Monomials(u) => State::Monomials(u.scale(alpha)),
        }
    }

    /// `alpha·self + other`.
    pub fn axpy(&self, alpha: Complex64, other: &State) -> Result<State> {
        Ok(match (self, other) {
            (State::Grid(f), State::Grid(g)) => State::Grid(f.axpy(alpha, g)?),
            (State::Coefficients(u), State::Coefficients(w)) => State::Coefficients(u.axpy(alpha, w)?),
            (State::Monomials(u), State::Monomials(w)) => State::Monomials(u.axpy(alpha, w)),
            (a, b) => {
                return Err(Error::invalid(format!(
                    "cannot combine a {} with a {}",
                    a.type_name(),
                    b.type_name()
                )))
            }
        })
    }

    pub fn as_grid(&self) -> Option<&GridFunction> {
        match self {
            State::Grid(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_coefficients(&self) -> Option<&CoefficientPair> {
        match self {
            State::Coefficients(u) => Some(u),
            _ => None,
        }
    }

    pub fn as_monomials(&self) -> Option<&MonomialCombo> {
        match self {
            State::Monomials(u) => Some(u),
            _ => None,
        }
    }
}

/// Result of advancing a state, with the engine's own error indicator.
#[derive(Clone, Debug, PartialEq)]
pub struct Evolved {
    pub state: State,
    /// Interpolation bound (translation), truncation estimate (second order),
    /// or zero (spectral).
    pub error_estimate: f64,
    pub truncation_limited: bool,
}

impl Evolved {
    pub fn exact(state: State) -> Self {
        Evolved {
            state,
            error_estimate: 0.0,
            truncation_limited: false,
        }
    }
}

/// A C0-semigroup `(T_t)_{t>=0}` acting on one state space.
pub trait Semigroup: Send + Sync + Debug {
    fn kind(&self) -> EngineKind;

    /// `T_t state` with an error indicator.
    fn evolve(&self, t: f64, state: &State) -> Result<Evolved>;

    fn apply(&self, t: f64, state: &State) -> Result<State> {
        Ok(self.evolve(t, state)?.state)
    }

    /// Native norm of `a - b` (conservative upper estimate).
    fn distance(&self, a: &State, b: &State) -> Result<f64>;

    fn norm(&self, a: &State) -> Result<f64>;

    /// Infinitesimal generator applied to `state`.
    fn generator(&self, state: &State) -> Result<State>;

    /// Finite weighted embedding used for least-squares span tests.
    fn features(&self, state: &State) -> Result<Vec<Complex64>>;

    fn as_translation(&self) -> Option<&TranslationSemigroup> {
        None
    }

    fn as_second_order(&self) -> Option<&SecondOrderSemigroup> {
        None
    }

    fn as_black_scholes(&self) -> Option<&BlackScholesSemigroup> {
        None
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("time must be finite and >= 0, got {t}")))
    }
}
