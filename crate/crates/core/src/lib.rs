//! A laboratory for the specification property of C0-semigroups.
//!
//! Three semigroup engines (translation on weighted `L^p`, a second-order
//! coefficient-space engine for the hyperbolic heat and wave equations, and a
//! spectral Black–Scholes engine) sit behind the [`semigroup::Semigroup`]
//! trait and are selected by name through [`semigroup::EngineRegistry`].
//! On top of them the crate builds periodic shadowing points, numerical
//! probes for mixing, Devaney chaos, distributional irregularity and
//! frequent hypercyclicity, and the checkable criteria that tie them together.
//! The [`scenario`] module runs TOML-described scenarios and writes CSV
//! artifacts plus a verdict report.

pub mod criteria;
pub mod error;
pub mod probes;
pub mod scenario;
pub mod semigroup;
pub mod shadowing;
pub mod span;
pub mod spaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;
