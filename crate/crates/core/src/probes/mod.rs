//! Numerical probes for the dynamical properties that follow from
//! specification: return sets (mixing), periodic approximants (Devaney
//! chaos), distributionally irregular vectors, and hit densities (frequent
//! hypercyclicity), all reported through upper/lower density surrogates.

mod density;
mod fh;
mod irregular;
mod mixing;
mod periodic;

pub use density::{
    density_estimate, dyadic_union, DensityEstimate, DensityMode, Indicator, DEFAULT_TAIL_FRACTION,
    GEOMETRIC_RATIO_LOG2,
};
pub use fh::{fh_hit_density, Ball, HitScan};
pub use irregular::{irregular_vector, IrregularParams, IrregularVector, NormSample};
pub use mixing::{mixing_threshold, mixing_witness, return_set_scan, Margins, MixingWitness, ReturnSetReport};
pub use periodic::{periodic_approximant, ATOM_TRUNCATION_TOL, PeriodicApproximant, SpectralDictionary};
