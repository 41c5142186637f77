use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::semigroup::{BlackScholesSemigroup, SecondOrderSemigroup, Semigroup, State, TranslationSemigroup};
use crate::shadowing::{class_index, splice, Piece, ShadowingSpec};
use crate::spaces::{CoefficientPair, MonomialCombo};
use crate::span::least_squares;

/// Relative truncation estimate over one period above which a second-order
/// eigenvector is left out of the dictionary.
pub const ATOM_TRUNCATION_TOL: f64 = 1e-6;

/// Frequencies `θ_k = k·θ_0`, `k = 1..=count`, of the eigenvector dictionary
/// used by the spectral engines; every member has period `2π/θ_0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralDictionary {
    pub theta0: f64,
    pub count: usize,
}

impl Default for SpectralDictionary {
    fn default() -> Self {
        SpectralDictionary { theta0: 1.0, count: 4 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicApproximant {
    pub q: State,
    pub period: f64,
    /// `‖q - target‖`.
    pub error: f64,
    /// `‖T_P q - q‖` measured by the engine.
    pub period_residual: f64,
    /// The construction guarantees `error < delta` (translation only).
    pub guaranteed: bool,
    pub dictionary_size: usize,
}

/// A periodic point near `target`.
///
/// Translation: shadowing with the single piece `y_1 = target` on `[0, 0]`.
/// Spectral engines: least-squares combination of eigenvectors with
/// eigenvalues `i·k·θ_0`; the distance to `target` is reported, not promised.
pub fn periodic_approximant(
    engine: &dyn Semigroup,
    target: &State,
    delta: f64,
    dictionary: SpectralDictionary,
) -> Result<PeriodicApproximant> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if engine.norm(target)? == 0.0 {
        return Ok(PeriodicApproximant {
            q: target.clone(),
            period: 1.0,
            error: 0.0,
            period_residual: 0.0,
            guaranteed: true,
            dictionary_size: 0,
        });
    }
    if let Some(tr) = engine.as_translation() {
        return translation_approximant(tr, target, delta);
    }
    if let (Some(bs), Some(u)) = (engine.as_black_scholes(), target.as_monomials()) {
        if let Some(period) = eigen_period(bs, u) {
            return finish(engine, target.clone(), target, period, 1);
        }
    }
    let atoms = spectral_atoms(engine, target, dictionary)?;
    if atoms.is_empty() {
        return Err(Error::NoImaginaryEigen(format!(
            "no eigenvector with eigenvalue i·k·{} (k = 1..={}) lies in the space",
            dictionary.theta0, dictionary.count
        )));
    }
    let feats: Vec<Vec<Complex64>> = atoms.iter().map(|a| engine.features(a)).collect::<Result<_>>()?;
    let (coef, _) = least_squares(&feats, &engine.features(target)?);
    let mut q = atoms[0].scale(coef[0]);
    for (a, c) in atoms.iter().zip(&coef).skip(1) {
        q = a.axpy(*c, &q)?;
    }
    finish(engine, q, target, 2.0 * PI / dictionary.theta0, atoms.len())
}

fn finish(engine: &dyn Semigroup, q: State, target: &State, period: f64, size: usize) -> Result<PeriodicApproximant> {
    let back = engine.apply(period, &q)?;
    Ok(PeriodicApproximant {
        error: engine.distance(&q, target)?,
        period_residual: engine.distance(&back, &q)?,
        q,
        period,
        guaranteed: false,
        dictionary_size: size,
    })
}

fn translation_approximant(engine: &TranslationSemigroup, target: &State, delta: f64) -> Result<PeriodicApproximant> {
    let u = target.as_grid().ok_or(Error::StateMismatch {
        engine: "translation",
        got: target.type_name(),
    })?;
    let spec = ShadowingSpec::new(
        vec![Piece { y: u.clone(), a: 0.0, b: 0.0 }],
        delta,
        class_index(u),
        1.0,
        engine.p(),
        engine.weight().clone(),
    )?;
    let cert = splice(&spec)?;
    let error = engine.grid_distance(&cert.x, u)?;
    Ok(PeriodicApproximant {
        q: State::Grid(cert.x),
        period: cert.period,
        error,
        period_residual: cert.period_residual,
        guaranteed: true,
        dictionary_size: 1,
    })
}

/// Common period of a monomial combination whose exponents are all
/// eigenvectors with nonzero imaginary eigenvalues at integer ratios.
fn eigen_period(bs: &BlackScholesSemigroup, u: &MonomialCombo) -> Option<f64> {
    let thetas: Vec<f64> = u
        .terms()
        .iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(b, _)| bs.lambda(*b))
        .map(|l| if l.re.abs() <= 1e-12 * l.norm() && l.im != 0.0 { Some(l.im.abs()) } else { None })
        .collect::<Option<_>>()?;
    let base = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    if !base.is_finite() {
        return None;
    }
    let commensurable = thetas.iter().all(|t| {
        let r = t / base;
        (r - r.round()).abs() <= 1e-9 * r
    });
    commensurable.then(|| 2.0 * PI / base)
}

fn spectral_atoms(engine: &dyn Semigroup, target: &State, d: SpectralDictionary) -> Result<Vec<State>> {
    let thetas: Vec<f64> = (1..=d.count).flat_map(|k| [k as f64 * d.theta0, -(k as f64) * d.theta0]).collect();
    if let Some(bs) = engine.as_black_scholes() {
        let mut atoms = Vec::new();
        for th in thetas {
            for beta in bs.imaginary_eigen_exponents(th) {
                atoms.push(State::Monomials(MonomialCombo::monomial(beta, Complex64::new(1.0, 0.0))));
            }
        }
        return Ok(atoms);
    }
    if let Some(so) = engine.as_second_order() {
        let rho_target = target.as_coefficients().map(CoefficientPair::rho);
        if rho_target.is_some_and(|r| r != so.rho()) {
            return Err(Error::invalid("target and engine have different rho"));
        }
        // Atoms whose truncation error over one period is not small relative
        // to their norm would make the combination only nominally periodic.
        let period = 2.0 * PI / d.theta0;
        let mut atoms = Vec::new();
        for a in second_order_atoms(so, &thetas) {
            if so.evolve(period, &a)?.error_estimate <= ATOM_TRUNCATION_TOL * so.norm(&a)? {
                atoms.push(a);
            }
        }
        return Ok(atoms);
    }
    Err(Error::StateMismatch {
        engine: engine.kind().name(),
        got: target.type_name(),
    })
}

fn second_order_atoms(so: &SecondOrderSemigroup, thetas: &[f64]) -> Vec<State> {
    let mut atoms = Vec::new();
    for &th in thetas {
        let lambda = Complex64::new(0.0, th);
        let mu = so.eigen_mu(lambda);
        for m in [mu, -mu] {
            if let Ok(v) = eigenvector_with_mu(so, lambda, m) {
                atoms.push(State::Coefficients(v));
            }
        }
    }
    atoms
}

fn eigenvector_with_mu(so: &SecondOrderSemigroup, lambda: Complex64, mu: Complex64) -> Result<CoefficientPair> {
    if mu.norm() >= so.rho() {
        return Err(Error::invalid("outside X_rho"));
    }
    let q = mu / so.rho();
    let mut a = Vec::with_capacity(so.n_trunc() + 1);
    let mut z = Complex64::new(1.0, 0.0);
    for _ in 0..=so.n_trunc() {
        a.push(z);
        z *= q;
    }
    let b = a.iter().map(|x| x * lambda).collect();
    CoefficientPair::new(so.rho(), a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{GridFunction, WeightFunction};

    #[test]
    fn translation_tent() {
        let e = TranslationSemigroup::new(WeightFunction::exp_decay(1.0).unwrap(), 1.0, 0.01).unwrap();
        let t = State::Grid(GridFunction::tent(0.01, 1.0, 1.0).unwrap());
        let a = periodic_approximant(&e, &t, 0.3, SpectralDictionary::default()).unwrap();
        assert!(a.error < 0.3 && a.guaranteed);
        assert_eq!(a.period_residual, 0.0);
        let q = a.q.as_grid().unwrap();
        let back = crate::semigroup::translate(q, a.period).unwrap();
        assert_eq!(&back, q);
    }

    #[test]
    fn zero_target() {
        let e = BlackScholesSemigroup::new(0.4, 0.05).unwrap();
        let a = periodic_approximant(&e, &State::Monomials(MonomialCombo::default()), 0.1, SpectralDictionary::default())
            .unwrap();
        assert_eq!(a.error, 0.0);
    }

    #[test]
    fn black_scholes_eigen_monomial_is_its_own_approximant() {
        let e = BlackScholesSemigroup::new(0.4, 0.05).unwrap().with_points_per_decade(256).unwrap();
        let beta = e.imaginary_eigen_exponents(1.0)[0];
        let t = State::Monomials(MonomialCombo::monomial(beta, Complex64::new(1.0, 0.0)));
        let a = periodic_approximant(&e, &t, 0.1, SpectralDictionary::default()).unwrap();
        assert_eq!(a.error, 0.0);
        assert!((a.period - 2.0 * PI).abs() < 1e-9);
        assert!(a.period_residual < 1e-8);
    }

    #[test]
    fn second_order_dictionary_is_periodic() {
        let e = SecondOrderSemigroup::new(1.0, Some(1.0), 3.0, 40).unwrap();
        let target = State::Coefficients(
            CoefficientPair::from_fn(3.0, 40, |n| Complex64::new(0.5f64.powi(n as i32), 0.0), |_| Complex64::default())
                .unwrap(),
        );
        let a = periodic_approximant(&e, &target, 0.5, SpectralDictionary { theta0: 1.0, count: 2 }).unwrap();
        assert!(a.dictionary_size > 0);
        assert!(a.period_residual < 1e-4 * (1.0 + e.norm(&a.q).unwrap()), "{}", a.period_residual);
    }
}
