use num_complex::Complex64;

use super::{check_time, EngineKind, Evolved, Semigroup, State};
use crate::error::{Error, Result};
use crate::spaces::{y_stau_norm, MonomialCombo, SpaceParams, DEFAULT_POINTS_PER_DECADE};

const FEATURE_POINTS_PER_DECADE: usize = 32;

/// Black–Scholes semigroup `T_t = e^{t𝓑}`, `𝓑 = D_ν² + γD_ν - r`,
/// `D_ν = ν x ∂/∂x`, acting diagonally on monomials: `x^β` is an eigenvector
/// with eigenvalue `λ(β) = ν²β² + γνβ - r = (β - 1)(ν²β + r)`.
#[derive(Clone, Debug)]
pub struct BlackScholesSemigroup {
    sigma: f64,
    r: f64,
    space: SpaceParams,
    points_per_decade: usize,
}

impl BlackScholesSemigroup {
    pub fn new(sigma: f64, r: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("sigma and r must be positive, got {sigma}, {r}")));
        }
        Ok(BlackScholesSemigroup {
            sigma,
            r,
            space: SpaceParams::new(1.0, 4.0, 0.0)?,
            points_per_decade: DEFAULT_POINTS_PER_DECADE,
        })
    }

    /// Norm of `Y^{s,τ}`.
    pub fn with_space(mut self, s: f64, tau_y: f64) -> Result<Self> {
        self.space = SpaceParams::new(1.0, s, tau_y)?;
        Ok(self)
    }

    pub fn with_points_per_decade(mut self, ppd: usize) -> Result<Self> {
        if ppd == 0 {
            return Err(Error::invalid("points_per_decade must be positive"));
        }
        self.points_per_decade = ppd;
        Ok(self)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn nu(&self) -> f64 {
        self.sigma / std::f64::consts::SQRT_2
    }

    pub fn gamma(&self) -> f64 {
        self.r / self.nu() - self.nu()
    }

    pub fn space(&self) -> SpaceParams {
        self.space
    }

    pub fn points_per_decade(&self) -> usize {
        self.points_per_decade
    }

    /// `λ(β)` in the factored form, so that `λ(1) = 0` and `λ(0) = -r` hold
    /// exactly in floating point.
    pub fn lambda(&self, beta: Complex64) -> Complex64 {
        let nu = self.nu();
        (beta - 1.0) * (nu * nu * beta + self.r)
    }

    /// Whether `x^β` lies in the chaotic part of `Y^{s,τ}`: vanishing
    /// relative to the weight at both ends, i.e. `-τ < Re β < s`, with
    /// `Re β > 0` when `τ = 0`.
    pub fn in_space(&self, beta: Complex64) -> bool {
        let lo = if self.space.tau_y == 0.0 { 0.0 } else { -self.space.tau_y };
        beta.re > lo && beta.re < self.space.s
    }

    /// Roots of `λ(β) = iθ`, i.e. `ν²β² + (r - ν²)β - (r + iθ) = 0`, that lie
    /// in the space.
    pub fn imaginary_eigen_exponents(&self, theta: f64) -> Vec<Complex64> {
        let nu2 = self.nu() * self.nu();
        let b = self.r - nu2;
        let c = -Complex64::new(self.r, theta);
        let disc = (b * b - 4.0 * nu2 * c).sqrt();
        [(-b + disc) / (2.0 * nu2), (-b - disc) / (2.0 * nu2)]
            .into_iter()
            .filter(|beta| self.in_space(*beta))
            .collect()
    }

    pub fn y_norm(&self, u: &MonomialCombo) -> Result<f64> {
        Ok(y_stau_norm(u, &self.space, self.points_per_decade)?.sup)
    }

    pub fn apply_monomials(&self, t: f64, u: &MonomialCombo) -> Result<MonomialCombo> {
        check_time(t)?;
        if t == 0.0 {
            return Ok(u.clone());
        }
        Ok(u.map_coefficients(|beta, c| c * (self.lambda(beta) * t).exp()))
    }

    fn monomials<'a>(&self, state: &'a State) -> Result<&'a MonomialCombo> {
        state.as_monomials().ok_or(Error::StateMismatch {
            engine: "black_scholes",
            got: state.type_name(),
        })
    }
}

impl Semigroup for BlackScholesSemigroup {
    fn kind(&self) -> EngineKind {
        EngineKind::BlackScholes
    }

    fn evolve(&self, t: f64, state: &State) -> Result<Evolved> {
        Ok(Evolved::exact(State::Monomials(self.apply_monomials(t, self.monomials(state)?)?)))
    }

    fn distance(&self, a: &State, b: &State) -> Result<f64> {
        let d = self.monomials(a)?.axpy(Complex64::new(-1.0, 0.0), self.monomials(b)?);
        self.y_norm(&d)
    }

    fn norm(&self, a: &State) -> Result<f64> {
        self.y_norm(self.monomials(a)?)
    }

    fn generator(&self, state: &State) -> Result<State> {
        Ok(State::Monomials(
            self.monomials(state)?.map_coefficients(|beta, c| c * self.lambda(beta)),
        ))
    }

    /// `u(x)/((1+x^s)(1+x^{-τ}))` on a coarse log grid over `[1e-8, 1e8]`.
    fn features(&self, state: &State) -> Result<Vec<Complex64>> {
        let u = self.monomials(state)?;
        let (s, tau) = (self.space.s, self.space.tau_y);
        let ln10 = std::f64::consts::LN_10;
        let n = 16 * FEATURE_POINTS_PER_DECADE;
        Ok((0..=n)
            .map(|k| {
                let ln_x = (-8.0 + k as f64 / FEATURE_POINTS_PER_DECADE as f64) * ln10;
                let ln_den = (s * ln_x).exp().ln_1p() + (-tau * ln_x).exp().ln_1p();
                u.terms()
                    .iter()
                    .map(|(beta, c)| c * (beta * ln_x - ln_den).exp())
                    .sum()
            })
            .collect())
    }

    fn as_black_scholes(&self) -> Option<&BlackScholesSemigroup> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn engine() -> BlackScholesSemigroup {
        BlackScholesSemigroup::new(0.4, 0.05).unwrap()
    }

    #[test]
    fn derived_constants() {
        let e = engine();
        assert!((e.nu() - 0.4 / 2f64.sqrt()).abs() < 1e-15);
        assert!((e.gamma() - (0.05 / e.nu() - e.nu())).abs() < 1e-15);
    }

    #[test]
    fn factored_lambda_matches_quadratic() {
        let e = engine();
        let nu = e.nu();
        for beta in [c(0.3), Complex64::new(1.7, -2.0), c(-0.5)] {
            let direct = nu * nu * beta * beta + e.gamma() * nu * beta - e.r();
            assert!((direct - e.lambda(beta)).norm() < 1e-14);
        }
    }

    #[test]
    fn linear_and_constant_monomials() {
        let e = engine();
        let x1 = MonomialCombo::monomial(c(1.0), c(1.0));
        let x0 = MonomialCombo::monomial(c(0.0), c(1.0));
        for t in [0.5, 1.0, 5.0] {
            assert_eq!(e.apply_monomials(t, &x1).unwrap(), x1);
            let k = e.apply_monomials(t, &x0).unwrap().coefficient(c(0.0)).unwrap();
            assert!((k - c((-0.05 * t).exp())).norm() < 1e-12);
        }
    }

    #[test]
    fn imaginary_eigen_roots() {
        let e = engine();
        for theta in [0.5, 1.0, 1.5] {
            let roots = e.imaginary_eigen_exponents(theta);
            assert!(!roots.is_empty());
            for beta in roots {
                assert!((e.lambda(beta) - Complex64::new(0.0, theta)).norm() < 1e-12);
                let q = State::Monomials(MonomialCombo::monomial(beta, c(1.0)));
                let back = e.apply(2.0 * std::f64::consts::PI / theta, &q).unwrap();
                assert!(e.distance(&back, &q).unwrap() < 1e-8);
            }
        }
    }
}
