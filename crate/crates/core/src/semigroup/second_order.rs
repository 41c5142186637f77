use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{check_time, expm, EngineKind, Evolved, Semigroup, State};
use crate::error::{Error, Result};
use crate::spaces::{x_rho_norm, CoefficientPair};

/// Number of trailing stored coefficients whose influence on the result
/// serves as the truncation estimate.
pub const TRUNCATION_PROBE_EXTRA: usize = 10;

/// Second-order system `u' = v, v' = c·u'' + e·v` on `X_ρ ⊕ X_ρ`.
///
/// With a relaxation time `τ` this is the hyperbolic heat equation
/// (`c = α/τ`, `e = -1/τ`); without one it is the wave equation (`c = α`,
/// `e = 0`). On coefficients `d²/dx²` is the shift `a_n ↦ ρ² a_{n+2}`.
#[derive(Clone, Debug)]
pub struct SecondOrderSemigroup {
    alpha: f64,
    tau: Option<f64>,
    rho: f64,
    n_trunc: usize,
    tol: f64,
}

impl SecondOrderSemigroup {
    pub fn new(alpha: f64, tau: Option<f64>, rho: f64, n_trunc: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(format!("alpha and rho must be positive, got {alpha}, {rho}")));
        }
        if let Some(t) = tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("tau must be positive, got {t}")));
            }
        }
        if n_trunc < 2 {
            return Err(Error::invalid("n_trunc must be at least 2"));
        }
        Ok(SecondOrderSemigroup {
            alpha,
            tau,
            rho,
            n_trunc,
            tol: 1e-8,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_n_trunc(mut self, n_trunc: usize) -> Result<Self> {
        if n_trunc < 2 {
            return Err(Error::invalid("n_trunc must be at least 2"));
        }
        self.n_trunc = n_trunc;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `(c, e)` in `v' = c·u'' + e·v`.
    pub fn coefficients(&self) -> (f64, f64) {
        match self.tau {
            Some(t) => (self.alpha / t, -1.0 / t),
            None => (self.alpha, 0.0),
        }
    }

    fn check_rho(&self, u: &CoefficientPair) -> Result<()> {
        if u.rho() != self.rho {
            return Err(Error::invalid(format!(
                "state has rho = {}, engine has rho = {}",
                u.rho(),
                self.rho
            )));
        }
        Ok(())
    }

    /// `(b, c·D²a + e·b)` on the state's own truncation.
    pub fn apply_generator(&self, u: &CoefficientPair) -> Result<CoefficientPair> {
        self.check_rho(u)?;
        let (c, e) = self.coefficients();
        let r2 = self.rho * self.rho;
        let a = u.a();
        let b = u.b();
        let nb: Vec<Complex64> = (0..b.len())
            .map(|n| c * r2 * a.get(n + 2).copied().unwrap_or_default() + e * b[n])
            .collect();
        CoefficientPair::new(self.rho, b.to_vec(), nb)
    }

    /// Finite section of the generator on coefficients `0..=w`, ordered
    /// `[a_0..a_w, b_0..b_w]`.
    pub fn finite_section(&self, w: usize) -> DMatrix<f64> {
        let (c, e) = self.coefficients();
        let m = w + 1;
        let mut a = DMatrix::zeros(2 * m, 2 * m);
        for n in 0..m {
            a[(n, m + n)] = 1.0;
            if n + 2 < m {
                a[(m + n, n + 2)] = c * self.rho * self.rho;
            }
            a[(m + n, m + n)] = e;
        }
        a
    }

    fn propagate(&self, t: f64, u: &CoefficientPair, w: usize) -> Vec<Complex64> {
        let u = u.truncated(w);
        let e = expm(&(self.finite_section(w) * t));
        let stack = |f: fn(&Complex64) -> f64| {
            DVector::from_iterator(2 * (w + 1), u.a().iter().chain(u.b()).map(f))
        };
        let re = &e * stack(|z| z.re);
        let im = &e * stack(|z| z.im);
        re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    /// Eigenvector `e^{μx}` (coefficients `(μ/ρ)^n`, second component `λ·a`)
    /// for the eigenvalue `λ`, where `c·μ² = λ² - e·λ`.
    pub fn eigenvector(&self, lambda: Complex64) -> Result<CoefficientPair> {
        let mu = self.eigen_mu(lambda);
        if mu.norm() >= self.rho {
            return Err(Error::invalid(format!(
                "|mu| = {} is not below rho = {}: e^(mu x) is not in X_rho",
                mu.norm(),
                self.rho
            )));
        }
        let q = mu / self.rho;
        let mut a = Vec::with_capacity(self.n_trunc + 1);
        let mut z = Complex64::new(1.0, 0.0);
        for _ in 0..=self.n_trunc {
            a.push(z);
            z *= q;
        }
        let b = a.iter().map(|x| x * lambda).collect();
        CoefficientPair::new(self.rho, a, b)
    }

    /// Principal root `μ` of `c·μ² = λ² - e·λ`.
    pub fn eigen_mu(&self, lambda: Complex64) -> Complex64 {
        let (c, e) = self.coefficients();
        ((lambda * lambda - e * lambda) / c).sqrt()
    }

    fn coeffs<'a>(&self, state: &'a State) -> Result<&'a CoefficientPair> {
        state.as_coefficients().ok_or(Error::StateMismatch {
            engine: "second_order",
            got: state.type_name(),
        })
    }
}

impl Semigroup for SecondOrderSemigroup {
    fn kind(&self) -> EngineKind {
        EngineKind::SecondOrder
    }

    /// `P_N e^{tA_{N+10}} u`, with the sup difference to `e^{tA_N} P_N u` as
    /// the truncation estimate.
    fn evolve(&self, t: f64, state: &State) -> Result<Evolved> {
        check_time(t)?;
        let u = self.coeffs(state)?;
        self.check_rho(u)?;
        if t == 0.0 {
            return Ok(Evolved::exact(state.clone()));
        }
        // The finite section is upper triangular in the index, so dropped
        // coefficients only ever feed lower ones: the effect of the last
        // stored ones estimates the effect of those never stored.
        let n = self.n_trunc;
        let out = self.propagate(t, u, n);
        let keep = n.saturating_sub(TRUNCATION_PROBE_EXTRA.min(n));
        let tail_only = u.truncated(keep).axpy(Complex64::new(-1.0, 0.0), u)?;
        let estimate = self.propagate(t, &tail_only, n).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let a: Vec<Complex64> = out[..=n].to_vec();
        let b: Vec<Complex64> = out[n + 1..].to_vec();
        Ok(Evolved {
            state: State::Coefficients(CoefficientPair::new(self.rho, a, b)?),
            error_estimate: estimate,
            truncation_limited: !(estimate <= self.tol),
        })
    }

    fn distance(&self, a: &State, b: &State) -> Result<f64> {
        let d = self.coeffs(a)?.axpy(Complex64::new(-1.0, 0.0), self.coeffs(b)?)?;
        Ok(x_rho_norm(&d))
    }

    fn norm(&self, a: &State) -> Result<f64> {
        Ok(x_rho_norm(self.coeffs(a)?))
    }

    fn generator(&self, state: &State) -> Result<State> {
        Ok(State::Coefficients(self.apply_generator(self.coeffs(state)?)?))
    }

    /// Both coefficient sequences, zero-padded to the engine's truncation.
    fn features(&self, state: &State) -> Result<Vec<Complex64>> {
        let u = self.coeffs(state)?.truncated(self.n_trunc);
        Ok(u.a().iter().chain(u.b()).copied().collect())
    }

    fn as_second_order(&self) -> Option<&SecondOrderSemigroup> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn hhte() -> SecondOrderSemigroup {
        SecondOrderSemigroup::new(1.0, Some(1.0), 3.0, 60).unwrap()
    }

    fn unit(n: usize, k: usize) -> Vec<Complex64> {
        (0..=n).map(|i| if i == k { c(1.0) } else { c(0.0) }).collect()
    }

    #[test]
    fn generator_examples() {
        let e = SecondOrderSemigroup::new(2.0, Some(0.5), 3.0, 8).unwrap();
        let z = CoefficientPair::zeros(3.0, 8).unwrap();
        assert_eq!(e.apply_generator(&z).unwrap(), z);
        let u = CoefficientPair::new(3.0, unit(8, 2), vec![c(0.0); 9]).unwrap();
        let g = e.apply_generator(&u).unwrap();
        assert!(g.a().iter().all(|z| z.norm() == 0.0));
        assert_eq!(g.b()[0], c(4.0 * 9.0));
        assert!(g.b()[1..].iter().all(|z| z.norm() == 0.0));
        let mut aff = vec![c(0.0); 9];
        aff[0] = c(1.5);
        aff[1] = c(-2.0);
        let u = CoefficientPair::new(3.0, aff, vec![c(0.0); 9]).unwrap();
        let g = e.apply_generator(&u).unwrap();
        assert_eq!(x_rho_norm(&g), 0.0);
    }

    #[test]
    fn affine_states_are_equilibria() {
        let e = hhte();
        let mut aff = vec![c(0.0); 61];
        aff[0] = c(0.7);
        aff[1] = c(2.0);
        let u = State::Coefficients(CoefficientPair::new(3.0, aff, vec![c(0.0); 61]).unwrap());
        for t in [0.1, 1.0, 3.0] {
            assert!(e.distance(&e.apply(t, &u).unwrap(), &u).unwrap() < 1e-12);
        }
    }

    #[test]
    fn composition_at_reference_parameters() {
        let e = hhte();
        let u = State::Coefficients(
            CoefficientPair::from_fn(3.0, 60, |n| c(0.5f64.powi(n as i32)), |n| c((n as f64).cos() * 0.6f64.powi(n as i32)))
                .unwrap(),
        );
        let once = e.evolve(0.5, &u).unwrap();
        let twice = e.apply(0.25, &e.apply(0.25, &u).unwrap()).unwrap();
        assert!(e.distance(&once.state, &twice).unwrap() < 1e-8);
        assert!(!once.truncation_limited);
    }

    #[test]
    fn eigenvector_satisfies_relation() {
        let e = hhte();
        for t in [-1.0, -0.3, 0.0, 0.6, 1.0] {
            let lambda = Complex64::new(0.0, t);
            let f = e.eigenvector(lambda).unwrap();
            let af = e.apply_generator(&f).unwrap();
            let r = x_rho_norm(&f.scale(-lambda).axpy(c(1.0), &af).unwrap());
            assert!(r < 1e-12, "t = {t}: {r}");
        }
    }

    #[test]
    fn wave_eigenvalue_relation() {
        let e = SecondOrderSemigroup::new(1.0, None, 3.0, 30).unwrap();
        let mu = e.eigen_mu(Complex64::new(0.0, 2.0));
        assert!((mu * mu - Complex64::new(-4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_eigenvectors_outside_space() {
        assert!(hhte().eigenvector(Complex64::new(0.0, 20.0)).is_err());
    }

    #[test]
    fn flags_unreachable_tolerance() {
        let e = SecondOrderSemigroup::new(1.0, Some(1.0), 3.0, 4).unwrap().with_tolerance(1e-14);
        let u = State::Coefficients(CoefficientPair::from_fn(3.0, 20, |_| c(1.0), |_| c(0.0)).unwrap());
        let r = e.evolve(1.0, &u).unwrap();
        assert!(r.truncation_limited && r.error_estimate > 1e-14);
    }
}
