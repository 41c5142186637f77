use num_complex::Complex64;

use crate::error::{Error, Result};

/// Truncated element `(Σ a_n ρ^n x^n/n!, Σ b_n ρ^n x^n/n!)` of `X_ρ ⊕ X_ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPair {
    rho: f64,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl CoefficientPair {
    pub fn new(rho: f64, a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::invalid(format!(
                "coefficient sequences must be non-empty and of equal length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(CoefficientPair { rho, a, b })
    }

    pub fn zeros(rho: f64, n_trunc: usize) -> Result<Self> {
        let z = vec![Complex64::default(); n_trunc + 1];
        Self::new(rho, z.clone(), z)
    }

    /// Builds both components from coefficient generators.
    pub fn from_fn(
        rho: f64,
        n_trunc: usize,
        a: impl Fn(usize) -> Complex64,
        b: impl Fn(usize) -> Complex64,
    ) -> Result<Self> {
        Self::new(
            rho,
            (0..=n_trunc).map(a).collect(),
            (0..=n_trunc).map(b).collect(),
        )
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n_trunc(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    /// Keeps coefficients `0..=n`, padding with zeros.
    pub fn truncated(&self, n: usize) -> CoefficientPair {
        let fit = |v: &[Complex64]| {
            let mut out: Vec<Complex64> = v.iter().take(n + 1).copied().collect();
            out.resize(n + 1, Complex64::default());
            out
        };
        CoefficientPair {
            rho: self.rho,
            a: fit(&self.a),
            b: fit(&self.b),
        }
    }

    pub fn scale(&self, alpha: Complex64) -> CoefficientPair {
        CoefficientPair {
            rho: self.rho,
            a: self.a.iter().map(|z| z * alpha).collect(),
            b: self.b.iter().map(|z| z * alpha).collect(),
        }
    }

    /// `alpha·self + other`; the shorter operand is zero-padded.
    pub fn axpy(&self, alpha: Complex64, other: &CoefficientPair) -> Result<CoefficientPair> {
        if self.rho != other.rho {
            return Err(Error::invalid(format!(
                "cannot combine X_rho elements with rho {} and {}",
                self.rho, other.rho
            )));
        }
        let n = self.n_trunc().max(other.n_trunc());
        let (x, y) = (self.truncated(n), other.truncated(n));
        let comb = |u: &[Complex64], v: &[Complex64]| {
            u.iter().zip(v).map(|(&p, &q)| alpha * p + q).collect()
        };
        Ok(CoefficientPair {
            rho: self.rho,
            a: comb(&x.a, &y.a),
            b: comb(&x.b, &y.b),
        })
    }

    /// Value of the first component at `x`.
    pub fn eval_first(&self, x: f64) -> Complex64 {
        let mut term = 1.0;
        let mut sum = Complex64::default();
        for (n, c) in self.a.iter().enumerate() {
            if n > 0 {
                term *= self.rho * x / n as f64;
            }
            sum += c * term;
        }
        sum
    }
}
