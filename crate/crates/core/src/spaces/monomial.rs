use num_complex::Complex64;

use crate::error::{Error, Result};

/// Finite combination `Σ c_k x^{β_k}` on `x > 0` with pairwise distinct exponents.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MonomialCombo {
    terms: Vec<(Complex64, Complex64)>,
}

impl MonomialCombo {
    /// Terms are `(β, c)` pairs.
    pub fn new(terms: Vec<(Complex64, Complex64)>) -> Result<Self> {
        for (i, (beta, c)) in terms.iter().enumerate() {
            if ![beta.re, beta.im, c.re, c.im].iter().all(|v| v.is_finite()) {
                return Err(Error::invalid("monomial exponents and coefficients must be finite"));
            }
            if terms[..i].iter().any(|(b, _)| b == beta) {
                return Err(Error::invalid(format!("repeated exponent {beta}")));
            }
        }
        Ok(MonomialCombo { terms })
    }

    pub fn monomial(beta: Complex64, coeff: Complex64) -> Self {
        MonomialCombo {
            terms: vec![(beta, coeff)],
        }
    }

    pub fn terms(&self) -> &[(Complex64, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| *c == Complex64::default())
    }

    pub fn coefficient(&self, beta: Complex64) -> Option<Complex64> {
        self.terms.iter().find(|(b, _)| *b == beta).map(|(_, c)| *c)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let l = x.ln();
        self.terms.iter().map(|(b, c)| c * (b * l).exp()).sum()
    }

    /// `ln |u(x)|` computed without forming the individual powers.
    pub fn ln_abs(&self, ln_x: f64) -> f64 {
        let parts: Vec<(f64, f64)> = self
            .terms
            .iter()
            .filter(|(_, c)| *c != Complex64::default())
            .map(|(b, c)| (c.norm().ln() + b.re * ln_x, c.arg() + b.im * ln_x))
            .collect();
        let Some(lmax) = parts.iter().map(|p| p.0).reduce(f64::max) else {
            return f64::NEG_INFINITY;
        };
        let s: Complex64 = parts
            .iter()
            .map(|&(l, phi)| Complex64::from_polar((l - lmax).exp(), phi))
            .sum();
        lmax + s.norm().ln()
    }

    pub fn map_coefficients(&self, g: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        MonomialCombo {
            terms: self.terms.iter().map(|&(b, c)| (b, g(b, c))).collect(),
        }
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        self.map_coefficients(|_, c| c * alpha)
    }

    /// `alpha·self + other`, merging equal exponents.
    pub fn axpy(&self, alpha: Complex64, other: &MonomialCombo) -> MonomialCombo {
        let mut terms: Vec<(Complex64, Complex64)> =
            self.terms.iter().map(|&(b, c)| (b, alpha * c)).collect();
        for &(b, c) in &other.terms {
            match terms.iter_mut().find(|(e, _)| *e == b) {
                Some(slot) => slot.1 += c,
                None => terms.push((b, c)),
            }
        }
        MonomialCombo { terms }
    }
}
