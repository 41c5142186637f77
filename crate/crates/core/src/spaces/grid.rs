use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a sampled function continues beyond its nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Extension {
    /// `f(x) = 0` for `x > x_max`.
    Zero,
    /// `f(x) = f(x mod period)`; the period is a multiple of the step.
    Periodic { period: f64 },
}

/// Returns `k` when `t` is within `1e-9` (relative) of `k·step`.
pub fn grid_index(t: f64, step: f64) -> Option<usize> {
    if !(t >= 0.0) || !t.is_finite() {
        return None;
    }
    let k = (t / step).round();
    if (k * step - t).abs() <= 1e-9 * t.abs().max(1.0) {
        Some(k as usize)
    } else {
        None
    }
}

/// A function on `[0, ∞)` sampled at `0, h, 2h, …, x_max`, evaluated between
/// nodes by linear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    step: f64,
    samples: Vec<Complex64>,
    extension: Extension,
    /// Nodes per period for periodic functions.
    period_nodes: Option<usize>,
}

impl GridFunction {
    pub fn new(step: f64, samples: Vec<Complex64>, extension: Extension) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        if samples.is_empty() {
            return Err(Error::invalid("grid function needs at least one sample"));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("grid function samples must be finite"));
        }
        let x_max = (samples.len() - 1) as f64 * step;
        let period_nodes = match extension {
            Extension::Zero => None,
            Extension::Periodic { period } => {
                let m = grid_index(period, step).filter(|&m| m > 0).ok_or_else(|| {
                    Error::invalid(format!(
                        "period {period} must be a positive integer multiple of the step {step}"
                    ))
                })?;
                if period > x_max * (1.0 + 1e-12) {
                    return Err(Error::invalid(format!(
                        "period {period} exceeds the sampled range {x_max}"
                    )));
                }
                Some(m)
            }
        };
        let mut f = GridFunction {
            step,
            samples,
            extension,
            period_nodes,
        };
        if let Some(m) = period_nodes {
            for i in m..f.samples.len() {
                f.samples[i] = f.samples[i % m];
            }
        }
        Ok(f)
    }

    /// Zero-extended function from its samples.
    pub fn zero_extended(step: f64, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(step, samples, Extension::Zero)
    }

    pub fn from_real(step: f64, samples: &[f64], extension: Extension) -> Result<Self> {
        Self::new(
            step,
            samples.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
            extension,
        )
    }

    /// Periodic function from the samples of one period `[0, P)`.
    pub fn periodic(step: f64, one_period: Vec<Complex64>) -> Result<Self> {
        let m = one_period.len();
        let mut samples = one_period;
        if m == 0 {
            return Err(Error::invalid("periodic function needs at least one sample"));
        }
        samples.push(samples[0]);
        Self::new(
            step,
            samples,
            Extension::Periodic {
                period: m as f64 * step,
            },
        )
    }

    /// Samples `g` on `[0, x_max]`.
    pub fn from_fn(
        step: f64,
        x_max: f64,
        extension: Extension,
        g: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let n = grid_index(x_max, step).ok_or_else(|| {
            Error::invalid(format!("x_max {x_max} is not a multiple of the step {step}"))
        })?;
        let samples = (0..=n).map(|i| g(i as f64 * step)).collect();
        Self::new(step, samples, extension)
    }

    pub fn zero(step: f64, x_max: f64) -> Result<Self> {
        Self::from_fn(step, x_max, Extension::Zero, |_| Complex64::new(0.0, 0.0))
    }

    /// Hat function on `[0, 2·half_width]` peaking at `height` (Zero extension).
    pub fn tent(step: f64, half_width: f64, height: f64) -> Result<Self> {
        Self::from_fn(step, 2.0 * half_width, Extension::Zero, |x| {
            Complex64::new(height * (1.0 - (x - half_width).abs() / half_width).max(0.0), 0.0)
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn x_max(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.step
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn period_nodes(&self) -> Option<usize> {
        self.period_nodes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|z| z.im == 0.0)
    }

    /// Value at node `i`, following the extension for `i` beyond the samples.
    #[inline]
    pub fn node(&self, i: usize) -> Complex64 {
        match self.period_nodes {
            Some(m) => self.samples[i % m],
            None => self.samples.get(i).copied().unwrap_or_default(),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let x = x.max(0.0);
        if self.period_nodes.is_none() && x > self.x_max() {
            return Complex64::default();
        }
        let pos = x / self.step;
        let i = pos.floor();
        let frac = pos - i;
        let i = i as usize;
        if frac == 0.0 {
            return self.node(i);
        }
        self.node(i) * (1.0 - frac) + self.node(i + 1) * frac
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|Δsample|/h`. For Zero extension the drop to zero after the
    /// last node counts as one more step.
    pub fn max_slope(&self) -> f64 {
        let inner = self
            .samples
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .fold(0.0, f64::max);
        let edge = match self.extension {
            Extension::Zero => self.samples.last().map_or(0.0, |z| z.norm()),
            Extension::Periodic { .. } => 0.0,
        };
        inner.max(edge) / self.step
    }

    pub fn map(&self, g: impl Fn(Complex64) -> Complex64) -> GridFunction {
        GridFunction {
            samples: self.samples.iter().map(|&z| g(z)).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, alpha: Complex64) -> GridFunction {
        self.map(|z| z * alpha)
    }

    fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.step != other.step
            || self.samples.len() != other.samples.len()
            || self.extension != other.extension
        {
            return Err(Error::GridMismatch(format!(
                "step {} / {} nodes / {:?} vs step {} / {} nodes / {:?}",
                self.step,
                self.samples.len(),
                self.extension,
                other.step,
                other.samples.len(),
                other.extension
            )));
        }
        Ok(())
    }

    /// `alpha·self + other` for functions on the same grid with the same extension.
    pub fn axpy(&self, alpha: Complex64, other: &GridFunction) -> Result<GridFunction> {
        self.same_shape(other)?;
        Ok(GridFunction {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| alpha * a + b)
                .collect(),
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_samples_are_normalised() {
        let f = GridFunction::from_real(
            0.5,
            &[1.0, 2.0, 3.0, 9.0, 9.0],
            Extension::Periodic { period: 1.0 },
        )
        .unwrap();
        assert_eq!(f.samples()[2], Complex64::new(1.0, 0.0));
        assert_eq!(f.samples()[3], Complex64::new(2.0, 0.0));
        assert_eq!(f.eval(10.25), Complex64::new(1.5, 0.0));
    }

    #[test]
    fn period_must_be_grid_multiple() {
        let err = GridFunction::from_real(
            0.1,
            &[0.0; 20],
            Extension::Periodic { period: 0.25 },
        );
        assert!(err.is_err());
    }

    #[test]
    fn zero_extension_vanishes_beyond_x_max() {
        let f = GridFunction::from_real(1.0, &[1.0, 1.0], Extension::Zero).unwrap();
        assert_eq!(f.eval(1.0), Complex64::new(1.0, 0.0));
        assert_eq!(f.eval(1.0 + 1e-9), Complex64::default());
    }

    #[test]
    fn nonfinite_samples_rejected() {
        assert!(GridFunction::from_real(1.0, &[f64::NAN], Extension::Zero).is_err());
    }

    #[test]
    fn tent_slope_and_sup() {
        let t = GridFunction::tent(0.01, 1.0, 1.0).unwrap();
        assert!((t.sup_norm() - 1.0).abs() < 1e-12);
        assert!((t.max_slope() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_extension_edge_counts_in_slope() {
        let f = GridFunction::from_real(0.5, &[0.0, 1.0], Extension::Zero).unwrap();
        assert_eq!(f.max_slope(), 2.0);
    }

    #[test]
    fn grid_index_tolerates_rounding() {
        assert_eq!(grid_index(0.3, 0.1), Some(3));
        assert_eq!(grid_index(0.35, 0.1), None);
        assert_eq!(grid_index(-1.0, 0.1), None);
    }
}
