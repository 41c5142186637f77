use num_complex::Complex64;

use super::{check_time, EngineKind, Evolved, Semigroup, State};
use crate::error::{Error, Result};
use crate::spaces::{
    admissibility_check, grid_index, lp_v_distance, lp_v_norm, AdmissibilityVerdict, GridFunction,
    WeightFunction,
};

/// Number of sample points in the translation feature embedding.
const FEATURE_POINTS: usize = 2048;
const FEATURE_HORIZON_CAP: f64 = 60.0;

/// `T_t f(x) = f(x + t)` on a sampled function.
///
/// Grid-multiple shifts move node indices and are exact. Other shifts sample
/// the linear interpolant at `x_i + t`.
pub fn translate(f: &GridFunction, t: f64) -> Result<GridFunction> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let h = f.step();
    let samples: Vec<Complex64> = match grid_index(t, h) {
        Some(k) => (0..f.len()).map(|i| f.node(i + k)).collect(),
        None => (0..f.len()).map(|i| f.eval(i as f64 * h + t)).collect(),
    };
    GridFunction::new(h, samples, f.extension())
}

/// Translation semigroup on `L^p_v(ℝ₊)`.
#[derive(Clone, Debug)]
pub struct TranslationSemigroup {
    v: WeightFunction,
    p: f64,
    step: f64,
    m_min: f64,
}

impl TranslationSemigroup {
    /// Checks the declared admissibility constants of `v` on a `[0, 20] × [0, 10]`
    /// grid (clipped to the data of tabulated weights).
    pub fn new(v: WeightFunction, p: f64, step: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        let adm = v.admissible().ok_or_else(|| {
            Error::invalid("the translation engine needs a weight with admissibility constants (M, w)")
        })?;
        let x_end = v.support_end().unwrap_or(20.0).min(20.0);
        let xs: Vec<f64> = (0..=160).map(|i| i as f64 * x_end / 160.0).collect();
        let ts: Vec<f64> = (0..=80).map(|i| i as f64 * 0.125).collect();
        let report = admissibility_check(&v, &xs, &ts, adm.w);
        let m_min = match (report.verdict, report.m_min) {
            (AdmissibilityVerdict::NotAdmissible, _) | (_, None) => {
                return Err(Error::invalid(format!(
                    "weight fails v(x) <= M e^(wt) v(x+t) with w = {} (sampled sups {:?})",
                    adm.w, report.levels
                )))
            }
            (_, Some(m)) => m,
        };
        if m_min > adm.m * (1.0 + 1e-9) {
            return Err(Error::invalid(format!(
                "declared M = {} is below the sampled sup {m_min}",
                adm.m
            )));
        }
        Ok(TranslationSemigroup { v, p, step, m_min })
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.v
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Default grid step for states generated by this engine.
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Sampled `sup v(x)e^{-wt}/v(x+t)` found at construction.
    pub fn m_min(&self) -> f64 {
        self.m_min
    }

    /// `T_t f` plus a sup-norm bound on the resampling error
    /// (`max_slope·h` off the grid, zero on it).
    pub fn translate_with_bound(&self, f: &GridFunction, t: f64) -> Result<(GridFunction, f64)> {
        let g = translate(f, t)?;
        let bound = if t == 0.0 || grid_index(t, f.step()).is_some() {
            0.0
        } else {
            f.max_slope() * f.step()
        };
        Ok((g, bound))
    }

    pub fn grid_norm(&self, f: &GridFunction) -> Result<f64> {
        Ok(lp_v_norm(f, &self.v, self.p)?.upper())
    }

    pub fn grid_distance(&self, f: &GridFunction, g: &GridFunction) -> Result<f64> {
        Ok(lp_v_distance(f, g, &self.v, self.p)?.upper())
    }

    fn grid<'a>(&self, state: &'a State) -> Result<&'a GridFunction> {
        state.as_grid().ok_or(Error::StateMismatch {
            engine: "translation",
            got: state.type_name(),
        })
    }
}

impl Semigroup for TranslationSemigroup {
    fn kind(&self) -> EngineKind {
        EngineKind::Translation
    }

    fn evolve(&self, t: f64, state: &State) -> Result<Evolved> {
        let (g, bound) = self.translate_with_bound(self.grid(state)?, t)?;
        Ok(Evolved {
            state: State::Grid(g),
            error_estimate: bound,
            truncation_limited: false,
        })
    }

    fn distance(&self, a: &State, b: &State) -> Result<f64> {
        self.grid_distance(self.grid(a)?, self.grid(b)?)
    }

    fn norm(&self, a: &State) -> Result<f64> {
        self.grid_norm(self.grid(a)?)
    }

    /// Forward difference `(f(· + h) - f)/h` on the function's own grid.
    fn generator(&self, state: &State) -> Result<State> {
        let f = self.grid(state)?;
        let h = f.step();
        let shifted = translate(f, h)?;
        Ok(State::Grid(f.axpy(Complex64::new(-1.0, 0.0), &shifted)?.scale(Complex64::new(1.0 / h, 0.0))))
    }

    /// `f(x_k)·(v(x_k)Δx)^{1/2}` on a fixed grid up to the weight's negligible cut.
    fn features(&self, state: &State) -> Result<Vec<Complex64>> {
        let f = self.grid(state)?;
        let horizon = self
            .v
            .negligible_cut()
            .unwrap_or(FEATURE_HORIZON_CAP)
            .min(FEATURE_HORIZON_CAP);
        let dx = horizon / (FEATURE_POINTS - 1) as f64;
        Ok((0..FEATURE_POINTS)
            .map(|k| {
                let x = k as f64 * dx;
                f.eval(x) * (self.v.eval(x) * dx).sqrt()
            })
            .collect())
    }

    fn as_translation(&self) -> Option<&TranslationSemigroup> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Admissibility, Extension};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_shift_is_bit_identical() {
        let f = GridFunction::tent(0.01, 1.0, 1.0).unwrap();
        assert_eq!(translate(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn full_period_shift_returns_function() {
        let f = GridFunction::periodic(0.01, (0..300).map(|i| c((i as f64 * 0.01).sin())).collect()).unwrap();
        let g = translate(&f, 3.0).unwrap();
        for (a, b) in f.samples().iter().zip(g.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn tent_shift_is_descending_ramp() {
        let f = GridFunction::tent(0.01, 1.0, 1.0).unwrap();
        let g = translate(&f, 1.0).unwrap();
        for i in 0..g.len() {
            let x = i as f64 * 0.01;
            let want = if x <= 1.0 { 1.0 - x } else { 0.0 };
            assert!((g.samples()[i].re - want).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn off_grid_shift_interpolates() {
        let f = GridFunction::tent(0.5, 1.0, 1.0).unwrap();
        let g = translate(&f, 0.25).unwrap();
        assert!((g.samples()[0].re - 0.25).abs() < 1e-15);
        assert!((g.samples()[1].re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_undeclared_or_false_admissibility() {
        let gauss = WeightFunction::table(
            (0..200).map(|i| i as f64 * 0.05).collect(),
            (0..200).map(|i| (-(i as f64 * 0.05).powi(2)).exp()).collect(),
            false,
        )
        .unwrap();
        assert!(TranslationSemigroup::new(gauss.clone(), 1.0, 0.01).is_err());
        let claimed = gauss.with_admissible(Admissibility { m: 1.0, w: 1.0 }).unwrap();
        assert!(TranslationSemigroup::new(claimed, 1.0, 0.01).is_err());
        let bad_m = WeightFunction::exp_decay(1.0)
            .unwrap()
            .with_admissible(Admissibility { m: 1.0, w: 0.5 })
            .unwrap();
        assert!(TranslationSemigroup::new(bad_m, 1.0, 0.01).is_err());
    }

    #[test]
    fn constant_weight_contracts_zero_extended_functions() {
        let e = TranslationSemigroup::new(WeightFunction::constant(1.0).unwrap(), 1.0, 0.01).unwrap();
        let f = GridFunction::from_fn(0.01, 5.0, Extension::Zero, |x| c((x * 3.0).sin() + 0.2)).unwrap();
        let n0 = e.grid_norm(&f).unwrap();
        for t in [0.37, 1.0, 2.5, 4.99] {
            assert!(e.grid_norm(&translate(&f, t).unwrap()).unwrap() <= n0 + 1e-12);
        }
    }

    #[test]
    fn generator_of_ramp_is_slope() {
        let e = TranslationSemigroup::new(WeightFunction::exp_decay(1.0).unwrap(), 1.0, 0.01).unwrap();
        let f = GridFunction::from_fn(0.01, 2.0, Extension::Zero, |x| c(2.0 * x)).unwrap();
        let State::Grid(g) = e.generator(&State::Grid(f)).unwrap() else { unreachable!() };
        for z in &g.samples()[..g.len() - 1] {
            assert!((z.re - 2.0).abs() < 1e-9);
        }
    }
}
