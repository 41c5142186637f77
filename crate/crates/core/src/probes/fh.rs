use rayon::prelude::*;

use super::density::{density_estimate, DensityEstimate, Indicator, DEFAULT_TAIL_FRACTION};
use crate::error::{Error, Result};
use crate::semigroup::{Semigroup, State};

/// Open ball `B(center, radius)` in the engine's norm; `radius` may be `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: State,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HitScan {
    pub times: Vec<f64>,
    /// `distances[j][k] = ‖T_{t_k} x0 - center_j‖`.
    pub distances: Vec<Vec<f64>>,
    /// Lower-density estimate of the visit times, one per target.
    pub estimates: Vec<DensityEstimate>,
}

/// Visits of the orbit of `x0` to each target at `t = k·step ≤ horizon`.
///
/// Distances are the engines' conservative upper estimates, so a recorded
/// hit is never an artifact of quadrature.
pub fn fh_hit_density(engine: &dyn Semigroup, x0: &State, targets: &[Ball], horizon: f64, step: f64) -> Result<HitScan> {
    if !(horizon > 0.0 && step > 0.0 && step <= horizon) {
        return Err(Error::invalid(format!("need 0 < step <= horizon, got {step}, {horizon}")));
    }
    let count = (horizon / step + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..count).map(|k| k as f64 * step).collect();
    let per_time: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let xt = engine.apply(t, x0)?;
            targets
                .iter()
                .map(|b| if b.radius.is_infinite() { Ok(0.0) } else { engine.distance(&xt, &b.center) })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut distances = vec![Vec::with_capacity(count); targets.len()];
    for row in per_time {
        for (j, d) in row.into_iter().enumerate() {
            distances[j].push(d);
        }
    }
    let estimates = targets
        .iter()
        .zip(&distances)
        .map(|(b, ds)| {
            let hits = ds.iter().map(|&d| d < b.radius).collect();
            density_estimate(&Indicator::Series { step, hits }, horizon, step, DEFAULT_TAIL_FRACTION)
        })
        .collect::<Result<_>>()?;
    Ok(HitScan {
        times,
        distances,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::TranslationSemigroup;
    use crate::spaces::{Extension, GridFunction, WeightFunction};
    use num_complex::Complex64;

    #[test]
    fn unreachable_ball_under_contraction() {
        let e = TranslationSemigroup::new(WeightFunction::constant(1.0).unwrap(), 1.0, 0.01).unwrap();
        let x0 = State::Grid(GridFunction::tent(0.01, 1.0, 1.0).unwrap());
        let g = State::Grid(GridFunction::tent(0.01, 1.0, 1.0).unwrap().scale(Complex64::new(3.0, 0.0)));
        let r = fh_hit_density(&e, &x0, &[Ball { center: g, radius: 0.1 }], 50.0, 0.1).unwrap();
        assert_eq!(r.estimates[0].lower, 0.0);
        assert_eq!(r.estimates[0].upper, 0.0);
    }

    #[test]
    fn whole_space_is_always_hit() {
        let e = TranslationSemigroup::new(WeightFunction::exp_decay(1.0).unwrap(), 1.0, 0.01).unwrap();
        let x0 = State::Grid(GridFunction::tent(0.01, 1.0, 1.0).unwrap());
        let r = fh_hit_density(&e, &x0, &[Ball { center: x0.clone(), radius: f64::INFINITY }], 20.0, 0.1).unwrap();
        assert!((r.estimates[0].lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_orbit_returns_with_positive_density() {
        let e = TranslationSemigroup::new(WeightFunction::exp_decay(1.0).unwrap(), 1.0, 0.01).unwrap();
        let tent = GridFunction::tent(0.01, 1.0, 1.0).unwrap();
        let mut one = tent.samples().to_vec();
        one.resize(500, Complex64::default());
        let x0 = GridFunction::periodic(0.01, one).unwrap();
        assert_eq!(x0.extension(), Extension::Periodic { period: 5.0 });
        let x0 = State::Grid(x0);
        let r = fh_hit_density(&e, &x0, &[Ball { center: x0.clone(), radius: 0.1 }], 200.0, 0.05).unwrap();
        assert!(r.estimates[0].lower > 0.0, "{:?}", r.estimates[0].lower);
    }
}
