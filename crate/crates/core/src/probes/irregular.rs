use rayon::prelude::*;
use serde::Serialize;

use super::density::{density_estimate, DensityEstimate, Indicator, DEFAULT_TAIL_FRACTION};
use crate::error::{Error, Result};
use crate::spaces::{lp_v_norm, GridFunction, Shifted, TailIntegral, WeightFunction};

/// Knobs of the block construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IrregularParams {
    /// Segment `j` has length `T_j·growth^{j+1}`.
    pub growth: f64,
    /// First segment boundary `T_0`.
    pub first_boundary: f64,
    /// Grid step of the constructed function.
    pub step: f64,
    /// Spacing of the scanned times `s`; a multiple of `step`.
    pub scan_step: f64,
}

impl Default for IrregularParams {
    fn default() -> Self {
        IrregularParams {
            growth: 4.0,
            first_boundary: 2.0,
            step: 0.5,
            scan_step: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSample {
    pub s: f64,
    /// Quadrature value of `‖T_s f‖`.
    pub estimate: f64,
    /// Quadrature value plus the omitted tail mass.
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrregularVector {
    pub f: GridFunction,
    pub height: f64,
    /// `T_0 < T_1 < …`; `f = height` on `[T_j, T_{j+1}]` for even `j`, zero otherwise.
    pub boundaries: Vec<f64>,
    pub epsilon: f64,
    pub norms: Vec<NormSample>,
    /// Times with `‖T_s f‖ ≥ 1/ε`.
    pub big: DensityEstimate,
    /// Times with `‖T_s f‖ < ε`.
    pub small: DensityEstimate,
}

impl IrregularVector {
    /// The two density estimates for another threshold on the same orbit.
    pub fn densities_at(&self, epsilon: f64) -> Result<(DensityEstimate, DensityEstimate)> {
        threshold_densities(&self.norms, epsilon, self.big.horizon, self.big.step)
    }
}

fn threshold_densities(
    norms: &[NormSample],
    epsilon: f64,
    horizon: f64,
    step: f64,
) -> Result<(DensityEstimate, DensityEstimate)> {
    let big: Vec<bool> = norms.iter().map(|n| n.estimate >= 1.0 / epsilon).collect();
    let small: Vec<bool> = norms.iter().map(|n| n.upper < epsilon).collect();
    Ok((
        density_estimate(&Indicator::Series { step, hits: big }, horizon, step, DEFAULT_TAIL_FRACTION)?,
        density_estimate(&Indicator::Series { step, hits: small }, horizon, step, DEFAULT_TAIL_FRACTION)?,
    ))
}

/// A vector whose orbit norm is `≥ 1/ε` and `< ε` on sets of large upper density.
///
/// Plateaus of height `H` alternate with zero stretches, the segment lengths
/// growing by `growth^{j+1}` times the elapsed time, so each new segment
/// dominates everything before it. `H` makes `‖T_s f‖ ≥ 2/ε` whenever a unit
/// of plateau faces the origin.
pub fn irregular_vector(
    v: &WeightFunction,
    p: f64,
    epsilon: f64,
    horizon: f64,
    params: IrregularParams,
) -> Result<IrregularVector> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must be in (0, 1), got {epsilon}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) || !(p >= 1.0) {
        return Err(Error::invalid(format!("need horizon > 0 and p >= 1, got {horizon}, {p}")));
    }
    if !(params.growth > 1.0 && params.first_boundary > 0.0 && params.step > 0.0 && params.scan_step > 0.0) {
        return Err(Error::invalid(format!("invalid construction parameters {params:?}")));
    }
    let stride = crate::spaces::grid_index(params.scan_step, params.step)
        .filter(|&k| k > 0)
        .ok_or_else(|| Error::invalid("scan_step must be a multiple of step"))?;
    let total = match v.tail_integral(0.0)? {
        TailIntegral::Finite(t) => t,
        TailIntegral::Divergent => return Err(Error::NoFiniteGap),
        TailIntegral::Inconclusive { partial } => return Err(Error::TailInconclusive { partial }),
    };
    let rest = v.tail_integral(1.0)?.finite().unwrap_or(0.0);
    let unit_mass = total - rest;
    if !(unit_mass > 0.0) {
        return Err(Error::invalid("the weight has no mass on [0, 1]"));
    }
    let height = 2.0 / epsilon / unit_mass.powf(1.0 / p);

    let h = params.step;
    let reach = v.negligible_cut().unwrap_or(horizon).min(horizon);
    let end = horizon + reach;
    let snap = |x: f64| (x / h).round() * h;
    let mut boundaries = vec![snap(params.first_boundary)];
    let mut j = 0i32;
    while *boundaries.last().unwrap() <= end {
        let t = *boundaries.last().unwrap();
        boundaries.push(snap(t * (1.0 + params.growth.powi(j + 1))));
        j += 1;
    }
    let f = GridFunction::from_fn(h, snap(end) + h, crate::spaces::Extension::Zero, |x| {
        let seg = boundaries.iter().rposition(|&b| b <= x);
        let on = matches!(seg, Some(k) if k % 2 == 0);
        num_complex::Complex64::new(if on { height } else { 0.0 }, 0.0)
    })?;

    let count = (horizon / params.scan_step).floor() as usize + 1;
    let norms: Vec<NormSample> = (0..count)
        .into_par_iter()
        .map(|k| {
            let n = lp_v_norm(&Shifted::new(&f, k * stride), v, p)?;
            let fin = n.finite().ok_or(Error::NoFiniteGap)?;
            Ok(NormSample {
                s: k as f64 * params.scan_step,
                estimate: fin.estimate,
                upper: fin.upper(),
            })
        })
        .collect::<Result<_>>()?;
    let (big, small) = threshold_densities(&norms, epsilon, horizon, params.scan_step)?;
    Ok(IrregularVector {
        f,
        height,
        boundaries,
        epsilon,
        norms,
        big,
        small,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_densities_high_for_exp_decay() {
        let v = WeightFunction::exp_decay(1.0).unwrap();
        let r = irregular_vector(&v, 1.0, 0.1, 1e4, IrregularParams::default()).unwrap();
        assert!(r.big.upper >= 0.9, "{}", r.big.upper);
        assert!(r.small.upper >= 0.9, "{}", r.small.upper);
        assert!(r.f.sup_norm() > 0.0);
    }

    #[test]
    fn smaller_epsilon_never_raises_big_density() {
        let v = WeightFunction::exp_decay(1.0).unwrap();
        let r = irregular_vector(&v, 1.0, 0.1, 2e3, IrregularParams::default()).unwrap();
        let (big, _) = r.densities_at(0.05).unwrap();
        assert!(big.upper <= r.big.upper);
        for (a, b) in big.ratios.iter().zip(&r.big.ratios) {
            assert!(a.1 <= b.1);
        }
    }

    #[test]
    fn divergent_weight_is_refused() {
        let v = WeightFunction::constant(1.0).unwrap();
        assert!(matches!(
            irregular_vector(&v, 1.0, 0.1, 100.0, IrregularParams::default()),
            Err(Error::NoFiniteGap)
        ));
    }
}
