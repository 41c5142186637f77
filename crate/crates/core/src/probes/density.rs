use serde::Serialize;

use crate::error::{Error, Result};

/// Ratio between consecutive times of the density scan.
pub const GEOMETRIC_RATIO_LOG2: f64 = 1.0 / 16.0;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// The tail window must span at least this factor in `t` to be trusted.
const CONFIDENT_TAIL_SPAN: f64 = 16.0;

/// A set of times `B ⊂ [0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Indicator {
    /// Union of closed intervals; `b` may be `+∞`.
    Intervals(Vec<(f64, f64)>),
    /// `hits[i]` says whether `[i·step, (i+1)·step)` belongs to `B`.
    Series { step: f64, hits: Vec<bool> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub horizon: f64,
    pub step: f64,
    /// `(t, μ(B ∩ [0, t])/t)` on a geometric grid ending at the horizon.
    pub ratios: Vec<(f64, f64)>,
    /// Max of the tail ratios (limsup surrogate).
    pub upper: f64,
    /// Min of the tail ratios (liminf surrogate).
    pub lower: f64,
    pub tail_fraction: f64,
    /// The tail window covers less than a factor 16 in `t`.
    pub low_confidence: bool,
}

impl DensityEstimate {
    pub fn value(&self, mode: DensityMode) -> f64 {
        match mode {
            DensityMode::Upper => self.upper,
            DensityMode::Lower => self.lower,
        }
    }
}

impl Indicator {
    /// `μ(B ∩ [0, t])` for many increasing `t`.
    fn measures(&self, ts: &[f64]) -> Vec<f64> {
        match self {
            Indicator::Intervals(iv) => {
                let merged = merge(iv);
                ts.iter()
                    .map(|&t| {
                        merged
                            .iter()
                            .map(|&(a, b)| (b.min(t) - a.max(0.0)).max(0.0))
                            .sum()
                    })
                    .collect()
            }
            Indicator::Series { step, hits } => {
                let mut prefix = Vec::with_capacity(hits.len() + 1);
                prefix.push(0usize);
                for &h in hits {
                    prefix.push(prefix.last().unwrap() + h as usize);
                }
                ts.iter()
                    .map(|&t| {
                        let pos = t / step;
                        let k = (pos.floor() as usize).min(hits.len());
                        let full = prefix[k] as f64 * step;
                        let part = if k < hits.len() && hits[k] { (pos - k as f64) * step } else { 0.0 };
                        full + part
                    })
                    .collect()
            }
        }
    }
}

fn merge(iv: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = iv.iter().copied().filter(|(a, b)| b > a).collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Upper and lower density surrogates of `B`.
///
/// Ratios are taken at `t = horizon·2^{-j/16}` down to `step`; `upper` and
/// `lower` are the max and min over the largest `tail_fraction` of them.
pub fn density_estimate(ind: &Indicator, horizon: f64, step: f64, tail_fraction: f64) -> Result<DensityEstimate> {
    if !(horizon > 0.0 && horizon.is_finite()) || !(step > 0.0 && step <= horizon) {
        return Err(Error::invalid(format!(
            "need 0 < step <= horizon, got step {step}, horizon {horizon}"
        )));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::invalid(format!("tail fraction must be in (0, 1], got {tail_fraction}")));
    }
    let count = ((horizon / step).log2() / GEOMETRIC_RATIO_LOG2).floor() as usize + 1;
    let ts: Vec<f64> = (0..count)
        .rev()
        .map(|j| horizon * (-(j as f64) * GEOMETRIC_RATIO_LOG2).exp2())
        .collect();
    let mus = ind.measures(&ts);
    let ratios: Vec<(f64, f64)> = ts
        .iter()
        .zip(&mus)
        .map(|(&t, &m)| (t, (m / t).clamp(0.0, 1.0)))
        .collect();
    let n_tail = ((ratios.len() as f64 * tail_fraction).ceil() as usize).clamp(1, ratios.len());
    let tail = &ratios[ratios.len() - n_tail..];
    let upper = tail.iter().map(|r| r.1).fold(0.0, f64::max);
    let lower = tail.iter().map(|r| r.1).fold(1.0, f64::min);
    Ok(DensityEstimate {
        horizon,
        step,
        upper,
        lower,
        tail_fraction,
        low_confidence: horizon / tail[0].0 < CONFIDENT_TAIL_SPAN,
        ratios,
    })
}

/// `∪_k [4^k, 2·4^k]` up to `horizon`, the standard set with upper density
/// 2/3 and lower density 1/3.
pub fn dyadic_union(horizon: f64) -> Indicator {
    let mut iv = Vec::new();
    let mut a = 1.0;
    while a <= horizon {
        iv.push((a, 2.0 * a));
        a *= 4.0;
    }
    Indicator::Intervals(iv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_line_and_empty_set() {
        let all = density_estimate(&Indicator::Intervals(vec![(0.0, f64::INFINITY)]), 1e3, 1.0, 0.5).unwrap();
        assert_eq!((all.upper, all.lower), (1.0, 1.0));
        let none = density_estimate(&Indicator::Intervals(vec![]), 1e3, 1.0, 0.5).unwrap();
        assert_eq!((none.upper, none.lower), (0.0, 0.0));
    }

    #[test]
    fn dyadic_union_densities() {
        let h = 4f64.powi(10);
        let d = density_estimate(&dyadic_union(h), h, 1.0, 0.5).unwrap();
        assert!((d.upper - 2.0 / 3.0).abs() < 0.05, "{}", d.upper);
        assert!((d.lower - 1.0 / 3.0).abs() < 0.05, "{}", d.lower);
        assert!(!d.low_confidence);
    }

    #[test]
    fn series_and_intervals_agree() {
        let step = 0.5;
        let iv = vec![(1.0, 3.0), (2.5, 4.0), (10.0, 30.5)];
        let hits: Vec<bool> = (0..200)
            .map(|i| {
                let t = i as f64 * step;
                iv.iter().any(|&(a, b)| t >= a && t < b)
            })
            .collect();
        let a = density_estimate(&Indicator::Intervals(iv), 100.0, step, 0.5).unwrap();
        let b = density_estimate(&Indicator::Series { step, hits }, 100.0, step, 0.5).unwrap();
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            assert!((x.1 - y.1).abs() < step / x.0 + 1e-12);
        }
    }

    #[test]
    fn exact_interval_measure() {
        let m = Indicator::Intervals(vec![(0.5, 1.5), (1.0, 2.0), (5.0, 6.0)]).measures(&[1.0, 2.0, 5.5, 10.0]);
        assert_eq!(m, vec![0.5, 1.5, 2.0, 2.5]);
    }

    #[test]
    fn short_horizon_is_flagged() {
        let d = density_estimate(&Indicator::Intervals(vec![(0.0, 1.0)]), 4.0, 1.0, 0.5).unwrap();
        assert!(d.low_confidence);
    }
}
