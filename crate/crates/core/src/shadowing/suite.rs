use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{construct_with_step, random_spec, verify_shadowing, RandomSpecParams};
use crate::error::Result;
use crate::spaces::WeightFunction;

/// Draw ranges of a seeded shadowing suite. Case `k` uses `n = n_values[k % len]`
/// and `s = s_values[k % len]`; `δ` is uniform in `delta_range`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteParams {
    pub seed: u64,
    pub cases: usize,
    pub n_values: Vec<u32>,
    pub s_values: Vec<usize>,
    pub delta_range: (f64, f64),
    pub p: f64,
    pub step: f64,
    pub t_step: f64,
}

impl SuiteParams {
    pub fn new(seed: u64, cases: usize) -> Self {
        SuiteParams {
            seed,
            cases,
            n_values: vec![1, 2, 3],
            s_values: vec![2, 3, 4, 5],
            delta_range: (0.1, 1.0),
            p: 1.0,
            step: 0.01,
            t_step: super::DEFAULT_T_STEP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteCase {
    pub case: usize,
    pub n: u32,
    pub s: usize,
    pub delta: f64,
    pub period: f64,
    pub gap: f64,
    pub required_gap: f64,
    pub max_error: f64,
    pub period_residual: f64,
    pub in_class: bool,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Draws every spec from one seeded stream, then builds and verifies the
/// certificates in parallel.
pub fn shadowing_suite(params: &SuiteParams, v: &WeightFunction) -> Result<Vec<SuiteCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let specs = (0..params.cases)
        .map(|k| {
            let n = params.n_values[k % params.n_values.len()];
            let s = params.s_values[k % params.s_values.len()];
            let (lo, hi) = params.delta_range;
            let delta = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            let mut rp = RandomSpecParams::new(n, s, delta);
            rp.p = params.p;
            rp.step = params.step;
            random_spec(&mut rng, &rp, v)
        })
        .collect::<Result<Vec<_>>>()?;
    specs
        .par_iter()
        .enumerate()
        .map(|(case, spec)| {
            let cert = construct_with_step(spec, params.t_step)?;
            let r = verify_shadowing(&cert, spec, params.t_step)?;
            Ok(SuiteCase {
                case,
                n: spec.n,
                s: spec.pieces.len(),
                delta: spec.delta,
                period: cert.period,
                gap: cert.gap,
                required_gap: cert.required_gap,
                max_error: r.pieces.iter().map(|p| p.max_error).fold(0.0, f64::max),
                period_residual: r.period_residual,
                in_class: r.class_check.member,
                pass: r.pass,
                failures: r.failures,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_reproducible() {
        let v = WeightFunction::exp_decay(1.0).unwrap();
        let p = SuiteParams::new(5, 6);
        let a = shadowing_suite(&p, &v).unwrap();
        assert!(a.iter().all(|c| c.pass), "{a:#?}");
        assert_eq!(a, shadowing_suite(&p, &v).unwrap());
    }
}
