use num_complex::Complex64;
use rand::Rng;

use super::{required_gap, Piece, ShadowingSpec};
use crate::error::Result;
use crate::spaces::{GridFunction, WeightFunction};

/// A zero-extended member of `K_n` on `[0, length]`: a random walk with
/// increments of at most `0.95·n·h`, clamped to `[-n, n]` and to
/// `n·(length - x)` so that it lands on zero at the end of its support.
pub fn random_kn_function<R: Rng + ?Sized>(rng: &mut R, n: u32, step: f64, length: f64) -> Result<GridFunction> {
    let nf = n as f64;
    let nodes = (length / step).round().max(1.0) as usize;
    let mut samples = Vec::with_capacity(nodes + 1);
    let mut val = rng.gen_range(-nf..=nf);
    for i in 0..=nodes {
        let room = nf * (nodes - i) as f64 * step;
        let cap = nf.min(room);
        if i > 0 {
            val += rng.gen_range(-0.95..=0.95) * nf * step;
        }
        val = val.clamp(-cap, cap);
        samples.push(Complex64::new(val, 0.0));
    }
    GridFunction::zero_extended(step, samples)
}

/// Ranges for [`random_spec`]. Times are drawn on the grid.
#[derive(Clone, Debug)]
pub struct RandomSpecParams {
    pub n: u32,
    pub s: usize,
    pub delta: f64,
    pub p: f64,
    pub step: f64,
    /// Longest piece interval `b_r - a_r`.
    pub max_piece: f64,
    /// Largest extra slack added to the required gap.
    pub max_extra_gap: f64,
    pub t0: f64,
}

impl RandomSpecParams {
    pub fn new(n: u32, s: usize, delta: f64) -> Self {
        RandomSpecParams {
            n,
            s,
            delta,
            p: 1.0,
            step: 0.01,
            max_piece: 2.0,
            max_extra_gap: 3.0,
            t0: 1.0,
        }
    }
}

/// Random pieces in `K_n` whose gaps meet `required_gap`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, params: &RandomSpecParams, v: &WeightFunction) -> Result<ShadowingSpec> {
    let h = params.step;
    let gap = required_gap(params.delta, params.n, v, params.p)?;
    let gap_nodes = (gap.m / h).ceil() as usize + 1;
    let piece_max = (params.max_piece / h).round() as usize;
    let extra_max = (params.max_extra_gap / h).round() as usize;
    let mut pieces = Vec::with_capacity(params.s);
    let mut start = 0usize;
    for _ in 0..params.s {
        let end = start + rng.gen_range(0..=piece_max);
        let len = rng.gen_range(0.5..(end as f64 * h + 3.0));
        pieces.push(Piece {
            y: random_kn_function(rng, params.n, h, len)?,
            a: start as f64 * h,
            b: end as f64 * h,
        });
        start = end + gap_nodes + rng.gen_range(0..=extra_max);
    }
    ShadowingSpec::new(pieces, params.delta, params.n, params.t0, params.p, v.clone())
}

#[cfg(test)]
mod tests {
    use super::super::kn_membership;
    use super::*;
    use crate::semigroup::translate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_functions_are_in_class_and_stay_there() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..100 {
            let n = 1 + (k % 3) as u32;
            let len = rng.gen_range(0.5..6.0);
            let f = random_kn_function(&mut rng, n, 0.01, len).unwrap();
            assert!(kn_membership(&f, n).member);
            let t = rng.gen_range(0.0..8.0);
            assert!(kn_membership(&translate(&f, t).unwrap(), n).member, "k = {k}, t = {t}");
        }
    }

    #[test]
    fn seeds_reproduce_specs() {
        let v = WeightFunction::exp_decay(1.0).unwrap();
        let p = RandomSpecParams::new(2, 4, 0.3);
        let a = random_spec(&mut ChaCha8Rng::seed_from_u64(3), &p, &v).unwrap();
        let b = random_spec(&mut ChaCha8Rng::seed_from_u64(3), &p, &v).unwrap();
        assert_eq!(a, b);
    }
}
