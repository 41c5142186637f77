use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CoefficientPair, GridFunction, MonomialCombo, TailIntegral, WeightFunction};
use crate::error::{Error, Result};

/// How a node series continues past its stored data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// Every node with index `> last` is zero.
    ZeroAfter { last: usize },
    /// `node(i + period) == node(i)` for every `i >= start`.
    PeriodicFrom { start: usize, period: usize },
}

/// A function known through its values on the uniform grid `i·h`, `i >= 0`.
pub trait NodeSeries {
    fn step(&self) -> f64;
    fn node(&self, i: usize) -> Complex64;
    fn tail(&self) -> Tail;
}

impl NodeSeries for GridFunction {
    fn step(&self) -> f64 {
        GridFunction::step(self)
    }

    fn node(&self, i: usize) -> Complex64 {
        GridFunction::node(self, i)
    }

    fn tail(&self) -> Tail {
        match self.period_nodes() {
            Some(m) => Tail::PeriodicFrom {
                start: 0,
                period: m,
            },
            None => Tail::ZeroAfter {
                last: self.len() - 1,
            },
        }
    }
}

/// `f - g` for two series on the same step, whatever their extensions.
pub struct Difference<'a, A: NodeSeries, B: NodeSeries> {
    f: &'a A,
    g: &'a B,
    tail: Tail,
}

impl<'a, A: NodeSeries, B: NodeSeries> Difference<'a, A, B> {
    pub fn new(f: &'a A, g: &'a B) -> Result<Self> {
        if f.step() != g.step() {
            return Err(Error::GridMismatch(format!(
                "steps {} and {} differ",
                f.step(),
                g.step()
            )));
        }
        let tail = match (f.tail(), g.tail()) {
            (Tail::ZeroAfter { last: a }, Tail::ZeroAfter { last: b }) => {
                Tail::ZeroAfter { last: a.max(b) }
            }
            (Tail::ZeroAfter { last }, Tail::PeriodicFrom { start, period })
            | (Tail::PeriodicFrom { start, period }, Tail::ZeroAfter { last }) => {
                Tail::PeriodicFrom {
                    start: start.max(last + 1),
                    period,
                }
            }
            (
                Tail::PeriodicFrom {
                    start: s1,
                    period: m1,
                },
                Tail::PeriodicFrom {
                    start: s2,
                    period: m2,
                },
            ) => Tail::PeriodicFrom {
                start: s1.max(s2),
                period: m1 / gcd(m1, m2) * m2,
            },
        };
        Ok(Difference { f, g, tail })
    }
}

impl<A: NodeSeries, B: NodeSeries> NodeSeries for Difference<'_, A, B> {
    fn step(&self) -> f64 {
        self.f.step()
    }

    #[inline]
    fn node(&self, i: usize) -> Complex64 {
        self.f.node(i) - self.g.node(i)
    }

    fn tail(&self) -> Tail {
        self.tail
    }
}

/// `T_{k·h} f` viewed without copying: node `i` is node `i + k` of `f`.
pub struct Shifted<'a, S: NodeSeries> {
    f: &'a S,
    k: usize,
}

impl<'a, S: NodeSeries> Shifted<'a, S> {
    pub fn new(f: &'a S, k: usize) -> Self {
        Shifted { f, k }
    }
}

impl<S: NodeSeries> NodeSeries for Shifted<'_, S> {
    fn step(&self) -> f64 {
        self.f.step()
    }

    #[inline]
    fn node(&self, i: usize) -> Complex64 {
        self.f.node(i + self.k)
    }

    fn tail(&self) -> Tail {
        match self.f.tail() {
            Tail::ZeroAfter { last } => Tail::ZeroAfter {
                last: last.saturating_sub(self.k),
            },
            Tail::PeriodicFrom { start, period } => Tail::PeriodicFrom {
                start: start.saturating_sub(self.k),
                period,
            },
        }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A finite `L^p_v` norm estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpNorm {
    /// Quadrature estimate of the norm.
    pub estimate: f64,
    /// Bound on the integral mass (`∫|f|^p v`, not its `p`-th root) that the
    /// quadrature horizon leaves unaccounted for.
    pub tail_bound: f64,
    pub exponent: f64,
}

impl LpNorm {
    /// Upper estimate `(estimate^p + tail_bound)^{1/p}`.
    pub fn upper(&self) -> f64 {
        if self.tail_bound == 0.0 {
            return self.estimate;
        }
        (self.estimate.powf(self.exponent) + self.tail_bound).powf(1.0 / self.exponent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormEstimate {
    Finite(LpNorm),
    /// The integral diverges (non-decaying periodic mass against a weight
    /// with divergent tail).
    Infinite,
}

impl NormEstimate {
    pub fn finite(&self) -> Option<LpNorm> {
        match self {
            NormEstimate::Finite(n) => Some(*n),
            NormEstimate::Infinite => None,
        }
    }

    /// Conservative scalar value; `+∞` for divergent norms.
    pub fn upper(&self) -> f64 {
        self.finite().map_or(f64::INFINITY, |n| n.upper())
    }
}

/// Extra periods integrated past the start of a periodic tail when the
/// weight decays slowly; the remainder is handled by the mean-value tail.
const MIN_TAIL_PERIODS: usize = 8;
const MIN_TAIL_LENGTH: f64 = 200.0;

#[inline]
fn pow_abs(z: Complex64, p: f64) -> f64 {
    let a = z.norm();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

/// `(∫_0^∞ |f|^p v dx)^{1/p}` by composite trapezoid on the nodes of `f`.
///
/// Zero tails are integrated up to the last node or to the weight's
/// negligible cut, whichever comes first; the omitted mass is bounded by
/// `sup|f|^p · ∫_cut^∞ v`. Periodic tails are integrated up to a whole number
/// of periods past the weight's cut and the remaining mass is estimated as the
/// period mean of `|f|^p` times the tail integral of `v`; for nonincreasing
/// weights the error of that estimate is at most `P·osc(|f|^p)·v(cut)`.
pub fn lp_v_norm<S: NodeSeries + ?Sized>(f: &S, v: &WeightFunction, p: f64) -> Result<NormEstimate> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("exponent p must be >= 1, got {p}")));
    }
    let h = f.step();
    let trapezoid = |end: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..=end {
            let w = if i == 0 || i == end { 0.5 } else { 1.0 };
            let fi = f.node(i);
            if fi.re != 0.0 || fi.im != 0.0 {
                acc += w * pow_abs(fi, p) * v.eval(i as f64 * h);
            }
        }
        acc * h
    };
    let finish = |mass: f64, tail_bound: f64| {
        Ok(NormEstimate::Finite(LpNorm {
            estimate: mass.max(0.0).powf(1.0 / p),
            tail_bound,
            exponent: p,
        }))
    };
    let weight_cut = v.negligible_cut().map(|c| (c / h).ceil());

    match f.tail() {
        Tail::ZeroAfter { last } => {
            let end = match weight_cut {
                Some(k) if k < last as f64 => k as usize,
                _ => last,
            };
            let mass = if end == 0 { 0.0 } else { trapezoid(end) };
            let tail_bound = if end < last {
                let sup = (end..=last).map(|i| pow_abs(f.node(i), p)).fold(0.0, f64::max);
                let tail = v.tail_integral(end as f64 * h)?.finite().unwrap_or(f64::INFINITY);
                if sup == 0.0 {
                    0.0
                } else {
                    sup * tail
                }
            } else {
                0.0
            };
            finish(mass, tail_bound)
        }
        Tail::PeriodicFrom { start, period } => {
            let block: Vec<f64> = (start..start + period).map(|i| pow_abs(f.node(i), p)).collect();
            let sup = block.iter().copied().fold(0.0, f64::max);
            if sup == 0.0 {
                let mass = if start == 0 { 0.0 } else { trapezoid(start) };
                return finish(mass, 0.0);
            }
            if let Some(end) = v.support_end() {
                let k = ((end / h).ceil() as usize).max(1);
                return finish(trapezoid(k), 0.0);
            }
            let Some(cut) = weight_cut else {
                return Ok(NormEstimate::Infinite);
            };
            let cap = start + (MIN_TAIL_PERIODS * period).max((MIN_TAIL_LENGTH / h).ceil() as usize);
            let target = (cut as usize).max(start).min(cap);
            let periods = (target - start).div_ceil(period);
            let end = start + periods * period;
            let mass = trapezoid(end);
            let mean = block.iter().sum::<f64>() / period as f64;
            let tail = match v.tail_integral(end as f64 * h)? {
                TailIntegral::Finite(t) => t,
                _ => return Ok(NormEstimate::Infinite),
            };
            let min = block.iter().copied().fold(f64::INFINITY, f64::min);
            let tail_bound = if v.nonincreasing_from(end as f64 * h) {
                period as f64 * h * (sup - min) * v.eval(end as f64 * h)
            } else {
                sup * tail
            };
            finish(mass + mean * tail, tail_bound)
        }
    }
}

/// `lp_v_norm(f - g)` for grid functions with possibly different extensions.
pub fn lp_v_distance(
    f: &GridFunction,
    g: &GridFunction,
    v: &WeightFunction,
    p: f64,
) -> Result<NormEstimate> {
    lp_v_norm(&Difference::new(f, g)?, v, p)
}

/// `max(sup_n |a_n|, sup_n |b_n|)`.
pub fn x_rho_norm(u: &CoefficientPair) -> f64 {
    u.a().iter().chain(u.b()).map(|z| z.norm()).fold(0.0, f64::max)
}

/// Parameters of the function spaces: `p` for `L^p_v`, `(s, τ)` for `Y^{s,τ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub p: f64,
    pub s: f64,
    pub tau_y: f64,
}

impl SpaceParams {
    pub fn new(p: f64, s: f64, tau_y: f64) -> Result<Self> {
        if !(p >= 1.0) || !(s > 0.0) || !(tau_y >= 0.0) {
            return Err(Error::invalid(format!(
                "space parameters need p >= 1, s > 0, tau_y >= 0 (got {p}, {s}, {tau_y})"
            )));
        }
        Ok(SpaceParams { p, s, tau_y })
    }
}

pub const DEFAULT_POINTS_PER_DECADE: usize = 4096;
const LOG_GRID_MIN_EXP: i32 = -8;
const LOG_GRID_MAX_EXP: i32 = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YNorm {
    pub sup: f64,
    /// Grid point attaining the sup; `None` for the zero function.
    pub arg_sup: Option<f64>,
}

#[inline]
fn softplus(y: f64) -> f64 {
    y.max(0.0) + (-y.abs()).exp().ln_1p()
}

/// `sup_{x>0} |u(x)| / ((1+x^s)(1+x^{-τ}))` over the log grid
/// `x = 10^{-8 + k/ppd}`, `k = 0..=16·ppd`, in log-magnitude arithmetic.
pub fn y_stau_norm(u: &MonomialCombo, params: &SpaceParams, points_per_decade: usize) -> Result<YNorm> {
    if points_per_decade == 0 {
        return Err(Error::invalid("points_per_decade must be positive"));
    }
    if u.is_zero() {
        return Ok(YNorm {
            sup: 0.0,
            arg_sup: None,
        });
    }
    let decades = (LOG_GRID_MAX_EXP - LOG_GRID_MIN_EXP) as usize;
    let ln10 = std::f64::consts::LN_10;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=decades * points_per_decade {
        let ln_x = (LOG_GRID_MIN_EXP as f64 + k as f64 / points_per_decade as f64) * ln10;
        let ln_den = softplus(params.s * ln_x) + softplus(-params.tau_y * ln_x);
        let val = u.ln_abs(ln_x) - ln_den;
        if val > best.0 {
            best = (val, ln_x);
        }
    }
    Ok(YNorm {
        sup: best.0.exp(),
        arg_sup: Some(best.1.exp()),
    })
}
