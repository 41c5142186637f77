use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of an admissible weight `v` on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// `v(x) = e^{-rate·x}`.
    ExpDecay { rate: f64 },
    /// `v(x) = level`.
    Constant { level: f64 },
    /// `v(x) = (1 + x)^{-exponent}`.
    RationalDecay { exponent: f64 },
    /// Linear interpolation of positive samples. The weight is zero beyond the
    /// last sample. `compact` says whether that zero tail is the true weight
    /// (compact support) or just the end of the available data.
    Table {
        xs: Vec<f64>,
        values: Vec<f64>,
        compact: bool,
    },
}

/// Constants `(M, w)` with `v(x) ≤ M e^{wt} v(x + t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub m: f64,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    kind: WeightKind,
    admissible: Option<Admissibility>,
}

/// Result of integrating a weight from a cut point to infinity.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailIntegral {
    Finite(f64),
    Divergent,
    Inconclusive { partial: f64 },
}

impl TailIntegral {
    pub fn finite(self) -> Option<f64> {
        match self {
            TailIntegral::Finite(v) => Some(v),
            _ => None,
        }
    }
}

const EXP_HORIZON: f64 = 40.0;

impl WeightFunction {
    pub fn new(kind: WeightKind, admissible: Option<Admissibility>) -> Result<Self> {
        match &kind {
            WeightKind::ExpDecay { rate } => positive("rate", *rate)?,
            WeightKind::Constant { level } => positive("level", *level)?,
            WeightKind::RationalDecay { exponent } => positive("exponent", *exponent)?,
            WeightKind::Table { xs, values, .. } => {
                if xs.len() < 2 || xs.len() != values.len() {
                    return Err(Error::invalid(
                        "table weight needs at least two (x, value) pairs of equal length",
                    ));
                }
                if xs[0] < 0.0 || xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid(
                        "table positions must be nonnegative and strictly increasing",
                    ));
                }
                if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::invalid(format!(
                        "table weight values must be strictly positive, found {bad}"
                    )));
                }
            }
        }
        if let Some(a) = admissible {
            if !(a.m >= 1.0 && a.m.is_finite() && a.w.is_finite()) {
                return Err(Error::invalid(format!(
                    "admissibility constants need M >= 1 and finite w, got M = {}, w = {}",
                    a.m, a.w
                )));
            }
        }
        Ok(WeightFunction { kind, admissible })
    }

    /// `e^{-λx}` with its exact admissibility constants `(1, λ)`.
    pub fn exp_decay(rate: f64) -> Result<Self> {
        Self::new(
            WeightKind::ExpDecay { rate },
            Some(Admissibility { m: 1.0, w: rate }),
        )
    }

    pub fn constant(level: f64) -> Result<Self> {
        Self::new(
            WeightKind::Constant { level },
            Some(Admissibility { m: 1.0, w: 0.0 }),
        )
    }

    /// `(1+x)^{-q}`; `(1+x+t)^q/(1+x)^q ≤ (1+t)^q ≤ e^{qt}` gives `(1, q)`.
    pub fn rational_decay(exponent: f64) -> Result<Self> {
        Self::new(
            WeightKind::RationalDecay { exponent },
            Some(Admissibility {
                m: 1.0,
                w: exponent,
            }),
        )
    }

    pub fn table(xs: Vec<f64>, values: Vec<f64>, compact: bool) -> Result<Self> {
        Self::new(WeightKind::Table { xs, values, compact }, None)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn admissible(&self) -> Option<Admissibility> {
        self.admissible
    }

    pub fn with_admissible(mut self, admissible: Admissibility) -> Result<Self> {
        Self::new(self.kind.clone(), Some(admissible))?;
        self.admissible = Some(admissible);
        Ok(self)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::ExpDecay { rate } => (-rate * x).exp(),
            WeightKind::Constant { level } => *level,
            WeightKind::RationalDecay { exponent } => (1.0 + x).powf(-exponent),
            WeightKind::Table { xs, values, .. } => table_eval(xs, values, x),
        }
    }

    /// `ln v(x)`, `-∞` where the weight vanishes.
    pub fn ln_eval(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::ExpDecay { rate } => -rate * x,
            WeightKind::Constant { level } => level.ln(),
            WeightKind::RationalDecay { exponent } => -exponent * x.ln_1p(),
            WeightKind::Table { xs, values, .. } => table_eval(xs, values, x).ln(),
        }
    }

    /// Last point of the support for tables, `None` for the analytic families.
    pub fn support_end(&self) -> Option<f64> {
        match &self.kind {
            WeightKind::Table { xs, .. } => xs.last().copied(),
            _ => None,
        }
    }

    pub fn is_compact_table(&self) -> bool {
        matches!(self.kind, WeightKind::Table { compact: true, .. })
    }

    /// Whether `v` is nonincreasing on `[x, ∞)`.
    pub fn nonincreasing_from(&self, x: f64) -> bool {
        match &self.kind {
            WeightKind::Table { xs, values, .. } => {
                let mut prev = f64::INFINITY;
                for (&xi, &vi) in xs.iter().zip(values) {
                    if xi >= x {
                        if vi > prev {
                            return false;
                        }
                        prev = vi;
                    }
                }
                true
            }
            _ => true,
        }
    }

    /// Cut beyond which the weight carries a negligible share of its mass
    /// (`e^{-40}` relative for the exponential family). `None` when the tail
    /// does not decay.
    pub fn negligible_cut(&self) -> Option<f64> {
        match &self.kind {
            WeightKind::ExpDecay { rate } => Some(EXP_HORIZON / rate),
            WeightKind::Constant { .. } => None,
            WeightKind::RationalDecay { exponent } => {
                if *exponent <= 1.0 {
                    None
                } else {
                    Some((EXP_HORIZON / (exponent - 1.0)).exp() - 1.0)
                }
            }
            WeightKind::Table { xs, .. } => xs.last().copied(),
        }
    }

    /// `∫_C^∞ v(x) dx`.
    pub fn tail_integral(&self, cut: f64) -> Result<TailIntegral> {
        if !(cut >= 0.0) || !cut.is_finite() {
            return Err(Error::invalid(format!("cut point must be >= 0, got {cut}")));
        }
        Ok(match &self.kind {
            WeightKind::ExpDecay { rate } => TailIntegral::Finite((-rate * cut).exp() / rate),
            WeightKind::Constant { .. } => TailIntegral::Divergent,
            WeightKind::RationalDecay { exponent } => {
                if *exponent <= 1.0 {
                    TailIntegral::Divergent
                } else {
                    TailIntegral::Finite((1.0 + cut).powf(1.0 - exponent) / (exponent - 1.0))
                }
            }
            WeightKind::Table {
                xs,
                values,
                compact,
            } => {
                let end = *xs.last().expect("validated table");
                if *compact {
                    TailIntegral::Finite(table_integral(xs, values, cut, end))
                } else {
                    table_tail_heuristic(xs, values, cut)
                }
            }
        })
    }

    /// Smallest cut `C >= 0` with `∫_C^∞ v <= target`.
    ///
    /// Closed form for the analytic families. A compactly supported table
    /// returns the end of its support, where the tail is exactly zero.
    pub fn cut_for_tail(&self, target: f64) -> Result<f64> {
        if !(target > 0.0) {
            return Err(Error::invalid(format!("tail target must be > 0, got {target}")));
        }
        match &self.kind {
            WeightKind::ExpDecay { rate } => Ok((-(rate * target).ln() / rate).max(0.0)),
            WeightKind::Constant { .. } => Err(Error::NoFiniteGap),
            WeightKind::RationalDecay { exponent } => {
                if *exponent <= 1.0 {
                    return Err(Error::NoFiniteGap);
                }
                let q = *exponent;
                Ok(((target * (q - 1.0)).powf(1.0 / (1.0 - q)) - 1.0).max(0.0))
            }
            WeightKind::Table { xs, compact, .. } => {
                let end = *xs.last().expect("validated table");
                if *compact {
                    return Ok(end);
                }
                match self.tail_integral(0.0)? {
                    TailIntegral::Divergent => Err(Error::NoFiniteGap),
                    TailIntegral::Inconclusive { partial } => {
                        Err(Error::TailInconclusive { partial })
                    }
                    TailIntegral::Finite(total) => {
                        if total <= target {
                            return Ok(0.0);
                        }
                        let (mut lo, mut hi) = (0.0, end);
                        for _ in 0..200 {
                            let mid = 0.5 * (lo + hi);
                            let tail = self.tail_integral(mid)?.finite().unwrap_or(f64::INFINITY);
                            if tail <= target {
                                hi = mid;
                            } else {
                                lo = mid;
                            }
                        }
                        Ok(hi)
                    }
                }
            }
        }
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {value}")))
    }
}

fn table_eval(xs: &[f64], values: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x > xs[last] {
        return 0.0;
    }
    if x <= xs[0] {
        return values[0];
    }
    let j = xs.partition_point(|&p| p <= x);
    let (x0, x1) = (xs[j - 1], xs[j.min(last)]);
    if j > last || x1 == x0 {
        return values[last];
    }
    let u = (x - x0) / (x1 - x0);
    values[j - 1] * (1.0 - u) + values[j] * u
}

/// Exact integral of the table polyline over `[a, b]`.
fn table_integral(xs: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let end = *xs.last().unwrap();
    let b = b.min(end);
    if b <= a {
        return 0.0;
    }
    let mut total = 0.0;
    if a < xs[0] {
        total += values[0] * (xs[0].min(b) - a);
    }
    for j in 1..xs.len() {
        let (x0, x1) = (xs[j - 1], xs[j]);
        let lo = x0.max(a);
        let hi = x1.min(b);
        if hi > lo {
            total += 0.5 * (table_eval(xs, values, lo) + table_eval(xs, values, hi)) * (hi - lo);
        }
    }
    total
}

/// Divergence heuristic on data-limited tables: the partial sum is declared
/// divergent when doubling the horizon doubles it within 1% twice in a row,
/// convergent when the last doubling adds less than `1e-9` relative.
fn table_tail_heuristic(xs: &[f64], values: &[f64], cut: f64) -> TailIntegral {
    let end = *xs.last().unwrap();
    let full = table_integral(xs, values, cut, end);
    if cut >= end {
        return TailIntegral::Inconclusive { partial: 0.0 };
    }
    let span = end - cut;
    let mut len = span / 1024.0;
    let mut sums = Vec::new();
    while len <= span * (1.0 + 1e-12) {
        sums.push(table_integral(xs, values, cut, cut + len));
        len *= 2.0;
    }
    let ratio = |a: f64, b: f64| if a > 0.0 { b / a } else { f64::NAN };
    if sums.len() >= 3 {
        let n = sums.len();
        let r1 = ratio(sums[n - 3], sums[n - 2]);
        let r2 = ratio(sums[n - 2], sums[n - 1]);
        if (r1 - 2.0).abs() <= 0.02 && (r2 - 2.0).abs() <= 0.02 {
            return TailIntegral::Divergent;
        }
    }
    if sums.len() >= 2 {
        let n = sums.len();
        let (prev, last) = (sums[n - 2], sums[n - 1]);
        if last - prev <= 1e-9 * last.max(f64::MIN_POSITIVE) {
            return TailIntegral::Finite(full);
        }
    }
    TailIntegral::Inconclusive { partial: full }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibilityVerdict {
    /// The sup of `v(x)e^{-wt}/v(x+t)` is stable under refinement.
    AdmissibleEmpirical,
    NotAdmissible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub verdict: AdmissibilityVerdict,
    pub m_min: Option<f64>,
    /// Sup of the ratio over the nested quarter, half and full grids.
    pub levels: Vec<f64>,
}

/// Empirical test of `v(x) ≤ M e^{wt} v(x+t)`.
///
/// The sup `M_min` of `v(x)e^{-wt}/v(x+t)` is computed on the nested
/// quarter, half and full prefixes of the (sorted) grids. A sup that does not
/// move across the three levels is reported admissible; one that grows at both
/// refinements is not admissible. Pairs falling outside the data range of a
/// non-compact table are skipped.
pub fn admissibility_check(
    v: &WeightFunction,
    x_grid: &[f64],
    t_grid: &[f64],
    w: f64,
) -> AdmissibilityReport {
    let inconclusive = AdmissibilityReport {
        verdict: AdmissibilityVerdict::Inconclusive,
        m_min: None,
        levels: Vec::new(),
    };
    if x_grid.is_empty() || t_grid.is_empty() {
        return inconclusive;
    }
    let mut xs: Vec<f64> = x_grid.iter().copied().filter(|x| x.is_finite() && *x >= 0.0).collect();
    let mut ts: Vec<f64> = t_grid.iter().copied().filter(|t| t.is_finite() && *t >= 0.0).collect();
    if xs.is_empty() || ts.is_empty() {
        return inconclusive;
    }
    xs.sort_by(f64::total_cmp);
    ts.sort_by(f64::total_cmp);
    let data_end = match v.kind() {
        WeightKind::Table { xs, compact: false, .. } => xs.last().copied(),
        _ => None,
    };

    let sup_on = |nx: usize, nt: usize| -> f64 {
        let mut sup = f64::NEG_INFINITY;
        for &x in &xs[..nx] {
            let lx = v.ln_eval(x);
            for &t in &ts[..nt] {
                if data_end.is_some_and(|e| x + t > e) {
                    continue;
                }
                let r = (lx - w * t - v.ln_eval(x + t)).exp();
                let r = if r.is_nan() { f64::INFINITY } else { r };
                sup = sup.max(r);
            }
        }
        sup
    };
    let level = |frac: usize| {
        let nx = (xs.len() * frac).div_ceil(4).max(1);
        let nt = (ts.len() * frac).div_ceil(4).max(1);
        sup_on(nx, nt)
    };
    let levels = vec![level(1), level(2), level(4)];
    if levels.iter().any(|m| *m == f64::NEG_INFINITY) {
        return AdmissibilityReport {
            levels,
            ..inconclusive
        };
    }
    if levels.iter().any(|m| m.is_infinite()) {
        return AdmissibilityReport {
            verdict: AdmissibilityVerdict::NotAdmissible,
            m_min: None,
            levels,
        };
    }
    let (q, h, f) = (levels[0], levels[1], levels[2]);
    let stable = h <= q * (1.0 + 1e-9) && f <= h * (1.0 + 1e-9);
    let growing = h > q * (1.0 + 1e-3) && f > h * (1.0 + 1e-3);
    let verdict = if stable {
        AdmissibilityVerdict::AdmissibleEmpirical
    } else if growing {
        AdmissibilityVerdict::NotAdmissible
    } else {
        AdmissibilityVerdict::Inconclusive
    };
    AdmissibilityReport {
        verdict,
        m_min: Some(f.max(1.0)),
        levels,
    }
}
