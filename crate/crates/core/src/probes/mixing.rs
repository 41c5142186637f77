use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::semigroup::{translate, TranslationSemigroup};
use crate::shadowing::{class_index, required_gap, splice, Piece, ShadowingSpec};
use crate::spaces::{GridFunction, Extension};

/// A point `x ∈ U = B(u, r_u)` with `T_t x ∈ W = B(0, r_w)` and a point
/// `w ∈ W` with `T_t w ∈ U`, with the four measured distances.
#[derive(Clone, Debug, PartialEq)]
pub struct MixingWitness {
    pub t: f64,
    pub x: GridFunction,
    pub w: GridFunction,
    /// `w = T_{t'} x`.
    pub t_prime: f64,
    pub period: f64,
    pub margins: Margins,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Margins {
    /// `‖x - u‖`.
    pub x_to_u: f64,
    /// `‖T_t x‖`.
    pub tx_norm: f64,
    /// `‖w‖`.
    pub w_norm: f64,
    /// `‖T_t w - u‖`.
    pub tw_to_u: f64,
    pub radius_u: f64,
    pub radius_w: f64,
}

impl Margins {
    /// `t ∈ R(U, W)`.
    pub fn in_uw(&self) -> bool {
        self.x_to_u < self.radius_u && self.tx_norm < self.radius_w
    }

    /// `t ∈ R(W, U)`.
    pub fn in_wu(&self) -> bool {
        self.w_norm < self.radius_w && self.tw_to_u < self.radius_u
    }
}

/// Smallest scan time at which the construction is attempted: the gap for
/// `δ = min(r_u, r_w)/2`, rounded up to the grid of `u`.
pub fn mixing_threshold(engine: &TranslationSemigroup, u: &GridFunction, radius_u: f64, radius_w: f64) -> Result<f64> {
    let delta = radius_u.min(radius_w) / 2.0;
    let gap = required_gap(delta, class_index(u), engine.weight(), engine.p())?;
    let h = u.step();
    Ok((gap.m / h - 1e-9).ceil() * h)
}

fn measure(
    engine: &TranslationSemigroup,
    u: &GridFunction,
    x: &GridFunction,
    w: &GridFunction,
    t: f64,
    radius_u: f64,
    radius_w: f64,
) -> Result<Margins> {
    Ok(Margins {
        x_to_u: engine.grid_distance(x, u)?,
        tx_norm: engine.grid_norm(&translate(x, t)?)?,
        w_norm: engine.grid_norm(w)?,
        tw_to_u: engine.grid_distance(&translate(w, t)?, u)?,
        radius_u,
        radius_w,
    })
}

/// `w` with `T_t w = u` exactly: `u` pushed right by `t`, or for periodic
/// `u` a backward shift by a whole number of periods minus `t`.
fn preimage(u: &GridFunction, t: f64) -> Result<GridFunction> {
    match u.extension() {
        Extension::Periodic { period } => {
            let m = (t / period).ceil().max(1.0);
            translate(u, m * period - t)
        }
        Extension::Zero => {
            let h = u.step();
            let k = crate::spaces::grid_index(t, h).ok_or_else(|| {
                Error::invalid(format!("t = {t} is not on the grid of u (step {h})"))
            })?;
            let mut s = vec![Default::default(); k];
            s.extend_from_slice(u.samples());
            GridFunction::zero_extended(h, s)
        }
    }
}

/// The construction from the proof that specification implies mixing.
///
/// Pieces `y_1 = u` on `[0, 0]` and `y_2 = 0` on `[a_2, t]` with
/// `a_2 = M` on the grid and `t_0 = h` give a periodic `x` of period
/// `P = t + a_2`; then `x ∈ U`, `T_t x ∈ W`, and `w = T_{P-t} x` satisfies
/// `w ∈ W`, `T_t w = x ∈ U`. Requires `t ≥ a_2`; `t` must lie on the grid of `u`.
pub fn mixing_witness(
    engine: &TranslationSemigroup,
    u: &GridFunction,
    radius_u: f64,
    radius_w: f64,
    t: f64,
) -> Result<MixingWitness> {
    if !(radius_u > 0.0 && radius_w > 0.0) || !(t >= 0.0) {
        return Err(Error::invalid(format!(
            "need positive radii and t >= 0, got {radius_u}, {radius_w}, {t}"
        )));
    }
    let h = u.step();
    if u.samples().iter().all(|z| z.norm() == 0.0) {
        let zero = GridFunction::zero(h, h)?;
        let margins = measure(engine, u, &zero, &zero, t, radius_u, radius_w)?;
        return Ok(MixingWitness { t, x: zero.clone(), w: zero, t_prime: 0.0, period: h, margins });
    }
    if radius_w.is_infinite() {
        let w = preimage(u, t)?;
        let margins = measure(engine, u, u, &w, t, radius_u, radius_w)?;
        return Ok(MixingWitness { t, x: u.clone(), w, t_prime: 0.0, period: f64::NAN, margins });
    }
    let a2 = mixing_threshold(engine, u, radius_u, radius_w)?;
    if t < a2 {
        return Err(Error::BelowThreshold { t, threshold: a2 });
    }
    let b2 = (t / h - 1e-9).ceil() * h;
    let delta = radius_u.min(radius_w) / 2.0;
    let spec = ShadowingSpec::new(
        vec![
            Piece { y: u.clone(), a: 0.0, b: 0.0 },
            Piece { y: GridFunction::zero(h, h)?, a: a2, b: b2 },
        ],
        delta,
        class_index(u),
        h,
        engine.p(),
        engine.weight().clone(),
    )?;
    let cert = splice(&spec)?;
    let t_prime = cert.period - t;
    let w = translate(&cert.x, t_prime)?;
    let margins = measure(engine, u, &cert.x, &w, t, radius_u, radius_w)?;
    Ok(MixingWitness { t, x: cert.x, w, t_prime, period: cert.period, margins })
}

impl MixingWitness {
    /// Largest change in any recorded margin when the distances are measured again.
    pub fn reverify(&self, engine: &TranslationSemigroup, u: &GridFunction) -> Result<f64> {
        let m = measure(engine, u, &self.x, &self.w, self.t, self.margins.radius_u, self.margins.radius_w)?;
        let a = self.margins;
        Ok([
            (m.x_to_u - a.x_to_u).abs(),
            (m.tx_norm - a.tx_norm).abs(),
            (m.w_norm - a.w_norm).abs(),
            (m.tw_to_u - a.tw_to_u).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnSetReport {
    pub t_grid: Vec<f64>,
    pub in_uw: Vec<bool>,
    pub in_wu: Vec<bool>,
    /// Measured distances for each scanned `t` where a witness was built.
    pub witnesses: Vec<Option<Margins>>,
    /// Least scanned `t` from which every later scanned time is in both sets.
    pub first_all_pass: Option<f64>,
    pub threshold: Option<f64>,
    /// Why no witnesses could be built at all.
    pub unavailable: Option<String>,
}

/// Runs [`mixing_witness`] at every `t`. Times below the constructive
/// threshold are recorded as not witnessed.
pub fn return_set_scan(
    engine: &TranslationSemigroup,
    u: &GridFunction,
    radius_u: f64,
    radius_w: f64,
    t_grid: &[f64],
) -> Result<ReturnSetReport> {
    let threshold = if radius_w.is_infinite() {
        Ok(0.0)
    } else {
        mixing_threshold(engine, u, radius_u, radius_w)
    };
    let threshold = match threshold {
        Ok(th) => th,
        Err(e @ (Error::NoFiniteGap | Error::TailInconclusive { .. })) => {
            return Ok(ReturnSetReport {
                t_grid: t_grid.to_vec(),
                in_uw: vec![false; t_grid.len()],
                in_wu: vec![false; t_grid.len()],
                witnesses: vec![None; t_grid.len()],
                first_all_pass: None,
                threshold: None,
                unavailable: Some(format!("mixing witnesses unavailable: {e}")),
            })
        }
        Err(e) => return Err(e),
    };
    let results: Vec<Option<Margins>> = t_grid
        .par_iter()
        .map(|&t| match mixing_witness(engine, u, radius_u, radius_w, t) {
            Ok(w) => Ok(Some(w.margins)),
            Err(Error::BelowThreshold { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let in_uw: Vec<bool> = results.iter().map(|m| m.is_some_and(|m| m.in_uw())).collect();
    let in_wu: Vec<bool> = results.iter().map(|m| m.is_some_and(|m| m.in_wu())).collect();
    let mut first_all_pass = None;
    for i in (0..t_grid.len()).rev() {
        if in_uw[i] && in_wu[i] {
            first_all_pass = Some(t_grid[i]);
        } else {
            break;
        }
    }
    Ok(ReturnSetReport {
        t_grid: t_grid.to_vec(),
        in_uw,
        in_wu,
        witnesses: results,
        first_all_pass,
        threshold: Some(threshold),
        unavailable: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::WeightFunction;

    fn engine(v: WeightFunction) -> TranslationSemigroup {
        TranslationSemigroup::new(v, 1.0, 0.01).unwrap()
    }

    fn tent() -> GridFunction {
        GridFunction::tent(0.01, 1.0, 1.0).unwrap()
    }

    #[test]
    fn witness_at_twelve() {
        let e = engine(WeightFunction::exp_decay(1.0).unwrap());
        let w = mixing_witness(&e, &tent(), 0.5, 0.5, 12.0).unwrap();
        assert!(w.margins.in_uw() && w.margins.in_wu(), "{:?}", w.margins);
        assert!(w.reverify(&e, &tent()).unwrap() <= 1e-9);
    }

    #[test]
    fn zero_center_is_trivial() {
        let e = engine(WeightFunction::exp_decay(1.0).unwrap());
        let z = GridFunction::zero(0.01, 1.0).unwrap();
        let w = mixing_witness(&e, &z, 0.5, 0.5, 0.3).unwrap();
        assert_eq!(w.margins.x_to_u, 0.0);
        assert!(w.margins.in_uw() && w.margins.in_wu());
    }

    #[test]
    fn below_threshold_is_refused() {
        let e = engine(WeightFunction::exp_decay(1.0).unwrap());
        assert!(matches!(
            mixing_witness(&e, &tent(), 0.5, 0.5, 1.0),
            Err(Error::BelowThreshold { .. })
        ));
    }

    #[test]
    fn constant_weight_has_no_witnesses() {
        let e = engine(WeightFunction::constant(1.0).unwrap());
        let r = return_set_scan(&e, &tent(), 0.5, 0.5, &[1.0, 10.0]).unwrap();
        assert!(r.unavailable.unwrap().contains("unavailable"));
        assert_eq!(r.first_all_pass, None);
    }

    #[test]
    fn unbounded_w_passes_everywhere() {
        let e = engine(WeightFunction::exp_decay(1.0).unwrap());
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let r = return_set_scan(&e, &tent(), 0.5, f64::INFINITY, &ts).unwrap();
        assert_eq!(r.first_all_pass, Some(0.0));
    }
}
