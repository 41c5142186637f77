//! Periodic shadowing points for the translation semigroup.
//!
//! The invariant classes are `K_n = {f : sup|f| ≤ n, Lip(f) ≤ n}`. Given
//! orbit pieces `y_r` on `[a_r, b_r]`, [`construct_shadowing_point`] splices
//! the `y_r` into one periodic function with unit-length ramps between them
//! and [`verify_shadowing`] measures how well its orbit traces each piece.

mod io;
mod random;
mod suite;
mod verify;

use num_complex::Complex64;
use serde::Serialize;

pub use io::{read_certificate, write_certificate};
pub use random::{random_kn_function, random_spec, RandomSpecParams};
pub use suite::{shadowing_suite, SuiteCase, SuiteParams};
pub use verify::{verify_shadowing, PieceReport, VerificationReport, DEFAULT_T_STEP, RECORD_TOLERANCE};

use crate::error::{Error, Result};
use crate::spaces::{grid_index, GridFunction, WeightFunction};

/// Slack allowed in the `K_n` membership test.
pub const CLASS_SLACK: f64 = 1e-9;
/// Length of the ramps that connect consecutive pieces.
pub const RAMP_LENGTH: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub sup_norm: f64,
    pub max_slope: f64,
}

/// `f ∈ K_n` on the polyline through the samples (including the drop to
/// zero after the last node of a zero-extended function).
pub fn kn_membership(f: &GridFunction, n: u32) -> Membership {
    let sup_norm = f.sup_norm();
    let max_slope = f.max_slope();
    let bound = n as f64 + CLASS_SLACK;
    Membership {
        member: sup_norm <= bound && max_slope <= bound,
        sup_norm,
        max_slope,
    }
}

/// Position of the first sample (or polyline segment start) that leaves `K_n`.
pub fn kn_violation(f: &GridFunction, n: u32) -> Option<f64> {
    let bound = n as f64 + CLASS_SLACK;
    let h = f.step();
    let s = f.samples();
    let next = |i: usize| -> Complex64 {
        match s.get(i + 1) {
            Some(z) => *z,
            None => f.node(i + 1),
        }
    };
    (0..s.len())
        .find(|&i| s[i].norm() > bound || (next(i) - s[i]).norm() / h > bound)
        .map(|i| i as f64 * h)
}

/// Gap `M = C + 2` between pieces and the tail cut `C` behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub m: f64,
    pub cut: f64,
}

/// `C` is the smallest cut with `∫_C^∞ v ≤ (δ/(4n))^p`; each unit ramp then
/// costs one unit of length.
pub fn required_gap(delta: f64, n: u32, v: &WeightFunction, p: f64) -> Result<Gap> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if n == 0 {
        return Err(Error::invalid("class index n must be >= 1"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    let cut = v.cut_for_tail((delta / (4.0 * n as f64)).powf(p))?;
    Ok(Gap {
        m: cut + 2.0 * RAMP_LENGTH,
        cut,
    })
}

/// One orbit piece: `y` is traced for times in `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub y: GridFunction,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowingSpec {
    pub pieces: Vec<Piece>,
    pub delta: f64,
    pub n: u32,
    pub t0: f64,
    pub p: f64,
    pub v: WeightFunction,
}

impl ShadowingSpec {
    /// Checks `0 = a_1 ≤ b_1 < a_2 ≤ … ≤ b_s` and the scalar parameters.
    pub fn new(pieces: Vec<Piece>, delta: f64, n: u32, t0: f64, p: f64, v: WeightFunction) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("a shadowing spec needs at least one piece"));
        }
        if pieces[0].a != 0.0 {
            return Err(Error::invalid(format!("the first piece must start at 0, got {}", pieces[0].a)));
        }
        for (r, pc) in pieces.iter().enumerate() {
            if !(pc.a <= pc.b && pc.b.is_finite()) {
                return Err(Error::invalid(format!("piece {}: need a <= b, got [{}, {}]", r + 1, pc.a, pc.b)));
            }
            if r > 0 && !(pieces[r - 1].b < pc.a) {
                return Err(Error::invalid(format!(
                    "piece {}: starts at {} but piece {} ends at {}",
                    r + 1,
                    pc.a,
                    r,
                    pieces[r - 1].b
                )));
            }
            if pc.y.step() != pieces[0].y.step() {
                return Err(Error::GridMismatch(format!(
                    "piece {} has step {}, piece 1 has {}",
                    r + 1,
                    pc.y.step(),
                    pieces[0].y.step()
                )));
            }
        }
        if !(delta > 0.0 && delta.is_finite()) || n == 0 || !(t0 > 0.0 && t0.is_finite()) || !(p >= 1.0) {
            return Err(Error::invalid(format!(
                "need delta > 0, n >= 1, t0 > 0, p >= 1 (got {delta}, {n}, {t0}, {p})"
            )));
        }
        Ok(ShadowingSpec {
            pieces,
            delta,
            n,
            t0,
            p,
            v,
        })
    }

    pub fn step(&self) -> f64 {
        self.pieces[0].y.step()
    }

    pub fn b_last(&self) -> f64 {
        self.pieces.last().map_or(0.0, |pc| pc.b)
    }
}

/// A periodic point together with what was measured about it.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowingCertificate {
    pub spec: ShadowingSpec,
    pub x: GridFunction,
    /// Gap actually used, `period - b_s`.
    pub gap: f64,
    pub required_gap: f64,
    pub cut: f64,
    pub period: f64,
    /// Set when every piece time was checked to lie on `ℕ·t0`.
    pub lattice: Option<f64>,
    pub t_step: f64,
    pub per_piece_errors: Vec<f64>,
    /// Time at which each piece error was attained.
    pub per_piece_times: Vec<f64>,
    pub period_residual: f64,
    pub class_check: Membership,
}

fn node_index(t: f64, h: f64, piece: usize) -> Result<usize> {
    grid_index(t, h).ok_or(Error::OffLattice { piece, time: t, unit: h })
}

/// Builds the periodic point and records its errors at [`DEFAULT_T_STEP`].
pub fn construct_shadowing_point(spec: &ShadowingSpec) -> Result<ShadowingCertificate> {
    construct_with_step(spec, DEFAULT_T_STEP)
}

/// [`splice`] followed by a measurement of every piece at `t_step`.
pub fn construct_with_step(spec: &ShadowingSpec, t_step: f64) -> Result<ShadowingCertificate> {
    let mut cert = splice(spec)?;
    let report = verify::measure(&cert, spec, t_step)?;
    cert.t_step = t_step;
    cert.per_piece_errors = report.pieces.iter().map(|p| p.max_error).collect();
    cert.per_piece_times = report.pieces.iter().map(|p| p.at_time).collect();
    Ok(cert)
}

/// The periodic point alone: `x = y_r` on `[a_r, b_r + C]`, then a unit ramp
/// to 0, zeros, and a unit ramp up to `y_{r+1}(a_{r+1})` (to `y_1(0)` before
/// the period `P`). `P` is the least multiple of `t0` with `P ≥ b_s + M`.
/// Piece errors are left empty.
pub fn splice(spec: &ShadowingSpec) -> Result<ShadowingCertificate> {
    let h = spec.step();
    let ramp = grid_index(RAMP_LENGTH, h)
        .ok_or_else(|| Error::invalid(format!("grid step {h} does not divide the unit ramp length")))?;
    for (r, pc) in spec.pieces.iter().enumerate() {
        node_index(pc.a, h, r + 1)?;
        node_index(pc.b, h, r + 1)?;
        let m = kn_membership(&pc.y, spec.n);
        if !m.member {
            return Err(Error::NotInClass {
                piece: r + 1,
                n: spec.n,
                sup: m.sup_norm,
                slope: m.max_slope,
            });
        }
    }
    let gap = required_gap(spec.delta, spec.n, &spec.v, spec.p)?;
    for r in 1..spec.pieces.len() {
        let g = spec.pieces[r].a - spec.pieces[r - 1].b;
        if g < gap.m {
            return Err(Error::GapTooShort {
                piece: r + 1,
                gap: g,
                required: gap.m,
            });
        }
    }
    let b_s = spec.b_last();
    let k = ((b_s + gap.m) / spec.t0 - 1e-9).ceil().max(1.0);
    let period = k * spec.t0;
    let pn = grid_index(period, h).ok_or_else(|| {
        Error::invalid(format!("period {period} = {k}·t0 is not a multiple of the grid step {h}"))
    })?;
    let kc = ((gap.cut / h) - 1e-9).ceil().max(0.0) as usize;

    let s = spec.pieces.len();
    let mut xs = vec![Complex64::default(); pn];
    for r in 0..s {
        let pc = &spec.pieces[r];
        let ar = node_index(pc.a, h, r + 1)?;
        let br = node_index(pc.b, h, r + 1)?;
        let (next_start, next_val) = if r + 1 < s {
            let nx = node_index(spec.pieces[r + 1].a, h, r + 2)?;
            (nx, spec.pieces[r + 1].y.node(nx))
        } else {
            (pn, spec.pieces[0].y.node(0))
        };
        let end = (br + kc).min(next_start - 2 * ramp);
        for (i, slot) in xs.iter_mut().enumerate().take(end + 1).skip(ar) {
            *slot = pc.y.node(i);
        }
        let z = xs[end];
        for j in 1..=ramp {
            let w = (ramp - j) as f64 / ramp as f64;
            xs[end + j] = z * w;
            xs[next_start - j] = next_val * w;
        }
    }
    let x = GridFunction::periodic(h, xs)?;
    let period_residual = verify::period_residual(&x, period, spec)?;
    Ok(ShadowingCertificate {
        spec: spec.clone(),
        class_check: kn_membership(&x, spec.n),
        x,
        gap: period - b_s,
        required_gap: gap.m,
        cut: gap.cut,
        period,
        lattice: None,
        t_step: 0.0,
        per_piece_errors: Vec::new(),
        per_piece_times: Vec::new(),
        period_residual,
    })
}

/// Smallest `n ≥ 1` with `f ∈ K_n`.
pub fn class_index(f: &GridFunction) -> u32 {
    let need = f.sup_norm().max(f.max_slope()) - CLASS_SLACK;
    need.ceil().max(1.0).min(u32::MAX as f64) as u32
}

/// Shadowing restricted to the lattice `ℕ·t0`: every `a_r`, `b_r` must be an
/// integer multiple of `t0`.
pub fn discrete_osp_check(t0: f64, spec: &ShadowingSpec) -> Result<ShadowingCertificate> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::invalid(format!("t0 must be positive, got {t0}")));
    }
    for (r, pc) in spec.pieces.iter().enumerate() {
        for t in [pc.a, pc.b] {
            if grid_index(t, t0).is_none() {
                return Err(Error::OffLattice {
                    piece: r + 1,
                    time: t,
                    unit: t0,
                });
            }
        }
    }
    let spec = ShadowingSpec { t0, ..spec.clone() };
    let mut cert = construct_shadowing_point(&spec)?;
    cert.lattice = Some(t0);
    Ok(cert)
}

/// Analytic budget `2n·(∫_C^∞ v)^{1/p}` for the far part of each piece error.
pub fn far_error_bound(spec: &ShadowingSpec, cut: f64) -> Result<f64> {
    let tail = spec
        .v
        .tail_integral(cut)?
        .finite()
        .ok_or(Error::NoFiniteGap)?;
    Ok(2.0 * spec.n as f64 * tail.powf(1.0 / spec.p))
}
