use rayon::prelude::*;
use serde::Serialize;

use super::{kn_membership, kn_violation, Membership, ShadowingCertificate, ShadowingSpec};
use crate::error::{Error, Result};
use crate::semigroup::translate;
use crate::spaces::{grid_index, lp_v_distance, lp_v_norm, Difference, GridFunction, Shifted};

pub const DEFAULT_T_STEP: f64 = 0.01;
/// Recorded errors must be reproduced this closely on re-verification.
pub const RECORD_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PieceReport {
    pub piece: usize,
    pub max_error: f64,
    pub at_time: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pieces: Vec<PieceReport>,
    pub period_residual: f64,
    pub class_check: Membership,
    /// First position where `x` leaves `K_n`.
    pub class_violation_at: Option<f64>,
    /// Sup-norm resampling bound for off-grid times (zero on the grid).
    pub interpolation_bound: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

pub(crate) fn sample_times(a: f64, b: f64, t_step: f64) -> Vec<f64> {
    let k = ((b - a) / t_step + 1e-9).floor() as usize;
    let mut ts: Vec<f64> = (0..=k).map(|j| a + j as f64 * t_step).collect();
    if let Some(&last) = ts.last() {
        if b - last > 1e-9 * b.abs().max(1.0) {
            ts.push(b);
        }
    }
    ts
}

/// `‖T_t x - T_t y‖` and the resampling bound used.
pub(crate) fn orbit_distance(
    x: &GridFunction,
    y: &GridFunction,
    t: f64,
    spec: &ShadowingSpec,
) -> Result<(f64, f64)> {
    let h = x.step();
    match grid_index(t, h) {
        Some(k) => {
            let (sx, sy) = (Shifted::new(x, k), Shifted::new(y, k));
            Ok((lp_v_norm(&Difference::new(&sx, &sy)?, &spec.v, spec.p)?.upper(), 0.0))
        }
        None => {
            let (tx, ty) = (translate(x, t)?, translate(y, t)?);
            let bound = (x.max_slope() + y.max_slope()) * h;
            Ok((lp_v_distance(&tx, &ty, &spec.v, spec.p)?.upper(), bound))
        }
    }
}

/// `‖T_P x - x‖` with the shift done on node indices.
pub(crate) fn period_residual(x: &GridFunction, period: f64, spec: &ShadowingSpec) -> Result<f64> {
    Ok(match grid_index(period, x.step()) {
        Some(k) => lp_v_norm(&Difference::new(&Shifted::new(x, k), x)?, &spec.v, spec.p)?.upper(),
        None => f64::INFINITY,
    })
}

/// Errors per piece, period residual and class check, without judging them.
pub(crate) fn measure(
    cert: &ShadowingCertificate,
    spec: &ShadowingSpec,
    t_step: f64,
) -> Result<VerificationReport> {
    if !(t_step > 0.0 && t_step.is_finite()) {
        return Err(Error::invalid(format!("t_step must be positive, got {t_step}")));
    }
    if cert.x.step() != spec.step() {
        return Err(Error::GridMismatch(format!(
            "certificate step {} vs spec step {}",
            cert.x.step(),
            spec.step()
        )));
    }
    let mut pieces = Vec::with_capacity(spec.pieces.len());
    let mut interp = 0.0f64;
    for (r, pc) in spec.pieces.iter().enumerate() {
        let ts = sample_times(pc.a, pc.b, t_step);
        let errs: Vec<(f64, f64, f64)> = ts
            .par_iter()
            .map(|&t| orbit_distance(&cert.x, &pc.y, t, spec).map(|(e, b)| (t, e, b)))
            .collect::<Result<_>>()?;
        let (at_time, max_error) = errs
            .iter()
            .fold((pc.a, 0.0f64), |acc, &(t, e, _)| if e > acc.1 { (t, e) } else { acc });
        interp = errs.iter().fold(interp, |m, e| m.max(e.2));
        pieces.push(PieceReport {
            piece: r + 1,
            max_error,
            at_time,
            samples: ts.len(),
        });
    }
    let period_residual = period_residual(&cert.x, cert.period, spec)?;
    let class_check = kn_membership(&cert.x, spec.n);
    Ok(VerificationReport {
        pieces,
        period_residual,
        class_violation_at: if class_check.member { None } else { kn_violation(&cert.x, spec.n) },
        class_check,
        interpolation_bound: interp,
        failures: Vec::new(),
        pass: false,
    })
}

/// Samples each `[a_r, b_r]` at `t_step` and checks
/// `‖T_t x - T_t y_r‖ < δ`, `T_P x = x` on the nodes, `x ∈ K_n`, and, when
/// the certificate was recorded at the same `t_step`, that its recorded errors
/// are reproduced within [`RECORD_TOLERANCE`].
pub fn verify_shadowing(
    cert: &ShadowingCertificate,
    spec: &ShadowingSpec,
    t_step: f64,
) -> Result<VerificationReport> {
    let mut report = measure(cert, spec, t_step)?;
    let mut failures = Vec::new();
    for pr in &report.pieces {
        if !(pr.max_error < spec.delta) {
            failures.push(format!(
                "piece {}: error {} at t = {} is not below delta = {}",
                pr.piece, pr.max_error, pr.at_time, spec.delta
            ));
        }
    }
    if report.period_residual != 0.0 {
        failures.push(format!(
            "period residual {} at P = {} is not zero",
            report.period_residual, cert.period
        ));
    }
    if !report.class_check.member {
        failures.push(format!(
            "x leaves K_{} at x = {} (sup {}, slope {})",
            spec.n,
            report.class_violation_at.unwrap_or(f64::NAN),
            report.class_check.sup_norm,
            report.class_check.max_slope
        ));
    }
    if cert.t_step == t_step && !cert.per_piece_errors.is_empty() {
        for (pr, (&rec, &at)) in report
            .pieces
            .iter()
            .zip(cert.per_piece_errors.iter().zip(&cert.per_piece_times))
        {
            if (pr.max_error - rec).abs() > RECORD_TOLERANCE {
                failures.push(format!(
                    "piece {}: recorded error {} (t = {}) does not match measured {} (t = {})",
                    pr.piece, rec, at, pr.max_error, pr.at_time
                ));
            }
        }
    }
    report.pass = failures.is_empty();
    report.failures = failures;
    Ok(report)
}

impl ShadowingCertificate {
    /// Verification against the embedded spec at the recorded step.
    pub fn reverify(&self) -> Result<VerificationReport> {
        verify_shadowing(self, &self.spec, self.t_step)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{construct_shadowing_point, tests::tent_spec};
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn tent_certificate_passes() {
        let spec = tent_spec();
        let cert = construct_shadowing_point(&spec).unwrap();
        let r = verify_shadowing(&cert, &spec, 0.01).unwrap();
        assert!(r.pass, "{:?}", r.failures);
        assert!(r.pieces.iter().all(|p| p.max_error < 0.4));
        assert_eq!(r.interpolation_bound, 0.0);
    }

    #[test]
    fn off_grid_step_reports_interpolation() {
        let spec = tent_spec();
        let cert = construct_shadowing_point(&spec).unwrap();
        let r = verify_shadowing(&cert, &spec, 0.0137).unwrap();
        assert!(r.pass, "{:?}", r.failures);
        assert!(r.interpolation_bound > 0.0);
    }

    #[test]
    fn tampering_is_located() {
        let spec = tent_spec();
        let mut cert = construct_shadowing_point(&spec).unwrap();
        let mut xs = cert.x.samples()[..cert.x.period_nodes().unwrap()].to_vec();
        xs[150] += Complex64::new(spec.delta, 0.0);
        cert.x = GridFunction::periodic(0.01, xs).unwrap();
        let r = verify_shadowing(&cert, &spec, 0.01).unwrap();
        assert!(!r.pass);
        let at = r.class_violation_at.unwrap();
        assert!((1.49..=1.5).contains(&at), "{at}");
        assert!(r.failures.iter().any(|f| f.contains("recorded error")));
    }

    #[test]
    fn sample_times_include_endpoints() {
        assert_eq!(sample_times(0.0, 0.0, 0.01), vec![0.0]);
        let ts = sample_times(6.0, 7.0, 0.3);
        assert_eq!(ts.first(), Some(&6.0));
        assert_eq!(ts.last(), Some(&7.0));
    }
}
