//! Text form of a shadowing certificate.
//!
//! ```text
//! # shadowing-certificate
//! delta=0.4 n=1 p=1 t0=1 t_step=0.01
//! period=12 gap=5 required_gap=4.302585092994046 cut=2.302585092994046 lattice=none
//! period_residual=0 class_member=true class_sup=1 class_slope=1
//! piece=1 a=0 b=1 error=0.0012 at=0.5
//! @@ weight
//! # weight kind=exp_decay rate=1 admissible=1:1
//! @@ x
//! # grid-function step=0.01 extension=periodic:12
//! ...
//! @@ y 1
//! ...
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Membership, Piece, ShadowingCertificate, ShadowingSpec};
use crate::error::{Error, Result};
use crate::spaces::table_io::{read_grid_function, read_weight, write_grid_function, write_weight};

pub fn write_certificate(c: &ShadowingCertificate) -> String {
    let s = &c.spec;
    let mut out = String::from("# shadowing-certificate\n");
    let _ = writeln!(out, "delta={} n={} p={} t0={} t_step={}", s.delta, s.n, s.p, s.t0, c.t_step);
    let lattice = c.lattice.map_or("none".to_string(), |l| l.to_string());
    let _ = writeln!(
        out,
        "period={} gap={} required_gap={} cut={} lattice={lattice}",
        c.period, c.gap, c.required_gap, c.cut
    );
    let _ = writeln!(
        out,
        "period_residual={} class_member={} class_sup={} class_slope={}",
        c.period_residual, c.class_check.member, c.class_check.sup_norm, c.class_check.max_slope
    );
    for (r, pc) in s.pieces.iter().enumerate() {
        let _ = writeln!(
            out,
            "piece={} a={} b={} error={} at={}",
            r + 1,
            pc.a,
            pc.b,
            c.per_piece_errors.get(r).copied().unwrap_or(f64::NAN),
            c.per_piece_times.get(r).copied().unwrap_or(f64::NAN)
        );
    }
    out.push_str("@@ weight\n");
    out.push_str(&write_weight(&s.v));
    out.push_str("@@ x\n");
    out.push_str(&write_grid_function(&c.x));
    for (r, pc) in s.pieces.iter().enumerate() {
        let _ = writeln!(out, "@@ y {}", r + 1);
        out.push_str(&write_grid_function(&pc.y));
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_kv(line: &str, lineno: usize) -> Result<BTreeMap<&str, &str>> {
    line.split_whitespace()
        .map(|kv| kv.split_once('=').ok_or_else(|| perr(lineno, format!("expected key=value, got `{kv}`"))))
        .collect()
}

fn get<'a>(m: &BTreeMap<&str, &'a str>, key: &str, line: usize) -> Result<&'a str> {
    m.get(key).copied().ok_or_else(|| perr(line, format!("missing `{key}`")))
}

fn getf(m: &BTreeMap<&str, &str>, key: &str, line: usize) -> Result<f64> {
    get(m, key, line)?
        .parse()
        .map_err(|e| perr(line, format!("`{key}`: {e}")))
}

/// Offsets parse errors inside an embedded table to file line numbers.
fn shift_line(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { line, msg } => Error::Parse { line: line + offset, msg },
        other => other,
    }
}

pub fn read_certificate(text: &str) -> Result<ShadowingCertificate> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().map(|l| l.trim()) != Some("# shadowing-certificate") {
        return Err(perr(1, "expected `# shadowing-certificate` header"));
    }
    let mut scalars: BTreeMap<&str, (&str, usize)> = BTreeMap::new();
    let mut piece_rows = Vec::new();
    let mut blocks: Vec<(&str, usize, Vec<&str>)> = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        let lineno = i + 1;
        if let Some(name) = line.strip_prefix("@@ ") {
            blocks.push((name.trim(), lineno, Vec::new()));
        } else if let Some(b) = blocks.last_mut() {
            b.2.push(line);
        } else if line.starts_with("piece=") {
            piece_rows.push((parse_kv(line, lineno)?, lineno));
        } else if !line.trim().is_empty() {
            for (k, v) in parse_kv(line, lineno)? {
                scalars.insert(k, (v, lineno));
            }
        }
    }
    let flat: BTreeMap<&str, &str> = scalars.iter().map(|(k, (v, _))| (*k, *v)).collect();
    let num = |k: &str| getf(&flat, k, scalars.get(k).map_or(2, |s| s.1));

    let block = |name: &str| -> Result<(String, usize)> {
        blocks
            .iter()
            .find(|b| b.0 == name)
            .map(|b| (b.2.join("\n"), b.1))
            .ok_or_else(|| perr(lines.len(), format!("missing `@@ {name}` block")))
    };
    let (wtext, wline) = block("weight")?;
    let v = read_weight(&wtext).map_err(|e| shift_line(e, wline))?;
    let (xtext, xline) = block("x")?;
    let x = read_grid_function(&xtext).map_err(|e| shift_line(e, xline))?;

    let mut pieces = Vec::new();
    let mut errors = Vec::new();
    let mut times = Vec::new();
    for (r, (row, lineno)) in piece_rows.iter().enumerate() {
        let (ytext, yline) = block(&format!("y {}", r + 1))?;
        let y = read_grid_function(&ytext).map_err(|e| shift_line(e, yline))?;
        pieces.push(Piece {
            y,
            a: getf(row, "a", *lineno)?,
            b: getf(row, "b", *lineno)?,
        });
        errors.push(getf(row, "error", *lineno)?);
        times.push(getf(row, "at", *lineno)?);
    }
    let n = num("n")?;
    if n < 1.0 || n.fract() != 0.0 || n > u32::MAX as f64 {
        return Err(perr(2, format!("n must be a positive integer, got {n}")));
    }
    let spec = ShadowingSpec::new(pieces, num("delta")?, n as u32, num("t0")?, num("p")?, v)?;
    let lattice = match flat.get("lattice") {
        None | Some(&"none") => None,
        Some(_) => Some(num("lattice")?),
    };
    let member = match flat.get("class_member") {
        Some(&"true") => true,
        Some(&"false") => false,
        _ => return Err(perr(4, "class_member must be true or false")),
    };
    Ok(ShadowingCertificate {
        spec,
        x,
        gap: num("gap")?,
        required_gap: num("required_gap")?,
        cut: num("cut")?,
        period: num("period")?,
        lattice,
        t_step: num("t_step")?,
        per_piece_errors: errors,
        per_piece_times: times,
        period_residual: num("period_residual")?,
        class_check: Membership {
            member,
            sup_norm: num("class_sup")?,
            max_slope: num("class_slope")?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::super::{construct_shadowing_point, tests::tent_spec, RECORD_TOLERANCE};
    use super::*;

    #[test]
    fn round_trip_and_reverify() {
        let cert = construct_shadowing_point(&tent_spec()).unwrap();
        let text = write_certificate(&cert);
        let back = read_certificate(&text).unwrap();
        assert_eq!(back, cert);
        let r = back.reverify().unwrap();
        assert!(r.pass, "{:?}", r.failures);
        for (p, e) in r.pieces.iter().zip(&cert.per_piece_errors) {
            assert!((p.max_error - e).abs() <= RECORD_TOLERANCE);
        }
    }

    #[test]
    fn missing_block_is_reported() {
        let cert = construct_shadowing_point(&tent_spec()).unwrap();
        let text = write_certificate(&cert);
        let cut = text.split("@@ y 2").next().unwrap();
        assert!(matches!(read_certificate(cut), Err(Error::Parse { .. })));
    }
}
