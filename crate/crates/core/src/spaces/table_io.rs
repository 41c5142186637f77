//! Plain-text tables for weights and grid functions.
//!
//! A table starts with one metadata line, then a column header, then one
//! comma-separated row per node:
//!
//! ```text
//! # grid-function step=0.01 extension=periodic:12
//! x,value
//! 0,0
//! 0.01,0.01
//! ```
//!
//! Complex grid functions use the header `x,re,im`. Weights write
//! `# weight kind=exp_decay rate=1 admissible=1:1` with no rows for the
//! analytic families and `# weight kind=table compact=true` followed by
//! `x,value` rows for tables. Numbers use the shortest representation that
//! parses back to the same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use super::{Admissibility, Extension, GridFunction, WeightFunction, WeightKind};
use crate::error::{Error, Result};

fn parse_meta(line: &str, tag: &str) -> Result<BTreeMap<String, String>> {
    let rest = line
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|l| l.strip_prefix(tag))
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("expected `# {tag} ...` header"),
        })?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("malformed metadata `{kv}`"),
                })
        })
        .collect()
}

fn num(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        msg: format!("`{s}`: {e}"),
    })
}

fn meta_num(meta: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let v = meta.get(key).ok_or_else(|| Error::Parse {
        line: 1,
        msg: format!("missing `{key}`"),
    })?;
    num(v, 1)
}

fn rows(lines: &[&str], first_line: usize) -> Result<Vec<Vec<f64>>> {
    lines
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.split(',')
                .map(|c| num(c, first_line + k))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

pub fn write_grid_function(f: &GridFunction) -> String {
    let ext = match f.extension() {
        Extension::Zero => "zero".to_string(),
        Extension::Periodic { period } => format!("periodic:{period}"),
    };
    let mut out = format!("# grid-function step={} extension={ext}\n", f.step());
    let complex = !f.is_real();
    out.push_str(if complex { "x,re,im\n" } else { "x,value\n" });
    for (i, z) in f.samples().iter().enumerate() {
        let x = i as f64 * f.step();
        if complex {
            let _ = writeln!(out, "{x},{},{}", z.re, z.im);
        } else {
            let _ = writeln!(out, "{x},{}", z.re);
        }
    }
    out
}

pub fn read_grid_function(text: &str) -> Result<GridFunction> {
    let lines: Vec<&str> = text.lines().collect();
    let meta = parse_meta(lines.first().copied().unwrap_or(""), "grid-function")?;
    let step = meta_num(&meta, "step")?;
    let extension = match meta.get("extension").map(String::as_str) {
        Some("zero") | None => Extension::Zero,
        Some(e) => match e.strip_prefix("periodic:") {
            Some(p) => Extension::Periodic { period: num(p, 1)? },
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("unknown extension `{e}`"),
                })
            }
        },
    };
    let header = lines.get(1).map(|h| h.trim()).unwrap_or("");
    let width = match header {
        "x,value" => 2,
        "x,re,im" => 3,
        other => {
            return Err(Error::Parse {
                line: 2,
                msg: format!("unexpected column header `{other}`"),
            })
        }
    };
    let data = rows(&lines[2..], 3)?;
    let mut samples = Vec::with_capacity(data.len());
    for (k, r) in data.iter().enumerate() {
        if r.len() != width {
            return Err(Error::Parse {
                line: k + 3,
                msg: format!("expected {width} columns, found {}", r.len()),
            });
        }
        samples.push(Complex64::new(r[1], if width == 3 { r[2] } else { 0.0 }));
    }
    GridFunction::new(step, samples, extension)
}

pub fn write_weight(v: &WeightFunction) -> String {
    let mut out = String::from("# weight ");
    match v.kind() {
        WeightKind::ExpDecay { rate } => {
            let _ = write!(out, "kind=exp_decay rate={rate}");
        }
        WeightKind::Constant { level } => {
            let _ = write!(out, "kind=constant level={level}");
        }
        WeightKind::RationalDecay { exponent } => {
            let _ = write!(out, "kind=rational_decay exponent={exponent}");
        }
        WeightKind::Table { compact, .. } => {
            let _ = write!(out, "kind=table compact={compact}");
        }
    }
    if let Some(a) = v.admissible() {
        let _ = write!(out, " admissible={}:{}", a.m, a.w);
    }
    out.push('\n');
    if let WeightKind::Table { xs, values, .. } = v.kind() {
        out.push_str("x,value\n");
        for (x, y) in xs.iter().zip(values) {
            let _ = writeln!(out, "{x},{y}");
        }
    }
    out
}

pub fn read_weight(text: &str) -> Result<WeightFunction> {
    let lines: Vec<&str> = text.lines().collect();
    let meta = parse_meta(lines.first().copied().unwrap_or(""), "weight")?;
    let admissible = match meta.get("admissible") {
        Some(s) => {
            let (m, w) = s.split_once(':').ok_or_else(|| Error::Parse {
                line: 1,
                msg: "admissible must be `M:w`".into(),
            })?;
            Some(Admissibility {
                m: num(m, 1)?,
                w: num(w, 1)?,
            })
        }
        None => None,
    };
    let kind = match meta.get("kind").map(String::as_str) {
        Some("exp_decay") => WeightKind::ExpDecay {
            rate: meta_num(&meta, "rate")?,
        },
        Some("constant") => WeightKind::Constant {
            level: meta_num(&meta, "level")?,
        },
        Some("rational_decay") => WeightKind::RationalDecay {
            exponent: meta_num(&meta, "exponent")?,
        },
        Some("table") => {
            let compact = meta.get("compact").map(String::as_str) == Some("true");
            if lines.get(1).map(|h| h.trim()) != Some("x,value") {
                return Err(Error::Parse {
                    line: 2,
                    msg: "table weights need an `x,value` header".into(),
                });
            }
            let data = rows(&lines[2..], 3)?;
            let mut xs = Vec::with_capacity(data.len());
            let mut values = Vec::with_capacity(data.len());
            for (k, r) in data.iter().enumerate() {
                if r.len() != 2 {
                    return Err(Error::Parse {
                        line: k + 3,
                        msg: format!("expected 2 columns, found {}", r.len()),
                    });
                }
                xs.push(r[0]);
                values.push(r[1]);
            }
            WeightKind::Table { xs, values, compact }
        }
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unknown weight kind {other:?}"),
            })
        }
    };
    WeightFunction::new(kind, admissible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn grid_functions_round_trip(
            vals in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..60),
            step_k in 1u32..50,
            periodic in any::<bool>(),
        ) {
            let step = step_k as f64 / 64.0;
            let samples: Vec<Complex64> = vals.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
            let ext = if periodic {
                Extension::Periodic { period: (samples.len() - 1) as f64 * step }
            } else {
                Extension::Zero
            };
            let f = GridFunction::new(step, samples, ext).unwrap();
            let back = read_grid_function(&write_grid_function(&f)).unwrap();
            prop_assert_eq!(back, f);
        }
    }

    #[test]
    fn weights_round_trip() {
        let ws = vec![
            WeightFunction::exp_decay(1.5).unwrap(),
            WeightFunction::constant(2.0).unwrap(),
            WeightFunction::rational_decay(2.0).unwrap(),
            WeightFunction::table(vec![0.0, 0.5, 1.0], vec![1.0, 0.25, 0.125], true).unwrap(),
        ];
        for w in ws {
            assert_eq!(read_weight(&write_weight(&w)).unwrap(), w);
        }
    }

    #[test]
    fn malformed_rows_report_line() {
        let err = read_grid_function("# grid-function step=0.5 extension=zero\nx,value\n0,1\n0.5\n")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }
}
