//! Line-oriented pump description files.
//!
//! ```text
//! # anything after '#' is ignored
//! type: superposition
//! # ell, p, re, im
//! 0, 0, 1, 0
//! 1, 0, 0, 1
//! ```
//!
//! `type: single` takes one `ell, p` row; `type: singularities` takes
//! `rho, phi_degrees` rows with `rho` in units of the pump waist. Fields
//! may be separated by commas, whitespace, or both. Superposition
//! amplitudes are renormalized on load.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{normalize_pump, PumpSpec, Singularity};
use crate::error::{Error, Result};
use crate::modes::ModeIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Single,
    Superposition,
    Singularities,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect()
}

fn number<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| parse_err(line, format!("cannot read {what} from '{field}'")))
}

pub fn parse_pump_file(text: &str) -> Result<PumpSpec> {
    let mut kind = None;
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            let key = key.trim();
            if key != "type" {
                return Err(parse_err(line_no, format!("unknown header '{key}'")));
            }
            if kind.is_some() {
                return Err(parse_err(line_no, "duplicate 'type:' header"));
            }
            if !rows.is_empty() {
                return Err(parse_err(line_no, "'type:' must precede the data rows"));
            }
            kind = Some(match value.trim() {
                "single" => Kind::Single,
                "superposition" => Kind::Superposition,
                "singularities" => Kind::Singularities,
                other => return Err(parse_err(line_no, format!("unknown pump type '{other}'"))),
            });
            continue;
        }
        if kind.is_none() {
            return Err(parse_err(line_no, "data row before 'type:' header"));
        }
        rows.push((line_no, fields(line)));
    }

    let kind = kind.ok_or_else(|| parse_err(0, "missing 'type:' header"))?;
    match kind {
        Kind::Single => {
            let [(line_no, f)] = rows.as_slice() else {
                return Err(parse_err(0, format!("single pump needs one row, found {}", rows.len())));
            };
            if f.len() != 2 {
                return Err(parse_err(*line_no, "expected 'ell, p'"));
            }
            Ok(PumpSpec::Single(ModeIndex::new(
                number(f[0], *line_no, "ell")?,
                number(f[1], *line_no, "p")?,
            )))
        }
        Kind::Superposition => {
            if rows.is_empty() {
                return Err(parse_err(0, "superposition has no rows"));
            }
            let raw = rows
                .iter()
                .map(|(line_no, f)| {
                    if f.len() != 4 {
                        return Err(parse_err(*line_no, "expected 'ell, p, re, im'"));
                    }
                    let mode = ModeIndex::new(
                        number(f[0], *line_no, "ell")?,
                        number(f[1], *line_no, "p")?,
                    );
                    let a = Complex64::new(
                        number(f[2], *line_no, "re")?,
                        number(f[3], *line_no, "im")?,
                    );
                    Ok((a, mode))
                })
                .collect::<Result<Vec<_>>>()?;
            normalize_pump(&raw)
        }
        Kind::Singularities => rows
            .iter()
            .map(|(line_no, f)| {
                if f.len() != 2 {
                    return Err(parse_err(*line_no, "expected 'rho, phi_degrees'"));
                }
                Singularity::from_degrees(
                    number(f[0], *line_no, "rho")?,
                    number(f[1], *line_no, "phi")?,
                )
                .map_err(|e| parse_err(*line_no, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(PumpSpec::Singularities),
    }
}

/// Writes a pump in the format read by [`parse_pump_file`].
pub fn format_pump_file(pump: &PumpSpec) -> String {
    let mut out = String::new();
    match pump {
        PumpSpec::Single(mode) => {
            out.push_str("type: single\n# ell, p\n");
            let _ = writeln!(out, "{}, {}", mode.ell, mode.p);
        }
        PumpSpec::Superposition(s) => {
            out.push_str("type: superposition\n# ell, p, re, im\n");
            for c in s.components() {
                let _ = writeln!(
                    out,
                    "{}, {}, {:?}, {:?}",
                    c.mode.ell, c.mode.p, c.amplitude.re, c.amplitude.im
                );
            }
        }
        PumpSpec::Singularities(sings) => {
            out.push_str("type: singularities\n# rho, phi_degrees\n");
            for s in sings {
                let _ = writeln!(out, "{:?}, {:?}", s.rho, s.phi.to_degrees());
            }
        }
    }
    out
}
