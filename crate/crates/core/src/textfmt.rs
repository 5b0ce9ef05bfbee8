//! Fixed-precision number formatting shared by every persisted table.
//!
//! Values are written with six digits after the decimal point. Parsing a
//! written value and writing it again reproduces the same text.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub fn format_value(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Appends space-separated values to `out`, with a leading space.
pub fn push_values(out: &mut String, values: &[f64]) {
    for &v in values {
        out.push(' ');
        out.push_str(&format_value(v));
    }
}

pub fn format_row(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 10);
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{}", format_value(v));
    }
    s
}

pub fn parse_value(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("not a number: `{field}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{field}`")));
    }
    Ok(v)
}

/// Parses exactly `expected` whitespace-separated values.
pub fn parse_row<'a>(
    fields: impl Iterator<Item = &'a str>,
    expected: usize,
    line: usize,
) -> Result<Vec<f64>> {
    let values = fields
        .map(|f| parse_value(f, line))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::parse(
            line,
            format!("expected {expected} values, found {}", values.len()),
        ));
    }
    Ok(values)
}
