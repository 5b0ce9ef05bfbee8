//! Line-oriented model files: a magic line, `key value` header fields,
//! token lists and named tensors in the shared fixed-precision format.

use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::math::Matrix;
use crate::textfmt::{format_row, parse_row};

#[derive(Default)]
pub struct Writer {
    out: String,
}

impl Writer {
    pub fn new(magic: &str) -> Self {
        Writer {
            out: format!("{magic}\n"),
        }
    }

    pub fn field(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.out.push_str(&format!("{key} {value}\n"));
        self
    }

    pub fn list(&mut self, key: &str, items: &[String]) -> &mut Self {
        self.out.push_str(&format!("{key} {}\n", items.len()));
        for item in items {
            self.out.push_str(item);
            self.out.push('\n');
        }
        self
    }

    pub fn tensor(&mut self, name: &str, m: &Matrix) -> &mut Self {
        self.out
            .push_str(&format!("tensor {name} {} {}\n", m.rows(), m.cols()));
        for row in m.iter_rows() {
            self.out.push_str(&format_row(row));
            self.out.push('\n');
        }
        self
    }

    pub fn finish(&mut self) -> String {
        self.out.push_str("end\n");
        std::mem::take(&mut self.out)
    }
}

pub struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(text: &'a str, magic: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.first().copied() != Some(magic) {
            return Err(Error::field(
                "magic",
                format!("expected first line `{magic}`"),
            ));
        }
        Ok(Reader { lines, pos: 1 })
    }

    fn next_line(&mut self, field: &str) -> Result<&'a str> {
        let line = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::field(field, "unexpected end of file"))?;
        self.pos += 1;
        Ok(line)
    }

    pub fn field_str(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(Error::field(
                key,
                format!("expected `{key} <value>` on line {}", self.pos),
            )),
        }
    }

    pub fn field<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let raw = self.field_str(key)?;
        raw.parse()
            .map_err(|e| Error::field(key, format!("cannot parse `{raw}`: {e}")))
    }

    pub fn list(&mut self, key: &str) -> Result<Vec<String>> {
        let n: usize = self.field(key)?;
        (0..n)
            .map(|_| self.next_line(key).map(str::to_string))
            .collect()
    }

    pub fn tensor(&mut self, name: &str) -> Result<Matrix> {
        let header = self.next_line(name)?;
        let parts: Vec<&str> = header.split(' ').collect();
        let shape = match parts.as_slice() {
            ["tensor", n, r, c] if *n == name => {
                r.parse::<usize>().ok().zip(c.parse::<usize>().ok())
            }
            _ => None,
        };
        let (rows, cols) = shape.ok_or_else(|| {
            Error::field(
                name,
                format!("expected `tensor {name} ROWS COLS` on line {}", self.pos),
            )
        })?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = self.next_line(name)?;
            let row = if cols == 0 {
                if line.is_empty() {
                    Vec::new()
                } else {
                    parse_row(line.split(' '), 0, self.pos)?
                }
            } else {
                parse_row(line.split(' '), cols, self.pos)
                    .map_err(|e| Error::field(name, e.to_string()))?
            };
            data.extend(row);
        }
        Ok(Matrix::from_vec(rows, cols, data))
    }

    pub fn finish(mut self) -> Result<()> {
        let line = self.next_line("end")?;
        if line != "end" {
            return Err(Error::field(
                "end",
                format!("unexpected content on line {}", self.pos),
            ));
        }
        if self.lines[self.pos..].iter().any(|l| !l.is_empty()) {
            return Err(Error::field("end", "trailing content after `end`"));
        }
        Ok(())
    }
}

/// Checks that a tensor read from disk has the expected shape.
pub fn expect_shape(name: &str, m: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if m.rows() != rows || m.cols() != cols {
        return Err(Error::field(
            name,
            format!("shape {}x{}, expected {rows}x{cols}", m.rows(), m.cols()),
        ));
    }
    Ok(())
}
