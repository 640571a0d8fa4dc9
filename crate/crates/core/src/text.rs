//! Line-oriented text helpers shared by the checkpoint and CSV writers.

use crate::{Error, Result};

/// Shortest decimal text that parses back to the identical `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn join_f64(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" ")
}

/// Reads `key value...` lines in order, skipping blanks.
pub struct FieldReader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> FieldReader<'a> {
    pub fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate().peekable(),
        }
    }

    fn skip_blank(&mut self) {
        while let Some((_, l)) = self.lines.peek() {
            if l.trim().is_empty() {
                self.lines.next();
            } else {
                break;
            }
        }
    }

    /// Next raw non-blank line.
    pub fn line(&mut self) -> Result<(usize, &'a str)> {
        self.skip_blank();
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| Error::Checkpoint("unexpected end of file".into()))
    }

    pub fn peek_key(&mut self) -> Option<&'a str> {
        self.skip_blank();
        self.lines
            .peek()
            .and_then(|(_, l)| l.split_whitespace().next())
    }

    /// Tokens following `key` on the next line.
    pub fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (n, line) = self.line()?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some(k) if k == key => Ok(tokens.collect()),
            other => Err(Error::Checkpoint(format!(
                "line {n}: expected '{key}', found '{}'",
                other.unwrap_or("")
            ))),
        }
    }

    pub fn expect_one(&mut self, key: &str) -> Result<&'a str> {
        let t = self.expect(key)?;
        match t.as_slice() {
            [v] => Ok(v),
            _ => Err(Error::Checkpoint(format!("'{key}' takes exactly one value"))),
        }
    }

    pub fn expect_usize(&mut self, key: &str) -> Result<usize> {
        let v = self.expect_one(key)?;
        v.parse()
            .map_err(|_| Error::Checkpoint(format!("'{key}': '{v}' is not a count")))
    }

    pub fn expect_f64(&mut self, key: &str) -> Result<f64> {
        let v = self.expect_one(key)?;
        parse_f64(key, v)
    }

    pub fn expect_f64s(&mut self, key: &str, len: usize) -> Result<Vec<f64>> {
        let tokens = self.expect(key)?;
        if tokens.len() != len {
            return Err(Error::Checkpoint(format!(
                "'{key}' has {} values, expected {len}",
                tokens.len()
            )));
        }
        tokens.iter().map(|t| parse_f64(key, t)).collect()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::Checkpoint(format!("'{key}': '{v}' is not a number")))
}
