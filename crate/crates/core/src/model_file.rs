//! Line-oriented text container shared by the ANFIS and MLP model files.
//!
//! ```text
//! format_version 1
//! kind anfis
//! vocabulary left,right,up,down
//! ...kind-specific body...
//! ```
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Anfis,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Anfis => "anfis",
            ModelKind::Mlp => "mlp",
        }
    }
}

pub(crate) fn write_header(out: &mut String, kind: ModelKind, vocab: &Vocabulary) {
    let _ = writeln!(out, "format_version {FORMAT_VERSION}");
    let _ = writeln!(out, "kind {}", kind.as_str());
    let _ = writeln!(out, "vocabulary {vocab}");
}

pub(crate) fn write_reals(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    for v in values {
        let _ = write!(out, " {v:.16e}");
    }
    out.push('\n');
}

/// Sequential reader over non-blank lines, tracking 1-based line numbers.
pub(crate) struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self {
            inner: it.peekable(),
            last_line: 0,
        }
    }

    pub fn error(&self, reason: impl Into<String>) -> Error {
        Error::Model(format!("line {}: {}", self.last_line, reason.into()))
    }

    /// Next line, which must start with `key`; returns the remainder.
    pub fn expect(&mut self, key: &str) -> Result<&'a str> {
        let (n, line) = self
            .inner
            .next()
            .ok_or_else(|| Error::Model(format!("unexpected end of file, expected '{key}'")))?;
        self.last_line = n;
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        if head != key {
            return Err(self.error(format!("expected '{key}', found '{head}'")));
        }
        Ok(rest.trim())
    }

    pub fn expect_usize(&mut self, key: &str) -> Result<usize> {
        let rest = self.expect(key)?;
        rest.parse().map_err(|_| self.error(format!("'{key}' needs a count, found '{rest}'")))
    }

    pub fn expect_reals(&mut self, key: &str, count: usize) -> Result<Vec<f64>> {
        let rest = self.expect(key)?;
        let values = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.error(format!("bad real '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != count {
            return Err(self.error(format!("'{key}' needs {count} values, found {}", values.len())));
        }
        Ok(values)
    }

    pub fn finish(&mut self) -> Result<()> {
        if let Some((n, l)) = self.inner.next() {
            self.last_line = n;
            return Err(self.error(format!("trailing content '{l}'")));
        }
        Ok(())
    }
}

/// Reads and checks the common header.
pub(crate) fn read_header<'a>(text: &'a str) -> Result<(ModelKind, Vocabulary, Lines<'a>)> {
    let mut lines = Lines::new(text);
    let version = lines.expect("format_version")?;
    if version != FORMAT_VERSION.to_string() {
        return Err(lines.error(format!("unsupported format_version '{version}'")));
    }
    let kind = match lines.expect("kind")? {
        "anfis" => ModelKind::Anfis,
        "mlp" => ModelKind::Mlp,
        other => return Err(lines.error(format!("unknown model kind '{other}'"))),
    };
    let vocab_text = lines.expect("vocabulary")?;
    let vocab = Vocabulary::parse(vocab_text).map_err(|e| lines.error(e.to_string()))?;
    Ok((kind, vocab, lines))
}

pub fn model_kind(text: &str) -> Result<ModelKind> {
    Ok(read_header(text)?.0)
}
