//! Readers and writers for every on-disk artifact.
//!
//! Text formats write floats with Rust's shortest round-trip `Display`, so
//! `write ∘ read ∘ write` is byte-stable.

pub mod annotations;
pub mod calibration;
pub mod mot;
pub mod pgm;
pub mod report;
pub mod track3d;

use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// `column` is the 1-based field index.
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { found: String, expected: &'static str },
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("truncated file: expected {expected} bytes of pixel data, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl FormatError {
    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema { pointer: pointer.into(), message: message.into() }
    }
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| FormatError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

/// Splits a comma-separated line and parses each field.
pub(crate) struct Fields<'a> {
    line: usize,
    parts: Vec<&'a str>,
}

impl<'a> Fields<'a> {
    pub fn split(line_no: usize, line: &'a str, expected: usize) -> Result<Self, FormatError> {
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != expected {
            return Err(FormatError::Parse {
                line: line_no,
                column: parts.len().min(expected) + 1,
                message: format!("expected {expected} fields, found {}", parts.len()),
            });
        }
        Ok(Self { line: line_no, parts })
    }

    pub fn err(&self, column: usize, message: impl Into<String>) -> FormatError {
        FormatError::Parse { line: self.line, column, message: message.into() }
    }

    pub fn str(&self, column: usize) -> &'a str {
        self.parts[column - 1]
    }

    pub fn parse<T: std::str::FromStr>(&self, column: usize) -> Result<T, FormatError> {
        let raw = self.str(column);
        raw.parse().map_err(|_| self.err(column, format!("cannot parse {raw:?}")))
    }

    pub fn float(&self, column: usize) -> Result<f64, FormatError> {
        let v: f64 = self.parse(column)?;
        if !v.is_finite() {
            return Err(self.err(column, "non-finite value"));
        }
        Ok(v)
    }

    pub fn positive(&self, column: usize) -> Result<f64, FormatError> {
        let v = self.float(column)?;
        if !(v > 0.0) {
            return Err(self.err(column, format!("{v} must be positive")));
        }
        Ok(v)
    }
}

/// Non-empty lines with their 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}
