//! Plain-text ingestion of observation times.

use std::path::Path;

use crate::error::{Error, Result};

/// Parses whitespace- or comma-separated positive times; `#` starts a
/// comment that runs to the end of its line.
pub fn parse_times(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number {tok:?}", ln + 1)))?;
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Parse(format!(
                    "line {}: times must be positive finite, got {v}",
                    ln + 1
                )));
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("no observations found".into()));
    }
    Ok(out)
}

/// Reads and parses a times file, naming the path in any failure.
pub fn read_times<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    parse_times(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
