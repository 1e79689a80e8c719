//! Deterministic file emission: nine-significant-digit numbers, RFC 4180
//! quoting, and a run manifest that digests every file it lists.

use lexp::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// %.9g-style rendering: nine significant digits, plain notation for
/// moderate exponents, trailing zeros trimmed.
pub fn g9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponential form");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..9).contains(&exp) {
        let prec = (8 - exp).max(0) as usize;
        trim_fraction(format!("{x:.prec$}"))
    } else {
        format!("{}e{exp}", trim_fraction(mant.to_string()))
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

pub fn opt_g9(x: Option<f64>) -> String {
    x.map(g9).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_digest: String,
    master_seed: Option<u64>,
    library_version: String,
    wall_time_ms: u64,
    warnings: Vec<String>,
    outputs: BTreeMap<String, String>,
    effective_config: serde_json::Value,
}

/// Collects output files in one directory and finishes with manifest.json,
/// which lists every earlier file with its content digest.
pub struct OutDir {
    dir: PathBuf,
    outputs: BTreeMap<String, String>,
    warnings: Vec<String>,
    started: Instant,
}

impl OutDir {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            outputs: BTreeMap::new(),
            warnings: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<()> {
        fs::write(self.dir.join(name), content)?;
        self.outputs.insert(name.to_string(), sha256_hex(content.as_bytes()));
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), header.len(), "ragged row in {name}");
            let line: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
            text.push_str(&line.join(","));
            text.push('\n');
        }
        self.write(name, &text)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn warn(&mut self, msg: String) {
        self.warnings.push(msg);
    }

    /// Writes manifest.json last. The wall time is informational and is the
    /// one field that varies between otherwise identical runs.
    pub fn finish(
        self,
        command: &str,
        master_seed: Option<u64>,
        effective_config: serde_json::Value,
    ) -> Result<()> {
        let config_digest =
            sha256_hex(serde_json::to_string(&effective_config).expect("config").as_bytes());
        let manifest = RunManifest {
            command: command.to_string(),
            config_digest,
            master_seed,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: self.started.elapsed().as_millis() as u64,
            warnings: self.warnings,
            outputs: self.outputs,
            effective_config,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest");
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}
