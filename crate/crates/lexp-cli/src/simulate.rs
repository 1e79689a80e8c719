//! Monte Carlo study driver: reads a config file, runs the replicate grid,
//! and writes the aggregated tables.

use crate::output::{g9, OutDir};
use lexp::error::Error;
use lexp::sim::{run_simulation, SimConfig};
use lexp::Result;
use serde_json::json;
use std::fs;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Study description, .json or .toml
    pub config: PathBuf,
    /// Worker threads per scheme
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    /// Master seed override
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn load_config(path: &PathBuf) -> Result<SimConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let is_toml = path.extension().map(|e| e == "toml").unwrap_or(false);
    if is_toml {
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

pub fn run(a: SimulateArgs) -> Result<()> {
    let mut out = OutDir::new(&a.out)?;
    let mut cfg = load_config(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let table = run_simulation(&cfg, a.shards)?;

    let rows: Vec<Vec<String>> = table
        .estimates
        .iter()
        .map(|r| {
            vec![
                r.scheme.clone(),
                r.target.name().to_string(),
                r.estimator.clone(),
                r.prior.clone(),
                r.loss.clone(),
                g9(r.average),
                g9(r.mse),
                r.used.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "estimates.csv",
        &["scheme", "target", "estimator", "prior", "loss", "average", "mse", "used"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = table
        .intervals
        .iter()
        .map(|r| {
            vec![
                r.scheme.clone(),
                r.target.name().to_string(),
                r.method.clone(),
                r.prior.clone(),
                g9(r.level),
                g9(r.avg_length),
                r.used.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "intervals.csv",
        &["scheme", "target", "method", "prior", "level", "avg_length", "used"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = table
        .coverage
        .iter()
        .map(|r| {
            vec![
                r.scheme.clone(),
                format!("{:?}", r.pivot).to_lowercase(),
                format!("{:?}", r.mode).to_lowercase(),
                g9(r.level),
                g9(r.z),
                g9(r.coverage),
                r.used.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "coverage.csv",
        &["scheme", "pivot", "mode", "level", "z", "coverage", "used"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = table
        .schemes
        .iter()
        .map(|r| {
            let unavailable = r
                .sampling_unavailable
                .iter()
                .map(|(prior, count)| format!("{prior}:{count}"))
                .collect::<Vec<_>>()
                .join(";");
            vec![
                r.scheme.clone(),
                r.requested.to_string(),
                r.used.to_string(),
                r.discarded_degenerate.to_string(),
                r.discarded_fit.to_string(),
                r.redraws.to_string(),
                unavailable,
                r.flagged.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "schemes.csv",
        &[
            "scheme",
            "requested",
            "used",
            "discarded_degenerate",
            "discarded_fit",
            "redraws",
            "sampling_unavailable",
            "flagged",
        ],
        &rows,
    )?;

    for r in &table.schemes {
        let discarded = r.discarded_degenerate + r.discarded_fit;
        if discarded > 0 {
            out.warn(format!(
                "{}: discarded {discarded} of {} replicates ({} degenerate, {} unconverged){}",
                r.scheme,
                r.requested,
                r.discarded_degenerate,
                r.discarded_fit,
                if r.flagged { "; flagged" } else { "" }
            ));
        }
        for (prior, count) in &r.sampling_unavailable {
            out.warn(format!(
                "{}: sampling unavailable for {prior} in {count} of {} replicates",
                r.scheme, r.requested
            ));
        }
    }

    let config = json!({
        "config_file": a.config.display().to_string(),
        "shards": a.shards,
        "study": cfg,
    });
    out.finish("simulate", Some(cfg.seed), config)
}
