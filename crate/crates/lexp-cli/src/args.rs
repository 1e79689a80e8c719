//! Flag groups and value parsers shared by the subcommands.

use lexp::censor::{parse_scheme, CensoredSample};
use lexp::error::Error;
use lexp::Result;
use serde::Serialize;

/// How the data file maps onto a life test: either a complete uncensored
/// sample, or a progressive hybrid scheme given in full.
#[derive(Debug, clap::Args, Serialize)]
pub struct SchemeArgs {
    /// Units on test
    #[arg(long)]
    pub n: Option<u32>,
    /// Failures the plan would observe
    #[arg(long)]
    pub m: Option<u32>,
    /// Removal plan shorthand like "(25,0*9)"
    #[arg(long)]
    pub scheme: Option<String>,
    /// Stopping time
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Treat the file as a complete uncensored sample
    #[arg(long, conflicts_with_all = ["n", "m", "scheme", "t"])]
    pub complete: bool,
}

impl SchemeArgs {
    pub fn to_sample(&self, mut times: Vec<f64>) -> Result<CensoredSample> {
        times.sort_by(f64::total_cmp);
        if self.complete {
            return CensoredSample::complete(&times);
        }
        match (self.n, self.m, &self.scheme, self.t) {
            (Some(n), Some(m), Some(plan), Some(t)) => {
                let sch = parse_scheme(plan, n, m, t)?;
                CensoredSample::from_times(sch, times)
            }
            _ => Err(Error::InvalidConfig(
                "describe the sample with --complete or with all of --n, --m, --scheme, --T"
                    .into(),
            )),
        }
    }
}

/// Comma pair "x,y" for flags like --params 1.5,0.75.
pub fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got {s:?}"));
    }
    let a = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

/// Comma quadruple "a,b,c,d" for --prior.
pub fn parse_quad(s: &str) -> std::result::Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected four comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<f64>().map_err(|e| e.to_string())?;
    }
    Ok(out)
}
