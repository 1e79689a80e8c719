//! Draws censored samples from a scheme and writes them as JSON lines,
//! one replicate per line, using the same per-replicate streams the
//! simulation harness uses for its first scheme.

use crate::args::parse_pair;
use crate::output::OutDir;
use lexp::censor::{generate_sample, parse_scheme};
use lexp::dist::Params;
use lexp::sim::rep_rng;
use lexp::Result;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct SampleArgs {
    /// Units on test
    #[arg(long)]
    pub n: u32,
    /// Failures the plan would observe
    #[arg(long)]
    pub m: u32,
    /// Removal plan shorthand like "(25,0*9)"
    #[arg(long)]
    pub scheme: String,
    /// Stopping time
    #[arg(long = "T")]
    pub t: f64,
    /// True parameters "alpha,lambda"
    #[arg(long, value_parser = parse_pair)]
    pub params: (f64, f64),
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples to draw
    #[arg(long, default_value_t = 1)]
    pub reps: u32,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn run(a: SampleArgs) -> Result<()> {
    let mut out = OutDir::new(&a.out)?;
    let scheme = parse_scheme(&a.scheme, a.n, a.m, a.t)?;
    let params = Params::new(a.params.0, a.params.1)?;
    let mut lines = String::new();
    for rep in 0..a.reps {
        let mut rng = rep_rng(a.seed, 0, rep, 0);
        let s = generate_sample(&scheme, params, &mut rng);
        lines.push_str(&serde_json::to_string(&s).expect("sample serializes"));
        lines.push('\n');
    }
    out.write("samples.jsonl", &lines)?;

    let config = json!({
        "n": a.n,
        "m": a.m,
        "scheme": a.scheme,
        "T": a.t,
        "params": { "alpha": a.params.0, "lambda": a.params.1 },
        "seed": a.seed,
        "reps": a.reps,
    });
    out.finish("sample", Some(a.seed), config)
}
