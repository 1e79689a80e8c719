//! Bayes point estimates under the loss menu, by posterior expansion and by
//! importance sampling, plus HPD credible intervals from the weighted draws.

use crate::args::{parse_pair, parse_quad, SchemeArgs};
use crate::output::{g9, OutDir};
use lexp::censor::CensoredSample;
use lexp::data::read_times;
use lexp::importance::{equal_tailed, hpd_interval, is_draws, is_estimate, WeightedDraws};
use lexp::lindley::{lindley_report, LossSpec, PriorSpec};
use lexp::sim::rep_rng;
use lexp::Result;
use lexp::Target;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Lindley,
    Is,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct BayesArgs {
    /// Failure-time data file
    pub data: PathBuf,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Independent gamma prior "a,b,c,d" (repeatable)
    #[arg(long, value_parser = parse_quad, required_unless_present = "prior_biv")]
    pub prior: Vec<[f64; 4]>,
    /// Joint prior "c,d", flat in the shape (repeatable)
    #[arg(long, value_parser = parse_pair)]
    pub prior_biv: Vec<(f64, f64)>,
    /// LINEX shape (repeatable; default -0.05, 0.5, 1)
    #[arg(long)]
    pub p: Vec<f64>,
    /// Entropy-loss shape (repeatable; default -0.5, -0.25, 0.25)
    #[arg(long)]
    pub q: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    /// Importance draws per prior
    #[arg(long, default_value_t = 5000)]
    pub n_draws: usize,
    /// Credible level for HPD and equal-tailed intervals (repeatable)
    #[arg(long)]
    pub level: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Persist the weighted draws per prior
    #[arg(long)]
    pub save_draws: bool,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn loss_menu(p: &[f64], q: &[f64]) -> Vec<LossSpec> {
    let p = if p.is_empty() { vec![-0.05, 0.5, 1.0] } else { p.to_vec() };
    let q = if q.is_empty() { vec![-0.5, -0.25, 0.25] } else { q.to_vec() };
    let mut menu = vec![LossSpec::Sq];
    menu.extend(p.iter().map(|&p| LossSpec::Linex { p }));
    menu.extend(q.iter().map(|&q| LossSpec::Ge { q }));
    menu
}

fn estimate_header() -> Vec<&'static str> {
    vec!["target", "prior", "hyperparams", "loss", "shape", "estimate", "status"]
}

fn sampling_rows(
    draws: &WeightedDraws,
    prior: &PriorSpec,
    losses: &[LossSpec],
    rows: &mut Vec<Vec<String>>,
) {
    for target in [Target::Alpha, Target::Lambda] {
        for loss in losses {
            let (est, status) = match is_estimate(draws, loss, target) {
                Ok(v) => (g9(v), "ok".to_string()),
                Err(e) => (String::new(), e.to_string()),
            };
            rows.push(vec![
                target.name().to_string(),
                prior.name().to_string(),
                prior.hyperparams(),
                loss.name().to_string(),
                loss.shape(),
                est,
                status,
            ]);
        }
    }
}

pub fn run(a: BayesArgs) -> Result<()> {
    let mut out = OutDir::new(&a.out)?;
    let times = read_times(&a.data)?;
    let s: CensoredSample = a.scheme.to_sample(times)?;
    let losses = loss_menu(&a.p, &a.q);
    let levels = if a.level.is_empty() { vec![0.95] } else { a.level.clone() };

    let mut priors: Vec<PriorSpec> = a
        .prior
        .iter()
        .map(|&[pa, pb, pc, pd]| PriorSpec::Independent { a: pa, b: pb, c: pc, d: pd })
        .collect();
    priors.extend(a.prior_biv.iter().map(|&(c, d)| PriorSpec::Bivariate { c, d }));
    for p in &priors {
        p.validate()?;
    }

    if matches!(a.method, Method::Lindley | Method::Both) {
        let mut rows = Vec::new();
        for prior in &priors {
            let report = lindley_report(&s, prior, &losses)?;
            for r in report.rows {
                rows.push(vec![
                    r.target.name().to_string(),
                    r.prior.name().to_string(),
                    r.prior.hyperparams(),
                    r.loss.name().to_string(),
                    r.loss.shape(),
                    r.estimate.map(g9).unwrap_or_default(),
                    r.status,
                ]);
            }
        }
        out.write_csv("estimates_lindley.csv", &estimate_header(), &rows)?;
    }

    if matches!(a.method, Method::Is | Method::Both) {
        let mut est_rows = Vec::new();
        let mut hpd_rows = Vec::new();
        for (pi, prior) in priors.iter().enumerate() {
            if matches!(prior, PriorSpec::Bivariate { .. }) {
                out.warn(format!(
                    "sampling unavailable for {} ({}): independent gamma prior required",
                    prior.name(),
                    prior.hyperparams()
                ));
                continue;
            }
            let mut rng = rep_rng(a.seed, 0, 0, 1 + pi as u32);
            match is_draws(&s, prior, a.n_draws, &mut rng) {
                Ok(draws) => {
                    out.warn(format!(
                        "sampling ok for {} ({}): effective sample size {:.1} of {}, \
                         {} rejected proposals",
                        prior.name(),
                        prior.hyperparams(),
                        draws.ess(),
                        draws.len(),
                        draws.rejections()
                    ));
                    sampling_rows(&draws, prior, &losses, &mut est_rows);
                    for &level in &levels {
                        for target in [Target::Alpha, Target::Lambda] {
                            let beta = 1.0 - level;
                            let (row_lo, row_hi, status) =
                                match hpd_interval(&draws, target, beta) {
                                    Ok((lo, hi)) => (g9(lo), g9(hi), "ok".to_string()),
                                    Err(e) => (String::new(), String::new(), e.to_string()),
                                };
                            let (et_lo, et_hi) = match equal_tailed(&draws, target, beta) {
                                Ok((lo, hi)) => (g9(lo), g9(hi)),
                                Err(_) => (String::new(), String::new()),
                            };
                            hpd_rows.push(vec![
                                target.name().to_string(),
                                prior.hyperparams(),
                                g9(level),
                                row_lo,
                                row_hi,
                                et_lo,
                                et_hi,
                                status,
                            ]);
                        }
                    }
                    if a.save_draws {
                        let name = format!("draws_prior{}.csv", pi + 1);
                        let rows: Vec<Vec<String>> = draws
                            .pairs()
                            .iter()
                            .zip(draws.log_w())
                            .map(|(&(al, lm), &lw)| vec![g9(al), g9(lm), g9(lw)])
                            .collect();
                        out.write_csv(&name, &["alpha", "lambda", "log_w"], &rows)?;
                    }
                }
                Err(e) => {
                    out.warn(format!(
                        "sampling unavailable for {} ({}): {e}",
                        prior.name(),
                        prior.hyperparams()
                    ));
                    for target in [Target::Alpha, Target::Lambda] {
                        for loss in &losses {
                            est_rows.push(vec![
                                target.name().to_string(),
                                prior.name().to_string(),
                                prior.hyperparams(),
                                loss.name().to_string(),
                                loss.shape(),
                                String::new(),
                                e.to_string(),
                            ]);
                        }
                    }
                }
            }
        }
        out.write_csv("estimates_is.csv", &estimate_header(), &est_rows)?;
        out.write_csv(
            "hpd.csv",
            &["target", "prior", "level", "lower", "upper", "et_lower", "et_upper", "status"],
            &hpd_rows,
        )?;
    }

    let config = json!({
        "data": a.data.display().to_string(),
        "scheme": a.scheme,
        "priors": priors,
        "losses": losses,
        "method": format!("{:?}", a.method).to_lowercase(),
        "n_draws": a.n_draws,
        "levels": levels,
        "seed": a.seed,
        "save_draws": a.save_draws,
    });
    out.finish("bayes", Some(a.seed), config)
}
