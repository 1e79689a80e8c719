//! Monte Carlo harness: replicated progressive hybrid samples per scheme,
//! point estimates under the loss menu, interval lengths, and pivotal
//! coverage, aggregated deterministically so shard splits merge exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::censor::{generate_sample, CensoringScheme};
use crate::dist::Params;
use crate::error::{Error, Result};
use crate::importance::{hpd_interval, is_draws, is_estimate};
use crate::lik::deriv_bundle;
use crate::lindley::{lindley_with_bundle, LossSpec, PriorSpec};
use crate::mle::{fit_mle, na_interval, nl_interval, FitOptions, MleFit};
use crate::special::normal_quantile;
use crate::Target;

const MAX_REDRAWS: u32 = 10_000;

/// One design row: sample size, observed count, removal plan, time cap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub n: u32,
    pub m: u32,
    pub removals: Vec<u32>,
    pub t: f64,
}

impl SchemeSpec {
    pub fn to_scheme(&self) -> Result<CensoringScheme> {
        CensoringScheme::new(self.n, self.m, self.removals.clone(), self.t)
    }

    /// Compact key like "n=35 m=10 R=(25,0*9) T=0.5".
    pub fn label(&self) -> String {
        let plan = match self.to_scheme() {
            Ok(s) => s.shorthand(),
            Err(_) => format!("{:?}", self.removals),
        };
        format!("n={} m={} R={} T={}", self.n, self.m, plan, self.t)
    }
}

fn default_p_grid() -> Vec<f64> {
    vec![-0.05, 0.5, 1.0]
}

fn default_q_grid() -> Vec<f64> {
    vec![-0.5, -0.25, 0.25]
}

fn default_levels() -> Vec<f64> {
    vec![0.95]
}

fn default_n_is() -> usize {
    5000
}

/// Full study description; the master seed plus a replicate index determine
/// every random stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub truth: Params,
    pub schemes: Vec<SchemeSpec>,
    pub replicates: u32,
    #[serde(default)]
    pub priors: Vec<PriorSpec>,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "default_q_grid")]
    pub q_grid: Vec<f64>,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    pub seed: u64,
    #[serde(default = "default_n_is")]
    pub n_is: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::InvalidConfig("need at least one replicate".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("need at least one scheme".into()));
        }
        for s in &self.schemes {
            s.to_scheme()?;
        }
        for p in &self.priors {
            p.validate()?;
        }
        if self.p_grid.is_empty() || self.q_grid.is_empty() {
            return Err(Error::InvalidConfig("loss grids must be nonempty".into()));
        }
        for &p in &self.p_grid {
            LossSpec::Linex { p }.validate()?;
        }
        for &q in &self.q_grid {
            LossSpec::Ge { q }.validate()?;
        }
        if self.levels.is_empty() {
            return Err(Error::InvalidConfig("need at least one confidence level".into()));
        }
        for &l in &self.levels {
            if !(l > 0.0 && l < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "confidence level must lie in (0,1), got {l}"
                )));
            }
        }
        if self.n_is < 2 {
            return Err(Error::InvalidConfig("need at least two posterior draws".into()));
        }
        Ok(())
    }

    /// Squared-error plus the configured entropy and linex shapes.
    pub fn loss_menu(&self) -> Vec<LossSpec> {
        let mut menu = vec![LossSpec::Sq];
        menu.extend(self.p_grid.iter().map(|&p| LossSpec::Linex { p }));
        menu.extend(self.q_grid.iter().map(|&q| LossSpec::Ge { q }));
        menu
    }
}

/// Deterministic per-replicate generator. Stream 0 drives sample
/// generation; stream 1+i drives importance draws for prior i.
pub fn rep_rng(master: u64, scheme_idx: u32, rep: u32, stream: u32) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master.to_le_bytes());
    seed[8..12].copy_from_slice(&scheme_idx.to_le_bytes());
    seed[12..16].copy_from_slice(&rep.to_le_bytes());
    seed[16..20].copy_from_slice(&stream.to_le_bytes());
    seed[20..28].copy_from_slice(&0x9E37_79B9_7F4A_7C15u64.to_le_bytes());
    ChaCha12Rng::from_seed(seed)
}

/// Recursive halving sum; the bracketing is a function of length alone, so
/// the result is independent of how the work was sharded.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Mean squared deviation from the truth.
pub fn mse(values: &[f64], truth: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - truth) * (v - truth)).collect();
    pairwise_sum(&sq) / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pivot {
    Q1,
    Q2,
    Q3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotMode {
    /// Denominators exactly as the study tables print them, with the extra
    /// parameter multiplier.
    Printed,
    /// Plain standard-error denominators.
    Corrected,
}

/// Standardized deviation of a fit from the truth under one pivot form.
pub fn pivot_value(fit: &MleFit, truth: Params, pivot: Pivot, mode: PivotMode) -> f64 {
    let (ah, lh) = (fit.params.alpha(), fit.params.lambda());
    let s11 = fit.tau[0][0].sqrt();
    let s22 = fit.tau[1][1].sqrt();
    match (pivot, mode) {
        (Pivot::Q1, PivotMode::Printed) => (ah - truth.alpha()) / (lh * s11),
        (Pivot::Q2, PivotMode::Printed) => (ah - truth.alpha()) / (truth.lambda() * s11),
        (Pivot::Q3, PivotMode::Printed) => (lh - truth.lambda()) / (lh * s22),
        (Pivot::Q1 | Pivot::Q2, PivotMode::Corrected) => (ah - truth.alpha()) / s11,
        (Pivot::Q3, PivotMode::Corrected) => (lh - truth.lambda()) / s22,
    }
}

/// Fraction of fits whose pivot lands in [-z, z].
pub fn coverage(fits: &[(MleFit, Params)], pivot: Pivot, mode: PivotMode, z: f64) -> f64 {
    if fits.is_empty() {
        return f64::NAN;
    }
    let hits = fits
        .iter()
        .filter(|(f, t)| pivot_value(f, *t, pivot, mode).abs() <= z)
        .count();
    hits as f64 / fits.len() as f64
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EstimateRow {
    pub scheme: String,
    pub target: Target,
    pub estimator: String,
    pub prior: String,
    pub loss: String,
    pub average: f64,
    pub mse: f64,
    pub used: u32,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct IntervalRow {
    pub scheme: String,
    pub target: Target,
    pub method: String,
    pub prior: String,
    pub level: f64,
    pub avg_length: f64,
    pub used: u32,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CoverageRow {
    pub scheme: String,
    pub pivot: Pivot,
    pub mode: PivotMode,
    pub level: f64,
    pub z: f64,
    pub coverage: f64,
    pub used: u32,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SchemeSummary {
    pub scheme: String,
    pub requested: u32,
    pub used: u32,
    pub discarded_degenerate: u32,
    pub discarded_fit: u32,
    pub redraws: u64,
    pub sampling_unavailable: Vec<(String, u32)>,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SimTable {
    pub estimates: Vec<EstimateRow>,
    pub intervals: Vec<IntervalRow>,
    pub coverage: Vec<CoverageRow>,
    pub schemes: Vec<SchemeSummary>,
}

enum EstKind {
    Mle,
    Lindley { prior: usize, loss: LossSpec },
    Sampling { prior: usize, loss: LossSpec },
}

struct EstCell {
    target: Target,
    kind: EstKind,
    estimator: &'static str,
    prior_label: String,
    loss_label: String,
}

enum IntKind {
    Na,
    Nl,
    Hpd { prior: usize },
}

struct IntCell {
    target: Target,
    kind: IntKind,
    method: &'static str,
    prior_label: String,
    level: f64,
}

struct CovCell {
    pivot: Pivot,
    mode: PivotMode,
    level: f64,
    z: f64,
}

struct Catalog {
    est: Vec<EstCell>,
    int: Vec<IntCell>,
    cov: Vec<CovCell>,
}

fn prior_label(p: &PriorSpec) -> String {
    let hp = p.hyperparams();
    if hp.is_empty() {
        p.name().to_string()
    } else {
        format!("{} {}", p.name(), hp)
    }
}

fn loss_label(l: &LossSpec) -> String {
    let sh = l.shape();
    if sh.is_empty() {
        l.name().to_string()
    } else {
        format!("{} {}", l.name(), sh)
    }
}

fn build_catalog(cfg: &SimConfig) -> Catalog {
    let losses = cfg.loss_menu();
    let mut est = Vec::new();
    let mut int = Vec::new();
    let mut cov = Vec::new();
    for target in [Target::Alpha, Target::Lambda] {
        est.push(EstCell {
            target,
            kind: EstKind::Mle,
            estimator: "mle",
            prior_label: String::new(),
            loss_label: String::new(),
        });
    }
    for (pi, prior) in cfg.priors.iter().enumerate() {
        for loss in &losses {
            for target in [Target::Alpha, Target::Lambda] {
                est.push(EstCell {
                    target,
                    kind: EstKind::Lindley { prior: pi, loss: loss.clone() },
                    estimator: "lindley",
                    prior_label: prior_label(prior),
                    loss_label: loss_label(loss),
                });
            }
        }
    }
    for (pi, prior) in cfg.priors.iter().enumerate() {
        if !matches!(prior, PriorSpec::Independent { .. }) {
            continue;
        }
        for loss in &losses {
            for target in [Target::Alpha, Target::Lambda] {
                est.push(EstCell {
                    target,
                    kind: EstKind::Sampling { prior: pi, loss: loss.clone() },
                    estimator: "is",
                    prior_label: prior_label(prior),
                    loss_label: loss_label(loss),
                });
            }
        }
    }
    for &level in &cfg.levels {
        for target in [Target::Alpha, Target::Lambda] {
            int.push(IntCell { target, kind: IntKind::Na, method: "na", prior_label: String::new(), level });
            int.push(IntCell { target, kind: IntKind::Nl, method: "nl", prior_label: String::new(), level });
        }
        for (pi, prior) in cfg.priors.iter().enumerate() {
            if !matches!(prior, PriorSpec::Independent { .. }) {
                continue;
            }
            for target in [Target::Alpha, Target::Lambda] {
                int.push(IntCell {
                    target,
                    kind: IntKind::Hpd { prior: pi },
                    method: "hpd",
                    prior_label: prior_label(prior),
                    level,
                });
            }
        }
        let z = normal_quantile(0.5 + level / 2.0);
        for pivot in [Pivot::Q1, Pivot::Q2, Pivot::Q3] {
            for mode in [PivotMode::Printed, PivotMode::Corrected] {
                cov.push(CovCell { pivot, mode, level, z });
            }
        }
    }
    Catalog { est, int, cov }
}

enum RepOutcome {
    Degenerate { redraws: u32 },
    FitFailed { redraws: u32 },
    Done(Box<RepPayload>),
}

struct RepPayload {
    redraws: u32,
    est: Vec<(usize, f64)>,
    lens: Vec<(usize, f64)>,
    hits: Vec<(usize, bool)>,
    sampling_missing: Vec<usize>,
}

fn run_replicate(
    cfg: &SimConfig,
    catalog: &Catalog,
    scheme: &CensoringScheme,
    scheme_idx: u32,
    rep: u32,
) -> RepOutcome {
    let mut rng = rep_rng(cfg.seed, scheme_idx, rep, 0);
    let mut redraws = 0u32;
    let sample = loop {
        let s = generate_sample(scheme, cfg.truth, &mut rng);
        if s.d() >= 2 {
            break s;
        }
        redraws += 1;
        if redraws >= MAX_REDRAWS {
            return RepOutcome::Degenerate { redraws };
        }
    };
    let fit = match fit_mle(&sample, &FitOptions::default()) {
        Ok(f) if f.converged => f,
        _ => return RepOutcome::FitFailed { redraws },
    };
    let bundle = match deriv_bundle(&sample, fit.params) {
        Ok(b) => b,
        Err(_) => return RepOutcome::FitFailed { redraws },
    };

    let mut sampling_missing = Vec::new();
    let mut draws_by_prior = Vec::with_capacity(cfg.priors.len());
    for (pi, prior) in cfg.priors.iter().enumerate() {
        if !matches!(prior, PriorSpec::Independent { .. }) {
            draws_by_prior.push(None);
            continue;
        }
        let mut is_rng = rep_rng(cfg.seed, scheme_idx, rep, 1 + pi as u32);
        match is_draws(&sample, prior, cfg.n_is, &mut is_rng) {
            Ok(d) => draws_by_prior.push(Some(d)),
            Err(_) => {
                sampling_missing.push(pi);
                draws_by_prior.push(None);
            }
        }
    }

    let mut est = Vec::with_capacity(catalog.est.len());
    for (ci, cell) in catalog.est.iter().enumerate() {
        let value = match &cell.kind {
            EstKind::Mle => Some(cell.target.pick(fit.params.alpha(), fit.params.lambda())),
            EstKind::Lindley { prior, loss } => {
                lindley_with_bundle(&fit, &bundle, &cfg.priors[*prior], loss, cell.target).ok()
            }
            EstKind::Sampling { prior, loss } => draws_by_prior[*prior]
                .as_ref()
                .and_then(|d| is_estimate(d, loss, cell.target).ok()),
        };
        if let Some(v) = value {
            if v.is_finite() {
                est.push((ci, v));
            }
        }
    }

    let mut lens = Vec::with_capacity(catalog.int.len());
    for (ci, cell) in catalog.int.iter().enumerate() {
        let bounds = match &cell.kind {
            IntKind::Na => na_interval(&fit, cell.level).ok().map(|iv| match cell.target {
                Target::Alpha => iv.alpha,
                Target::Lambda => iv.lambda,
            }),
            IntKind::Nl => nl_interval(&fit, cell.level).ok().map(|iv| match cell.target {
                Target::Alpha => iv.alpha,
                Target::Lambda => iv.lambda,
            }),
            IntKind::Hpd { prior } => draws_by_prior[*prior]
                .as_ref()
                .and_then(|d| hpd_interval(d, cell.target, 1.0 - cell.level).ok()),
        };
        if let Some((lo, hi)) = bounds {
            let len = hi - lo;
            if len.is_finite() {
                lens.push((ci, len));
            }
        }
    }

    let mut hits = Vec::with_capacity(catalog.cov.len());
    for (ci, cell) in catalog.cov.iter().enumerate() {
        let q = pivot_value(&fit, cfg.truth, cell.pivot, cell.mode);
        if q.is_finite() {
            hits.push((ci, q.abs() <= cell.z));
        }
    }

    RepOutcome::Done(Box::new(RepPayload { redraws, est, lens, hits, sampling_missing }))
}

/// Runs the whole study. Replicates are split into `shards` contiguous
/// blocks executed on separate threads; per-replicate seeding makes the
/// result identical for any shard count.
pub fn run_simulation(cfg: &SimConfig, shards: usize) -> Result<SimTable> {
    cfg.validate()?;
    let shards = shards.clamp(1, cfg.replicates as usize);
    let catalog = build_catalog(cfg);
    let mut estimates = Vec::new();
    let mut intervals = Vec::new();
    let mut coverage_rows = Vec::new();
    let mut summaries = Vec::new();

    for (si, spec) in cfg.schemes.iter().enumerate() {
        let scheme = spec.to_scheme()?;
        let m = cfg.replicates;
        let block = m.div_ceil(shards as u32);
        let outcomes: Vec<RepOutcome> = std::thread::scope(|sc| {
            let mut handles = Vec::new();
            for b in 0..shards as u32 {
                let lo = b * block;
                let hi = ((b + 1) * block).min(m);
                if lo >= hi {
                    break;
                }
                let scheme = &scheme;
                let catalog = &catalog;
                handles.push(sc.spawn(move || {
                    (lo..hi)
                        .map(|rep| run_replicate(cfg, catalog, scheme, si as u32, rep))
                        .collect::<Vec<_>>()
                }));
            }
            let mut all = Vec::with_capacity(m as usize);
            for h in handles {
                all.extend(h.join().expect("replicate thread panicked"));
            }
            all
        });

        let label = spec.label();
        let mut degenerate = 0u32;
        let mut fit_failed = 0u32;
        let mut redraws = 0u64;
        let mut missing = vec![0u32; cfg.priors.len()];
        let mut est_vals: Vec<Vec<f64>> = vec![Vec::new(); catalog.est.len()];
        let mut len_vals: Vec<Vec<f64>> = vec![Vec::new(); catalog.int.len()];
        let mut hit_vals: Vec<Vec<bool>> = vec![Vec::new(); catalog.cov.len()];
        for out in &outcomes {
            match out {
                RepOutcome::Degenerate { redraws: r } => {
                    degenerate += 1;
                    redraws += u64::from(*r);
                }
                RepOutcome::FitFailed { redraws: r } => {
                    fit_failed += 1;
                    redraws += u64::from(*r);
                }
                RepOutcome::Done(p) => {
                    redraws += u64::from(p.redraws);
                    for &(ci, v) in &p.est {
                        est_vals[ci].push(v);
                    }
                    for &(ci, v) in &p.lens {
                        len_vals[ci].push(v);
                    }
                    for &(ci, h) in &p.hits {
                        hit_vals[ci].push(h);
                    }
                    for &pi in &p.sampling_missing {
                        missing[pi] += 1;
                    }
                }
            }
        }
        let used = m - degenerate - fit_failed;

        for (cell, vals) in catalog.est.iter().zip(&est_vals) {
            let truth = cell.target.pick(cfg.truth.alpha(), cfg.truth.lambda());
            let (average, cell_mse) = if vals.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (pairwise_sum(vals) / vals.len() as f64, mse(vals, truth))
            };
            estimates.push(EstimateRow {
                scheme: label.clone(),
                target: cell.target,
                estimator: cell.estimator.to_string(),
                prior: cell.prior_label.clone(),
                loss: cell.loss_label.clone(),
                average,
                mse: cell_mse,
                used: vals.len() as u32,
            });
        }
        for (cell, vals) in catalog.int.iter().zip(&len_vals) {
            let avg = if vals.is_empty() {
                f64::NAN
            } else {
                pairwise_sum(vals) / vals.len() as f64
            };
            intervals.push(IntervalRow {
                scheme: label.clone(),
                target: cell.target,
                method: cell.method.to_string(),
                prior: cell.prior_label.clone(),
                level: cell.level,
                avg_length: avg,
                used: vals.len() as u32,
            });
        }
        for (cell, vals) in catalog.cov.iter().zip(&hit_vals) {
            let cov = if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().filter(|h| **h).count() as f64 / vals.len() as f64
            };
            coverage_rows.push(CoverageRow {
                scheme: label.clone(),
                pivot: cell.pivot,
                mode: cell.mode,
                level: cell.level,
                z: cell.z,
                coverage: cov,
                used: vals.len() as u32,
            });
        }
        let sampling_unavailable = cfg
            .priors
            .iter()
            .zip(&missing)
            .filter(|(p, _)| matches!(p, PriorSpec::Independent { .. }))
            .map(|(p, &c)| (prior_label(p), c))
            .collect();
        summaries.push(SchemeSummary {
            scheme: label,
            requested: m,
            used,
            discarded_degenerate: degenerate,
            discarded_fit: fit_failed,
            redraws,
            sampling_unavailable,
            flagged: f64::from(degenerate + fit_failed) > 0.2 * f64::from(m),
        });
    }

    Ok(SimTable { estimates, intervals, coverage: coverage_rows, schemes: summaries })
}
