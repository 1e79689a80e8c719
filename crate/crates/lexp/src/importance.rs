//! Self-normalized importance sampling from the gamma chain proposal, with
//! point estimates under the loss menu and credible intervals from the
//! weighted draws.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::censor::CensoredSample;
use crate::error::{Error, Result};
use crate::lindley::{LossSpec, PriorSpec};
use crate::special::{log_expm1, softplus};
use crate::Target;

/// Minimum effective sample size below which interval endpoints are judged
/// too noisy to report.
pub const ESS_FLOOR: f64 = 50.0;

/// Posterior draws of (alpha, lambda) with log importance weights.
#[derive(Debug, Clone)]
pub struct WeightedDraws {
    pairs: Vec<(f64, f64)>,
    log_w: Vec<f64>,
    ess: f64,
    rejections: u64,
}

impl WeightedDraws {
    /// Wraps raw draws, checking positivity and finiteness. The effective
    /// sample size is fixed here once.
    pub fn new(pairs: Vec<(f64, f64)>, log_w: Vec<f64>, rejections: u64) -> Result<Self> {
        if pairs.is_empty() || pairs.len() != log_w.len() {
            return Err(Error::InvalidSample(format!(
                "need matching nonempty draws and weights, got {} and {}",
                pairs.len(),
                log_w.len()
            )));
        }
        for (i, &(a, l)) in pairs.iter().enumerate() {
            if !a.is_finite() || a <= 0.0 || !l.is_finite() || l <= 0.0 {
                return Err(Error::InvalidSample(format!(
                    "draw {i} must be positive finite, got ({a}, {l})"
                )));
            }
        }
        if let Some(i) = log_w.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidSample(format!("log weight {i} is not finite")));
        }
        let ess = ess_of(&log_w);
        Ok(WeightedDraws { pairs, log_w, ess, rejections })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn log_w(&self) -> &[f64] {
        &self.log_w
    }

    pub fn ess(&self) -> f64 {
        self.ess
    }

    pub fn rejections(&self) -> u64 {
        self.rejections
    }

    /// Weights normalized to sum 1, stabilized by the max log weight.
    fn normalized(&self) -> Vec<f64> {
        let mx = self.log_w.iter().fold(f64::NEG_INFINITY, |m, &w| m.max(w));
        let mut w: Vec<f64> = self.log_w.iter().map(|&lw| (lw - mx).exp()).collect();
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total;
        }
        w
    }

    /// Target coordinates sorted ascending, with the matching normalized
    /// weights as a prefix-sum table (prefix[k] = mass before index k).
    fn sorted_prefix(&self, target: Target) -> (Vec<f64>, Vec<f64>) {
        let w = self.normalized();
        let mut idx: Vec<usize> = (0..self.pairs.len()).collect();
        idx.sort_by(|&i, &j| {
            let a = target.pick(self.pairs[i].0, self.pairs[i].1);
            let b = target.pick(self.pairs[j].0, self.pairs[j].1);
            a.total_cmp(&b)
        });
        let vals: Vec<f64> = idx.iter().map(|&i| target.pick(self.pairs[i].0, self.pairs[i].1)).collect();
        let mut prefix = Vec::with_capacity(vals.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &i in &idx {
            acc += w[i];
            prefix.push(acc);
        }
        (vals, prefix)
    }
}

fn ess_of(log_w: &[f64]) -> f64 {
    let mx = log_w.iter().fold(f64::NEG_INFINITY, |m, &w| m.max(w));
    let (mut s1, mut s2) = (0.0, 0.0);
    for &lw in log_w {
        let w = (lw - mx).exp();
        s1 += w;
        s2 += w * w;
    }
    s1 * s1 / s2
}

struct ChainProposal<'a> {
    s: &'a CensoredSample,
    shape_a: f64,
    b: f64,
    shape_l: f64,
    lam_rate: f64,
    lam_gamma: Gamma<f64>,
    log_z: Vec<f64>,
}

impl<'a> ChainProposal<'a> {
    /// One accepted (alpha, lambda, log weight) triple, or None when the
    /// alpha rate came out nonpositive or anything overflowed.
    fn attempt<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(f64, f64, f64)> {
        let lam = self.lam_gamma.sample(rng);
        if !lam.is_finite() || lam <= 0.0 {
            return None;
        }
        self.log_z.clear();
        let mut sum_logz = 0.0;
        for &x in self.s.times() {
            let lz = log_expm1(lam * x);
            sum_logz += lz;
            self.log_z.push(lz);
        }
        let alpha_rate = self.b - sum_logz;
        if !alpha_rate.is_finite() || alpha_rate <= 0.0 {
            return None;
        }
        let alpha = Gamma::new(self.shape_a, 1.0 / alpha_rate).ok()?.sample(rng);
        if !alpha.is_finite() || alpha <= 0.0 {
            return None;
        }
        let mut lw = -self.shape_a * alpha_rate.ln() - self.shape_l * self.lam_rate.ln() - sum_logz;
        for (&lz, &r) in self.log_z.iter().zip(self.s.applied_removals()) {
            lw -= (f64::from(r) + 2.0) * softplus(alpha * lz);
        }
        if self.s.r_star() > 0 {
            lw -= f64::from(self.s.r_star()) * softplus(alpha * log_expm1(lam * self.s.t_cap()));
        }
        if !lw.is_finite() {
            return None;
        }
        Some((alpha, lam, lw))
    }
}

/// Draws N weighted posterior pairs. The lambda proposal is a gamma with
/// rate d minus the observed total time, so it requires d > sum(times);
/// lambda draws whose induced alpha rate is nonpositive are rejected and
/// redrawn, with the total rejection count capped at 50 N.
pub fn is_draws<R: Rng + ?Sized>(
    s: &CensoredSample,
    prior: &PriorSpec,
    n_draws: usize,
    rng: &mut R,
) -> Result<WeightedDraws> {
    prior.validate()?;
    let (a, b, c, d) = match *prior {
        PriorSpec::Independent { a, b, c, d } => (a, b, c, d),
        PriorSpec::Bivariate { .. } => {
            return Err(Error::InvalidConfig(
                "importance sampling is defined for the independent gamma prior only".into(),
            ))
        }
    };
    if n_draws == 0 {
        return Err(Error::InvalidConfig("need at least one draw".into()));
    }
    if s.d() == 0 {
        return Err(Error::DegenerateSample(
            "no observed failures; the posterior has no data term to weight".into(),
        ));
    }
    let sum_x: f64 = s.times().iter().sum();
    let lam_rate = d - sum_x;
    if lam_rate <= 0.0 {
        return Err(Error::ProposalInvalid(format!(
            "lambda proposal rate d - sum(times) = {lam_rate:.6} is not positive \
             (total time {sum_x:.6} vs d = {d}); rescale the time unit so the total \
             falls below d"
        )));
    }
    let dd = s.d() as f64;
    let lam_gamma = Gamma::new(dd + c, 1.0 / lam_rate)
        .map_err(|e| Error::InvalidParam(format!("lambda proposal: {e}")))?;
    let mut prop = ChainProposal {
        s,
        shape_a: dd + a,
        b,
        shape_l: dd + c,
        lam_rate,
        lam_gamma,
        log_z: Vec::with_capacity(s.d()),
    };
    let cap = 50u64.saturating_mul(n_draws as u64);
    let mut rejections = 0u64;
    let mut pairs = Vec::with_capacity(n_draws);
    let mut log_w = Vec::with_capacity(n_draws);
    while pairs.len() < n_draws {
        match prop.attempt(rng) {
            Some((alpha, lam, lw)) => {
                pairs.push((alpha, lam));
                log_w.push(lw);
            }
            None => {
                rejections += 1;
                if rejections > cap {
                    return Err(Error::ProposalMismatch(format!(
                        "rejected more than {cap} lambda draws (alpha rate b - sum log(e^(lambda x) - 1) \
                         kept coming out nonpositive); the proposal does not overlap the posterior"
                    )));
                }
            }
        }
    }
    WeightedDraws::new(pairs, log_w, rejections)
}

/// Self-normalized point estimate of the target under the loss.
pub fn is_estimate(draws: &WeightedDraws, loss: &LossSpec, target: Target) -> Result<f64> {
    loss.validate()?;
    if draws.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least two draws for an estimate, have {}",
            draws.len()
        )));
    }
    let w = draws.normalized();
    let tr = loss.transform();
    let mut e = 0.0;
    for (&(al, la), &wi) in draws.pairs().iter().zip(&w) {
        e += wi * tr.phi(target.pick(al, la));
    }
    if !e.is_finite() || e <= 0.0 {
        return Err(Error::ApproxFailure(format!(
            "weighted expectation for {} under {} loss came out {e}",
            target.name(),
            loss.name()
        )));
    }
    let est = tr.invert(e);
    if !est.is_finite() {
        return Err(Error::ApproxFailure(format!(
            "inverted {} estimate for {} is not finite",
            loss.name(),
            target.name()
        )));
    }
    Ok(est)
}

/// Shortest window of draws holding at least 1 - beta of the normalized
/// weight; both endpoints are observed draw values. Ties prefer the lower
/// endpoint. Requires the effective sample size floor.
pub fn hpd_interval(draws: &WeightedDraws, target: Target, beta: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidConfig(format!("tail mass must lie in (0,1), got {beta}")));
    }
    if draws.ess() < ESS_FLOOR {
        return Err(Error::UnreliableInterval(format!(
            "effective sample size {:.1} of {} draws is below the floor of {ESS_FLOOR}",
            draws.ess(),
            draws.len()
        )));
    }
    let (vals, prefix) = draws.sorted_prefix(target);
    let n = vals.len();
    let need = 1.0 - beta;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut j = 0usize;
    for i in 0..n {
        if j < i {
            j = i;
        }
        while j < n && prefix[j + 1] - prefix[i] < need {
            j += 1;
        }
        if j == n {
            break;
        }
        let len = vals[j] - vals[i];
        if best.map_or(true, |(bl, _, _)| len < bl) {
            best = Some((len, vals[i], vals[j]));
        }
    }
    let (_, lo, hi) = best.unwrap_or((vals[n - 1] - vals[0], vals[0], vals[n - 1]));
    Ok((lo, hi))
}

/// Equal-tailed credible interval from the weighted quantiles at beta/2 and
/// 1 - beta/2.
pub fn equal_tailed(draws: &WeightedDraws, target: Target, beta: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidConfig(format!("tail mass must lie in (0,1), got {beta}")));
    }
    let (vals, prefix) = draws.sorted_prefix(target);
    let lo = quantile_index(&prefix, beta / 2.0);
    let hi = quantile_index(&prefix, 1.0 - beta / 2.0);
    Ok((vals[lo], vals[hi]))
}

/// First index whose cumulative weight reaches t.
fn quantile_index(prefix: &[f64], t: f64) -> usize {
    prefix[1..]
        .iter()
        .position(|&p| p >= t)
        .unwrap_or(prefix.len().saturating_sub(2))
}
