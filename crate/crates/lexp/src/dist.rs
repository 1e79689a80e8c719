//! The logistic-exponential lifetime distribution and the comparison
//! families used in the model-assessment tooling.
//!
//! With z = e^{lambda x} - 1, the survival function is 1/(1 + z^alpha), so
//! every quantity here routes through log z and the logistic function of
//! alpha * log z. That form stays finite for lambda x up to overflow.

use crate::error::{Error, Result};
use crate::special::{ln_gamma, log_expm1, logistic, logit, reg_lower_gamma, softplus};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Validated (alpha, lambda) pair, both strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct Params {
    alpha: f64,
    lambda: f64,
}

#[derive(Deserialize)]
struct RawParams {
    alpha: f64,
    lambda: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.alpha, raw.lambda)
    }
}

impl Params {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "alpha must be finite and positive, got {alpha}"
            )));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "lambda must be finite and positive, got {lambda}"
            )));
        }
        Ok(Params { alpha, lambda })
    }

    pub fn alpha(self) -> f64 {
        self.alpha
    }

    pub fn lambda(self) -> f64 {
        self.lambda
    }
}

/// Log-density at x >= 0. At x = 0 the right limit is returned: ln(lambda)
/// for alpha = 1, -inf for alpha > 1, +inf for alpha < 1.
pub fn le_log_pdf(x: f64, p: Params) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidParam(format!("pdf argument must be finite and >= 0, got {x}")));
    }
    let (a, lam) = (p.alpha(), p.lambda());
    let t = lam * x;
    if t == 0.0 {
        return Ok(if a == 1.0 {
            lam.ln()
        } else if a > 1.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
    }
    let log_z = log_expm1(t);
    let shape_term = if a == 1.0 { 0.0 } else { (a - 1.0) * log_z };
    Ok(a.ln() + lam.ln() + t + shape_term - 2.0 * softplus(a * log_z))
}

/// Density at x >= 0.
pub fn le_pdf(x: f64, p: Params) -> Result<f64> {
    Ok(le_log_pdf(x, p)?.exp())
}

/// Distribution function at x >= 0; exactly 0 at x = 0 and increasing to 1.
pub fn le_cdf(x: f64, p: Params) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        if x == f64::INFINITY {
            return Ok(1.0);
        }
        return Err(Error::InvalidParam(format!("cdf argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let log_z = log_expm1(p.lambda() * x);
    Ok(logistic(p.alpha() * log_z))
}

/// Quantile for u in (0,1): softplus(logit(u)/alpha)/lambda.
pub fn le_quantile(u: f64, p: Params) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParam(format!("quantile argument must lie in (0,1), got {u}")));
    }
    Ok(softplus(logit(u) / p.alpha()) / p.lambda())
}

/// k independent draws via inverse transform on open-interval uniforms.
pub fn le_sample<R: Rng + ?Sized>(p: Params, k: usize, rng: &mut R) -> Vec<f64> {
    (0..k)
        .map(|_| {
            let u: f64 = rng.sample(rand::distributions::Open01);
            softplus(logit(u) / p.alpha()) / p.lambda()
        })
        .collect()
}

/// Tag for selecting a comparison family by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTag {
    Led,
    Ed,
    Wd,
    Ied,
    Iwd,
    Gamma,
    Burr,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 7] = [
        FamilyTag::Led,
        FamilyTag::Ed,
        FamilyTag::Wd,
        FamilyTag::Ied,
        FamilyTag::Iwd,
        FamilyTag::Gamma,
        FamilyTag::Burr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::Led => "led",
            FamilyTag::Ed => "ed",
            FamilyTag::Wd => "wd",
            FamilyTag::Ied => "ied",
            FamilyTag::Iwd => "iwd",
            FamilyTag::Gamma => "gamma",
            FamilyTag::Burr => "burr",
        }
    }

    pub fn from_name(s: &str) -> Option<FamilyTag> {
        Self::ALL.iter().copied().find(|t| t.name() == s)
    }

    /// Number of free parameters.
    pub fn k(self) -> usize {
        match self {
            FamilyTag::Ed | FamilyTag::Ied => 1,
            _ => 2,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyTag::Led => &["alpha", "lambda"],
            FamilyTag::Ed => &["lambda"],
            FamilyTag::Wd | FamilyTag::Iwd => &["shape", "scale"],
            FamilyTag::Ied => &["theta"],
            FamilyTag::Gamma => &["shape", "rate"],
            FamilyTag::Burr => &["c", "k"],
        }
    }
}

/// A fully parameterized lifetime family on (0, inf).
///
/// Conventions: Wd has cdf 1 - exp(-(x/scale)^shape); Iwd has cdf
/// exp(-(scale/x)^shape); Ied has cdf exp(-theta/x); Gamma is shape-rate;
/// Burr (type XII) has cdf 1 - (1 + x^c)^{-k}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Led { alpha: f64, lambda: f64 },
    Ed { lambda: f64 },
    Wd { shape: f64, scale: f64 },
    Ied { theta: f64 },
    Iwd { shape: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
    Burr { c: f64, k: f64 },
}

fn pos(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("{name} must be finite and positive, got {v}")))
    }
}

impl Family {
    pub fn tag(&self) -> FamilyTag {
        match self {
            Family::Led { .. } => FamilyTag::Led,
            Family::Ed { .. } => FamilyTag::Ed,
            Family::Wd { .. } => FamilyTag::Wd,
            Family::Ied { .. } => FamilyTag::Ied,
            Family::Iwd { .. } => FamilyTag::Iwd,
            Family::Gamma { .. } => FamilyTag::Gamma,
            Family::Burr { .. } => FamilyTag::Burr,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Led { alpha, lambda } => {
                pos("alpha", alpha)?;
                pos("lambda", lambda)
            }
            Family::Ed { lambda } => pos("lambda", lambda),
            Family::Wd { shape, scale } | Family::Iwd { shape, scale } => {
                pos("shape", shape)?;
                pos("scale", scale)
            }
            Family::Ied { theta } => pos("theta", theta),
            Family::Gamma { shape, rate } => {
                pos("shape", shape)?;
                pos("rate", rate)
            }
            Family::Burr { c, k } => {
                pos("c", c)?;
                pos("k", k)
            }
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Family::Led { alpha, lambda } => vec![alpha, lambda],
            Family::Ed { lambda } => vec![lambda],
            Family::Wd { shape, scale } | Family::Iwd { shape, scale } => vec![shape, scale],
            Family::Ied { theta } => vec![theta],
            Family::Gamma { shape, rate } => vec![shape, rate],
            Family::Burr { c, k } => vec![c, k],
        }
    }

    pub fn from_params(tag: FamilyTag, p: &[f64]) -> Result<Family> {
        let need = tag.k();
        if p.len() != need {
            return Err(Error::InvalidParam(format!(
                "{} takes {need} parameters, got {}",
                tag.name(),
                p.len()
            )));
        }
        let fam = match tag {
            FamilyTag::Led => Family::Led { alpha: p[0], lambda: p[1] },
            FamilyTag::Ed => Family::Ed { lambda: p[0] },
            FamilyTag::Wd => Family::Wd { shape: p[0], scale: p[1] },
            FamilyTag::Ied => Family::Ied { theta: p[0] },
            FamilyTag::Iwd => Family::Iwd { shape: p[0], scale: p[1] },
            FamilyTag::Gamma => Family::Gamma { shape: p[0], rate: p[1] },
            FamilyTag::Burr => Family::Burr { c: p[0], k: p[1] },
        };
        fam.validate()?;
        Ok(fam)
    }

    /// Log-density at x > 0.
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "log-density argument must be finite and positive, got {x}"
            )));
        }
        self.validate()?;
        Ok(match *self {
            Family::Led { alpha, lambda } => {
                return le_log_pdf(x, Params::new(alpha, lambda)?);
            }
            Family::Ed { lambda } => lambda.ln() - lambda * x,
            Family::Wd { shape, scale } => {
                let r = x / scale;
                shape.ln() - scale.ln() + (shape - 1.0) * r.ln() - r.powf(shape)
            }
            Family::Ied { theta } => theta.ln() - 2.0 * x.ln() - theta / x,
            Family::Iwd { shape, scale } => {
                let r = scale / x;
                shape.ln() - x.ln() + shape * r.ln() - r.powf(shape)
            }
            Family::Gamma { shape, rate } => {
                shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
            }
            Family::Burr { c, k } => {
                c.ln() + k.ln() + (c - 1.0) * x.ln() - (k + 1.0) * softplus(c * x.ln())
            }
        })
    }

    /// Distribution function at x >= 0.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidParam(format!("cdf argument must be >= 0, got {x}")));
        }
        self.validate()?;
        if x == 0.0 {
            return Ok(0.0);
        }
        Ok(match *self {
            Family::Led { alpha, lambda } => return le_cdf(x, Params::new(alpha, lambda)?),
            Family::Ed { lambda } => -f64::exp_m1(-lambda * x),
            Family::Wd { shape, scale } => -f64::exp_m1(-(x / scale).powf(shape)),
            Family::Ied { theta } => (-theta / x).exp(),
            Family::Iwd { shape, scale } => (-(scale / x).powf(shape)).exp(),
            Family::Gamma { shape, rate } => reg_lower_gamma(shape, rate * x),
            Family::Burr { c, k } => -f64::exp_m1(-k * softplus(c * x.ln())),
        })
    }

    /// Quantile for u in (0,1). Closed forms everywhere except Gamma, which
    /// is bracketed and bisected on the regularized incomplete gamma.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidParam(format!("quantile argument must lie in (0,1), got {u}")));
        }
        self.validate()?;
        Ok(match *self {
            Family::Led { alpha, lambda } => return le_quantile(u, Params::new(alpha, lambda)?),
            Family::Ed { lambda } => -(-u).ln_1p() / lambda,
            Family::Wd { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Family::Ied { theta } => -theta / u.ln(),
            Family::Iwd { shape, scale } => scale * (-u.ln()).powf(-1.0 / shape),
            Family::Gamma { shape, rate } => gamma_quantile(shape, u) / rate,
            Family::Burr { c, k } => f64::exp_m1(-(-u).ln_1p() / k).powf(1.0 / c),
        })
    }
}

fn gamma_quantile(shape: f64, u: f64) -> f64 {
    let mut hi = shape.max(1.0);
    while reg_lower_gamma(shape, hi) < u {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if reg_lower_gamma(shape, mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}
