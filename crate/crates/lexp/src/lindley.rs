//! Bayes point estimates by a second-order expansion of posterior
//! expectations around the MLE, using log-likelihood derivatives through
//! third order and the log-prior gradient.

use serde::{Deserialize, Serialize};

use crate::censor::CensoredSample;
use crate::dist::Params;
use crate::error::{Error, Result};
use crate::lik::{deriv_bundle, DerivBundle};
use crate::mle::{fit_mle, FitOptions, MleFit};
use crate::Target;

/// Prior over (alpha, lambda): independent gamma densities, or the joint
/// form lambda^(c-2) e^(-d lambda) that is flat in alpha.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    Independent { a: f64, b: f64, c: f64, d: f64 },
    Bivariate { c: f64, d: f64 },
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let fields: &[(&str, f64)] = match *self {
            PriorSpec::Independent { a, b, c, d } => &[("a", a), ("b", b), ("c", c), ("d", d)],
            PriorSpec::Bivariate { c, d } => &[("c", c), ("d", d)],
        };
        for &(name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "prior hyperparameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            PriorSpec::Independent { .. } => "independent",
            PriorSpec::Bivariate { .. } => "bivariate",
        }
    }

    pub fn hyperparams(&self) -> String {
        match *self {
            PriorSpec::Independent { a, b, c, d } => format!("a={a};b={b};c={c};d={d}"),
            PriorSpec::Bivariate { c, d } => format!("c={c};d={d}"),
        }
    }

    /// Gradient of the log prior density at p.
    pub fn log_prior_grad(&self, p: Params) -> (f64, f64) {
        match *self {
            PriorSpec::Independent { a, b, c, d } => {
                ((a - 1.0) / p.alpha() - b, (c - 1.0) / p.lambda() - d)
            }
            PriorSpec::Bivariate { c, d } => (0.0, (c - 2.0) / p.lambda() - d),
        }
    }
}

/// Loss under which the posterior is summarized. The asymmetric families
/// carry their shape parameter; squared error is the q = -1 entropy case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    Sq,
    Linex { p: f64 },
    Ge { q: f64 },
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            LossSpec::Sq => return Ok(()),
            LossSpec::Linex { p } => ("p", p),
            LossSpec::Ge { q } => ("q", q),
        };
        if !v.is_finite() || v == 0.0 {
            return Err(Error::InvalidParam(format!(
                "loss shape {name} must be finite and nonzero, got {v}"
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Sq => "sq",
            LossSpec::Linex { .. } => "linex",
            LossSpec::Ge { .. } => "ge",
        }
    }

    pub fn shape(&self) -> String {
        match *self {
            LossSpec::Sq => String::new(),
            LossSpec::Linex { p } => format!("p={p}"),
            LossSpec::Ge { q } => format!("q={q}"),
        }
    }

    /// Squared error is routed through the entropy transform at q = -1, so
    /// the two spellings share one code path bit for bit.
    pub(crate) fn transform(&self) -> Transform {
        match *self {
            LossSpec::Sq => Transform::Ge { q: -1.0 },
            LossSpec::Ge { q } => Transform::Ge { q },
            LossSpec::Linex { p } => Transform::Linex { p },
        }
    }
}

/// The scalar function of the target whose posterior expectation is formed,
/// together with its inverse back to the estimate scale.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Transform {
    Linex { p: f64 },
    Ge { q: f64 },
}

impl Transform {
    pub(crate) fn phi(self, eta: f64) -> f64 {
        match self {
            Transform::Linex { p } => (-p * eta).exp(),
            Transform::Ge { q } => eta.powf(-q),
        }
    }

    /// (phi, phi', phi'') at eta.
    fn with_derivs(self, eta: f64) -> (f64, f64, f64) {
        match self {
            Transform::Linex { p } => {
                let phi = (-p * eta).exp();
                (phi, -p * phi, p * p * phi)
            }
            Transform::Ge { q } => (
                eta.powf(-q),
                -q * eta.powf(-q - 1.0),
                q * (q + 1.0) * eta.powf(-q - 2.0),
            ),
        }
    }

    pub(crate) fn invert(self, e: f64) -> f64 {
        match self {
            Transform::Linex { p } => -e.ln() / p,
            Transform::Ge { q } => e.powf(-1.0 / q),
        }
    }
}

/// Expansion of E[phi(target) | data] around the MLE. Everything is
/// evaluated at the fitted point; tau is taken from the fit unchanged.
fn approx_expectation(
    fit: &MleFit,
    b: &DerivBundle,
    prior: &PriorSpec,
    tr: Transform,
    target: Target,
) -> f64 {
    let t11 = fit.tau[0][0];
    let t12 = fit.tau[0][1];
    let t21 = fit.tau[1][0];
    let t22 = fit.tau[1][1];
    let (p1, p2) = prior.log_prior_grad(fit.params);
    let eta = target.pick(fit.params.alpha(), fit.params.lambda());
    let (phi, d1, d2) = tr.with_derivs(eta);
    let (v1, v2, v11, v22) = match target {
        Target::Alpha => (d1, 0.0, d2, 0.0),
        Target::Lambda => (0.0, d1, 0.0, d2),
    };
    let a12 = v1 * t11 + v2 * t21;
    let a21 = v2 * t22 + v1 * t12;
    let b12 = (v1 * t11 + v2 * t12) * t11;
    let b21 = (v2 * t22 + v1 * t21) * t22;
    let c12 = 3.0 * v1 * t11 * t12 + v2 * (t11 * t22 + 2.0 * t12 * t12);
    let c21 = 3.0 * v2 * t22 * t21 + v1 * (t22 * t11 + 2.0 * t21 * t21);
    phi + 0.5
        * (v11 * t11
            + v22 * t22
            + b.l30 * b12
            + b.l03 * b21
            + b.l21 * c12
            + b.l12 * c21
            + 2.0 * (p1 * a12 + p2 * a21))
}

/// Point estimate from an existing fit and derivative bundle. The expansion
/// can leave the transform's positive range on hard samples; that is
/// surfaced as a failure rather than clamped.
pub fn lindley_with_bundle(
    fit: &MleFit,
    bundle: &DerivBundle,
    prior: &PriorSpec,
    loss: &LossSpec,
    target: Target,
) -> Result<f64> {
    prior.validate()?;
    loss.validate()?;
    let tr = loss.transform();
    let e = approx_expectation(fit, bundle, prior, tr, target);
    if !e.is_finite() || e <= 0.0 {
        return Err(Error::ApproxFailure(format!(
            "expansion for {} under {} loss gave expectation {e}",
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

/// Fits the sample, then estimates the target under the loss.
pub fn lindley_estimate(
    s: &CensoredSample,
    prior: &PriorSpec,
    loss: &LossSpec,
    target: Target,
) -> Result<f64> {
    let fit = fit_mle(s, &FitOptions::default())?;
    if !fit.converged {
        return Err(Error::NoConvergence(
            "likelihood fit under the posterior expansion did not converge".into(),
        ));
    }
    let bundle = deriv_bundle(s, fit.params)?;
    lindley_with_bundle(&fit, &bundle, prior, loss, target)
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub target: Target,
    pub prior: PriorSpec,
    pub loss: LossSpec,
    pub estimate: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EstimateReport {
    pub rows: Vec<EstimateRow>,
}

/// Both targets under every loss, sharing one fit and one derivative
/// bundle. Per-cell failures land in the row status.
pub fn lindley_report(
    s: &CensoredSample,
    prior: &PriorSpec,
    losses: &[LossSpec],
) -> Result<EstimateReport> {
    prior.validate()?;
    let fit = fit_mle(s, &FitOptions::default())?;
    if !fit.converged {
        return Err(Error::NoConvergence(
            "likelihood fit under the posterior expansion did not converge".into(),
        ));
    }
    let bundle = deriv_bundle(s, fit.params)?;
    let mut rows = Vec::with_capacity(2 * losses.len());
    for target in [Target::Alpha, Target::Lambda] {
        for loss in losses {
            let (estimate, status) = match lindley_with_bundle(&fit, &bundle, prior, loss, target)
            {
                Ok(v) => (Some(v), "ok".to_string()),
                Err(e) => (None, e.to_string()),
            };
            rows.push(EstimateRow { target, prior: *prior, loss: *loss, estimate, status });
        }
    }
    Ok(EstimateReport { rows })
}
