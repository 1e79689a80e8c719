//! Maximum likelihood by damped Newton iteration on (log alpha, log lambda),
//! with the observed-information variance matrix, profile curves, and
//! normal-approximation intervals.

use crate::censor::CensoredSample;
use crate::dist::Params;
use crate::error::{Error, Result};
use crate::lik::{deriv_bundle, loglik, DerivBundle};
use crate::optim::golden_min;
use crate::special::normal_quantile;
use crate::Target;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct MleFit {
    pub params: Params,
    /// Standard errors (alpha, lambda) from the inverse observed information.
    pub se: (f64, f64),
    /// Inverse observed information in the original parameterization.
    pub tau: [[f64; 2]; 2],
    pub loglik: f64,
    pub iterations: u32,
    pub converged: bool,
    /// Componentwise max of the score at the returned point.
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub init: Option<Params>,
    /// Componentwise score tolerance for convergence.
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { init: None, tol: 1e-8, max_iter: 200 }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// One damped Newton pass in log-coordinates from `start`. Returns the final
/// point, iteration count, and whether the score tolerance was met.
fn newton_from(
    s: &CensoredSample,
    start: (f64, f64),
    tol: f64,
    max_iter: u32,
) -> (f64, f64, u32, bool) {
    let (mut ua, mut ul) = (start.0.ln(), start.1.ln());
    let mut iterations = 0;
    let mut converged = false;
    let mut cur_ll = match loglik(s, Params::new(ua.exp(), ul.exp()).unwrap()) {
        Ok(v) => v,
        Err(_) => f64::NEG_INFINITY,
    };
    while iterations < max_iter {
        iterations += 1;
        let p = match Params::new(ua.exp(), ul.exp()) {
            Ok(p) => p,
            Err(_) => break,
        };
        let b = match deriv_bundle(s, p) {
            Ok(b) => b,
            Err(_) => break,
        };
        if b.l10.abs() < tol && b.l01.abs() < tol {
            converged = true;
            break;
        }
        let (a, lam) = (p.alpha(), p.lambda());
        // chain rule to (log alpha, log lambda)
        let ga = b.l10 * a;
        let gl = b.l01 * lam;
        let h00 = b.l20 * a * a + b.l10 * a;
        let h11 = b.l02 * lam * lam + b.l01 * lam;
        let h01 = b.l11 * a * lam;
        let det = h00 * h11 - h01 * h01;
        let (mut da, mut dl) = if det.is_finite() && det.abs() > 1e-300 {
            ((-(h11 * ga - h01 * gl)) / det, (-(h00 * gl - h01 * ga)) / det)
        } else {
            (f64::NAN, f64::NAN)
        };
        // fall back to a normalized ascent step if Newton is unusable
        if !(da.is_finite() && dl.is_finite()) || da * ga + dl * gl <= 0.0 {
            let norm = ga.hypot(gl).max(1e-12);
            da = ga / norm;
            dl = gl / norm;
        }
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..30 {
            let (ta, tl) = (ua + scale * da, ul + scale * dl);
            if let Ok(p_try) = Params::new(ta.exp(), tl.exp()) {
                if let Ok(ll) = loglik(s, p_try) {
                    if ll.is_finite() && ll >= cur_ll - 1e-12 {
                        ua = ta;
                        ul = tl;
                        cur_ll = ll;
                        accepted = true;
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (ua.exp(), ul.exp(), iterations, converged)
}

/// Fit by damped Newton from the default start (alpha = 1,
/// lambda = ln 2 / median) or the supplied initializer. A coarse log-spaced
/// grid restart is attempted before giving up.
pub fn fit_mle(s: &CensoredSample, opts: &FitOptions) -> Result<MleFit> {
    if s.d() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 observed failures to fit two parameters, got {}",
            s.d()
        )));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidConfig("tolerance and max_iter must be positive".into()));
    }
    let mut sorted = s.times().to_vec();
    sorted.sort_by(f64::total_cmp);
    let lam0 = std::f64::consts::LN_2 / median(&sorted);
    let start = match opts.init {
        Some(p) => (p.alpha(), p.lambda()),
        None => (1.0, lam0),
    };

    let (mut a, mut lam, mut iterations, mut converged) =
        newton_from(s, start, opts.tol, opts.max_iter);

    if !converged {
        // restart from the best point of a coarse grid scaled to the data
        let mut best = (f64::NEG_INFINITY, start);
        for i in 0..30 {
            for j in 0..30 {
                let ga = 0.05 * (20.0f64 / 0.05).powf(i as f64 / 29.0);
                let gl = lam0 * 0.05 * (20.0f64 / 0.05).powf(j as f64 / 29.0);
                if let Ok(p) = Params::new(ga, gl) {
                    if let Ok(ll) = loglik(s, p) {
                        if ll > best.0 {
                            best = (ll, (ga, gl));
                        }
                    }
                }
            }
        }
        let (a2, l2, it2, ok2) = newton_from(s, best.1, opts.tol, opts.max_iter);
        iterations += it2;
        if ok2 || loglik(s, Params::new(a2, l2)?).unwrap_or(f64::NEG_INFINITY)
            > loglik(s, Params::new(a, lam)?).unwrap_or(f64::NEG_INFINITY)
        {
            a = a2;
            lam = l2;
            converged = ok2;
        }
    }

    let params = Params::new(a, lam)?;
    let b = deriv_bundle(s, params)?;
    let tau = invert_information(&b)?;
    let se = (tau[0][0].sqrt(), tau[1][1].sqrt());
    Ok(MleFit {
        params,
        se,
        tau,
        loglik: b.l,
        iterations,
        converged,
        grad_norm: b.l10.abs().max(b.l01.abs()),
    })
}

/// Invert the observed information [-l20, -l11; -l11, -l02], requiring
/// positive definiteness.
pub fn invert_information(b: &DerivBundle) -> Result<[[f64; 2]; 2]> {
    let (i00, i01, i11) = (-b.l20, -b.l11, -b.l02);
    let det = i00 * i11 - i01 * i01;
    if !(det > 0.0 && i00 > 0.0) || !det.is_finite() {
        return Err(Error::SingularFit(format!(
            "observed information is not positive definite (diag {i00:.3e}, {i11:.3e}, det {det:.3e})"
        )));
    }
    Ok([[i11 / det, -i01 / det], [-i01 / det, i00 / det]])
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamIntervals {
    pub alpha: (f64, f64),
    pub lambda: (f64, f64),
}

fn z_for(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("confidence level must lie in (0,1), got {level}")));
    }
    Ok(normal_quantile(0.5 + level / 2.0))
}

/// Symmetric normal-approximation intervals; lower limits may be negative.
pub fn na_interval(fit: &MleFit, level: f64) -> Result<ParamIntervals> {
    let z = z_for(level)?;
    let (a, l) = (fit.params.alpha(), fit.params.lambda());
    Ok(ParamIntervals {
        alpha: (a - z * fit.se.0, a + z * fit.se.0),
        lambda: (l - z * fit.se.1, l + z * fit.se.1),
    })
}

/// Log-transformed normal-approximation intervals, always positive.
pub fn nl_interval(fit: &MleFit, level: f64) -> Result<ParamIntervals> {
    let z = z_for(level)?;
    let (a, l) = (fit.params.alpha(), fit.params.lambda());
    let fa = (z * fit.se.0 / a).exp();
    let fl = (z * fit.se.1 / l).exp();
    Ok(ParamIntervals { alpha: (a / fa, a * fa), lambda: (l / fl, l * fl) })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint {
    /// Fixed value of the profiled parameter.
    pub value: f64,
    /// Inner maximizer over the free parameter, when the evaluation succeeded.
    pub argmax: Option<f64>,
    pub loglik: Option<f64>,
}

/// Profile log-likelihood over `grid` for one parameter, maximizing the
/// other by golden section on its logarithm. Failed points carry None.
pub fn profile_loglik(s: &CensoredSample, target: Target, grid: &[f64]) -> Result<Vec<ProfilePoint>> {
    if grid.len() < 2 {
        return Err(Error::InvalidConfig("profile grid needs at least 2 points".into()));
    }
    if grid.iter().any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::InvalidConfig("profile grid values must be finite and positive".into()));
    }
    if s.d() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 observed failures to profile, got {}",
            s.d()
        )));
    }
    let mut sorted = s.times().to_vec();
    sorted.sort_by(f64::total_cmp);
    let center = match target {
        // center the search bracket for the free parameter at a data scale
        Target::Alpha => std::f64::consts::LN_2 / median(&sorted),
        Target::Lambda => 1.0,
    }
    .ln();
    let mut out = Vec::with_capacity(grid.len());
    for &v in grid {
        let neg_ll = |free_log: f64| -> f64 {
            let free = free_log.exp();
            let p = match target {
                Target::Alpha => Params::new(v, free),
                Target::Lambda => Params::new(free, v),
            };
            match p.and_then(|p| loglik(s, p)) {
                Ok(ll) if ll.is_finite() => -ll,
                _ => f64::INFINITY,
            }
        };
        let (arg_log, neg) = golden_min(neg_ll, center - 14.0, center + 14.0, 1e-10);
        if neg.is_finite() {
            out.push(ProfilePoint { value: v, argmax: Some(arg_log.exp()), loglik: Some(-neg) });
        } else {
            out.push(ProfilePoint { value: v, argmax: None, loglik: None });
        }
    }
    Ok(out)
}
