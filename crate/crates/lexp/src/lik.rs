//! Log-likelihood under progressive type-I hybrid censoring, with the
//! analytic first, second, and third derivative stack in (alpha, lambda).
//!
//! Every appearance of U = 1 + z^alpha (z = e^{lambda x} - 1) is handled
//! through ratios U_deriv/U, which stay bounded where U itself overflows.
//! With w = alpha log z and sigma = logistic(w), each ratio reduces to a
//! polynomial in log z, sigma, Q = 1/(1 - e^{-lambda x}), and e^{-lambda x}.

use crate::censor::CensoredSample;
use crate::dist::Params;
use crate::error::{Error, Result};
use crate::special::{log_expm1, logistic, softplus};

/// U and its partial-derivative ratios at a single time point.
///
/// Fields ending in `a` differentiate in alpha, `l` in lambda; `da` is
/// (dU/dalpha)/U and so on. Ratios are the stable representation; the raw
/// partials are exposed as methods and may overflow where U does.
#[derive(Debug, Clone, Copy)]
pub struct UvTerms {
    pub log_u: f64,
    pub log_z: f64,
    pub sigma: f64,
    pub q: f64,
    pub em: f64,
    pub da: f64,
    pub dl: f64,
    pub daa: f64,
    pub dll: f64,
    pub dal: f64,
    pub daaa: f64,
    pub dlll: f64,
    pub daal: f64,
    pub dall: f64,
}

impl UvTerms {
    /// Evaluate at time x > 0.
    pub fn at(x: f64, p: Params) -> UvTerms {
        let (a, lam) = (p.alpha(), p.lambda());
        let t = lam * x;
        let log_z = log_expm1(t);
        let w = a * log_z;
        let sigma = logistic(w);
        let em = (-t).exp();
        let q = -1.0 / (-t).exp_m1(); // 1/(1 - e^{-t}) without cancellation at tiny t
        let xq = x * q;
        UvTerms {
            log_u: softplus(w),
            log_z,
            sigma,
            q,
            em,
            da: log_z * sigma,
            dl: a * xq * sigma,
            daa: log_z * log_z * sigma,
            dll: a * xq * xq * (a - em) * sigma,
            dal: xq * sigma * (a * log_z + 1.0),
            daaa: log_z * log_z * log_z * sigma,
            dlll: a * xq * xq * xq * (a * a + (1.0 - 3.0 * a) * em + em * em) * sigma,
            daal: xq * sigma * log_z * (a * log_z + 2.0),
            dall: xq * xq * sigma * (a * (a - em) * log_z + 2.0 * a - em),
        }
    }

    pub fn u(&self) -> f64 {
        self.log_u.exp()
    }

    pub fn u_alpha(&self) -> f64 {
        self.da * self.u()
    }

    pub fn u_lambda(&self) -> f64 {
        self.dl * self.u()
    }

    pub fn u_alpha_alpha(&self) -> f64 {
        self.daa * self.u()
    }

    pub fn u_lambda_lambda(&self) -> f64 {
        self.dll * self.u()
    }

    pub fn u_alpha_lambda(&self) -> f64 {
        self.dal * self.u()
    }

    pub fn u_alpha3(&self) -> f64 {
        self.daaa * self.u()
    }

    pub fn u_lambda3(&self) -> f64 {
        self.dlll * self.u()
    }

    pub fn u_alpha_alpha_lambda(&self) -> f64 {
        self.daal * self.u()
    }

    pub fn u_alpha_lambda_lambda(&self) -> f64 {
        self.dall * self.u()
    }
}

/// Log-likelihood and derivatives through third order.
#[derive(Debug, Clone, Copy)]
pub struct DerivBundle {
    pub l: f64,
    pub l10: f64,
    pub l01: f64,
    pub l20: f64,
    pub l02: f64,
    pub l11: f64,
    pub l30: f64,
    pub l03: f64,
    pub l21: f64,
    pub l12: f64,
}

fn check_d(s: &CensoredSample) -> Result<()> {
    if s.d() == 0 {
        return Err(Error::DegenerateSample(
            "no failures observed before the cap; the likelihood has no observed-data term".into(),
        ));
    }
    Ok(())
}

fn finite(v: f64, what: &str, i: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{what} at observation {i}")))
    }
}

/// Log-likelihood. The cap T enters only through the case-B withdrawal term,
/// so case-A values are unchanged by any T above the last failure.
pub fn loglik(s: &CensoredSample, p: Params) -> Result<f64> {
    check_d(s)?;
    let (a, lam) = (p.alpha(), p.lambda());
    let d = s.d() as f64;
    let mut ll = d * (a.ln() + lam.ln());
    for (i, (&x, &r)) in s.times().iter().zip(s.applied_removals()).enumerate() {
        let log_z = log_expm1(lam * x);
        let contrib = lam * x + (a - 1.0) * log_z - (r as f64 + 2.0) * softplus(a * log_z);
        ll += finite(contrib, "log-likelihood term", i)?;
    }
    if s.r_star() > 0 {
        let log_v = softplus(a * log_expm1(lam * s.t_cap()));
        ll -= finite(s.r_star() as f64 * log_v, "withdrawal term", s.d())?;
    }
    finite(ll, "log-likelihood", s.d())
}

/// Gradient (d/dalpha, d/dlambda) of the log-likelihood.
pub fn score(s: &CensoredSample, p: Params) -> Result<(f64, f64)> {
    let b = deriv_bundle(s, p)?;
    Ok((b.l10, b.l01))
}

/// Log-likelihood with all partials up to third order in one pass.
pub fn deriv_bundle(s: &CensoredSample, p: Params) -> Result<DerivBundle> {
    check_d(s)?;
    let (a, lam) = (p.alpha(), p.lambda());
    let d = s.d() as f64;

    let mut acc = DerivBundle {
        l: d * (a.ln() + lam.ln()),
        l10: d / a,
        l01: d / lam,
        l20: -d / (a * a),
        l02: -d / (lam * lam),
        l11: 0.0,
        l30: 2.0 * d / (a * a * a),
        l03: 2.0 * d / (lam * lam * lam),
        l21: 0.0,
        l12: 0.0,
    };

    fn tail(acc: &mut DerivBundle, u: &UvTerms, weight: f64, idx: usize) -> Result<()> {
        let UvTerms { da, dl, daa, dll, dal, daaa, dlll, daal, dall, .. } = *u;
        acc.l10 -= weight * da;
        acc.l01 -= weight * dl;
        acc.l20 -= weight * (daa - da * da);
        acc.l02 -= weight * (dll - dl * dl);
        acc.l11 -= weight * (dal - da * dl);
        acc.l30 -= weight * (daaa - 3.0 * da * daa + 2.0 * da * da * da);
        acc.l03 -= weight * (dlll - 3.0 * dl * dll + 2.0 * dl * dl * dl);
        acc.l21 -= weight * (daal - dl * daa - 2.0 * da * dal + 2.0 * da * da * dl);
        acc.l12 -= weight * (dall - da * dll - 2.0 * dl * dal + 2.0 * da * dl * dl);
        finite(weight * u.log_u, "withdrawal-pressure term", idx).map(|_| ())
    }

    for (i, (&x, &r)) in s.times().iter().zip(s.applied_removals()).enumerate() {
        let u = UvTerms::at(x, p);
        let xq = x * u.q;
        let x2q2em = xq * xq * u.em;
        // observed-data terms
        acc.l += lam * x + (a - 1.0) * u.log_z - (r as f64 + 2.0) * u.log_u;
        acc.l10 += u.log_z;
        acc.l01 += x + (a - 1.0) * xq;
        acc.l02 -= (a - 1.0) * x2q2em;
        acc.l11 += xq;
        acc.l03 += (a - 1.0) * xq * xq * xq * (u.em * u.em + u.em);
        acc.l12 -= x2q2em;
        tail(&mut acc, &u, r as f64 + 2.0, i)?;
    }
    if s.r_star() > 0 {
        let u = UvTerms::at(s.t_cap(), p);
        acc.l -= s.r_star() as f64 * u.log_u;
        tail(&mut acc, &u, s.r_star() as f64, s.d())?;
    }

    let b = acc;
    for (v, name) in [
        (b.l, "l"),
        (b.l10, "l10"),
        (b.l01, "l01"),
        (b.l20, "l20"),
        (b.l02, "l02"),
        (b.l11, "l11"),
        (b.l30, "l30"),
        (b.l03, "l03"),
        (b.l21, "l21"),
        (b.l12, "l12"),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("derivative {name}")));
        }
    }
    Ok(b)
}
