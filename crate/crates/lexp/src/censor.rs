//! Progressive type-I hybrid censoring: scheme parsing and validation,
//! exact sample generation, and the censored-sample container.
//!
//! n units enter test; at the i-th observed failure R_i surviving units are
//! withdrawn; the test stops at the m-th failure or at time T, whichever
//! comes first. Stopping at the m-th failure is case A, stopping at T with
//! D < m failures is case B, where the R* = n - D - sum(R_1..R_D) still-live
//! units are withdrawn.

use crate::dist::{le_quantile, Params};
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Removal plan (n, m, R_1..R_m) with the time cap T.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoringScheme {
    n: u32,
    m: u32,
    removals: Vec<u32>,
    t_cap: f64,
}

impl CensoringScheme {
    pub fn new(n: u32, m: u32, removals: Vec<u32>, t_cap: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidScheme("failure budget m must be at least 1".into()));
        }
        if m > n {
            return Err(Error::InvalidScheme(format!("m = {m} exceeds n = {n}")));
        }
        if removals.len() != m as usize {
            return Err(Error::InvalidScheme(format!(
                "length rule: scheme has {} entries but m = {m}",
                removals.len()
            )));
        }
        let sum: u64 = removals.iter().map(|&r| r as u64).sum();
        if sum + m as u64 != n as u64 {
            return Err(Error::InvalidScheme(format!(
                "sum rule: removals total {sum} but n - m = {}",
                n - m
            )));
        }
        if !t_cap.is_finite() || t_cap <= 0.0 {
            return Err(Error::InvalidScheme(format!(
                "time cap must be finite and positive, got {t_cap}"
            )));
        }
        Ok(CensoringScheme { n, m, removals, t_cap })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn removals(&self) -> &[u32] {
        &self.removals
    }

    pub fn t_cap(&self) -> f64 {
        self.t_cap
    }

    /// Compact text form, e.g. "(25,0*9)".
    pub fn shorthand(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0usize;
        while i < self.removals.len() {
            let v = self.removals[i];
            let mut j = i;
            while j + 1 < self.removals.len() && self.removals[j + 1] == v {
                j += 1;
            }
            let run = j - i + 1;
            if run > 1 {
                parts.push(format!("{v}*{run}"));
            } else {
                parts.push(format!("{v}"));
            }
            i = j + 1;
        }
        format!("({})", parts.join(","))
    }
}

/// Parse a removal plan like "(0*9,25)" or "5,5,5,5,5". Tokens are either a
/// count or value*repeat; surrounding parentheses and whitespace are
/// tolerated. The result is validated against n, m, and T.
pub fn parse_scheme(text: &str, n: u32, m: u32, t_cap: f64) -> Result<CensoringScheme> {
    let s = text.trim();
    let s = s.strip_prefix('(').map_or(s, |rest| rest.strip_suffix(')').unwrap_or(rest));
    let mut removals: Vec<u32> = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            return Err(Error::InvalidScheme(format!("empty token in scheme \"{text}\"")));
        }
        let (value, repeat) = match tok.split_once('*') {
            None => (tok, 1u32),
            Some((v, r)) => {
                let r: u32 = r.trim().parse().map_err(|_| {
                    Error::InvalidScheme(format!("repeat count \"{r}\" in \"{text}\" is not a nonnegative integer"))
                })?;
                (v.trim(), r)
            }
        };
        let value: u32 = value.parse().map_err(|_| {
            Error::InvalidScheme(format!("removal \"{value}\" in \"{text}\" is not a nonnegative integer"))
        })?;
        removals.extend(std::iter::repeat(value).take(repeat as usize));
    }
    CensoringScheme::new(n, m, removals, t_cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    A,
    B,
}

/// Ordered failure times observed under a scheme, plus the stopping outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleRepr", into = "SampleRepr")]
pub struct CensoredSample {
    scheme: CensoringScheme,
    times: Vec<f64>,
    case: Case,
    r_star: u32,
}

#[derive(Serialize, Deserialize, Clone)]
struct SampleRepr {
    n: u32,
    m: u32,
    #[serde(rename = "R")]
    removals: Vec<u32>,
    #[serde(rename = "T")]
    t_cap: f64,
    case: Case,
    #[serde(rename = "D")]
    d: u32,
    r_star: u32,
    times: Vec<f64>,
}

impl From<CensoredSample> for SampleRepr {
    fn from(s: CensoredSample) -> SampleRepr {
        SampleRepr {
            n: s.scheme.n,
            m: s.scheme.m,
            removals: s.scheme.removals.clone(),
            t_cap: s.scheme.t_cap,
            case: s.case,
            d: s.times.len() as u32,
            r_star: s.r_star,
            times: s.times,
        }
    }
}

impl TryFrom<SampleRepr> for CensoredSample {
    type Error = Error;
    fn try_from(r: SampleRepr) -> Result<CensoredSample> {
        // complete samples (no censoring anywhere) may carry tied times, as
        // real recorded datasets do
        let allow_ties = r.m == r.n && r.removals.iter().all(|&x| x == 0);
        let scheme = CensoringScheme::new(r.n, r.m, r.removals, r.t_cap)?;
        let s = CensoredSample::from_times_inner(scheme, r.times, allow_ties)?;
        if s.case != r.case || s.d() as u32 != r.d || s.r_star != r.r_star {
            return Err(Error::InvalidSample(
                "stored case/D/r_star disagree with the times and scheme".into(),
            ));
        }
        Ok(s)
    }
}

impl CensoredSample {
    /// Validating constructor: times strictly increasing, positive, below T;
    /// the case and withdrawal count are derived, not trusted.
    pub fn from_times(scheme: CensoringScheme, times: Vec<f64>) -> Result<Self> {
        Self::from_times_inner(scheme, times, false)
    }

    /// Wraps a fully observed dataset: every unit fails, no removals, cap
    /// placed at twice the largest observation. Tied times are accepted
    /// here since recorded data often repeats values.
    pub fn complete(times: &[f64]) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSample("need at least one observation".into()));
        }
        let mut sorted = times.to_vec();
        sorted.sort_by(f64::total_cmp);
        let max = *sorted.last().expect("nonempty");
        if !max.is_finite() || max <= 0.0 {
            return Err(Error::InvalidSample(format!(
                "observations must be positive finite, largest was {max}"
            )));
        }
        let n = sorted.len() as u32;
        let scheme = CensoringScheme::new(n, n, vec![0; sorted.len()], 2.0 * max)?;
        Self::from_times_inner(scheme, sorted, true)
    }

    fn from_times_inner(scheme: CensoringScheme, times: Vec<f64>, allow_ties: bool) -> Result<Self> {
        let d = times.len();
        if d > scheme.m as usize {
            return Err(Error::InvalidSample(format!(
                "{d} failures recorded but the budget is m = {}",
                scheme.m
            )));
        }
        for (i, &x) in times.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 {
                return Err(Error::InvalidSample(format!(
                    "failure time {i} must be finite and positive, got {x}"
                )));
            }
            if x >= scheme.t_cap {
                return Err(Error::InvalidSample(format!(
                    "failure time {x} is not below the cap T = {}",
                    scheme.t_cap
                )));
            }
            if i > 0 && (x < times[i - 1] || (!allow_ties && x == times[i - 1])) {
                return Err(Error::InvalidSample(format!(
                    "failure times must be strictly increasing at index {i}"
                )));
            }
        }
        let case = if d == scheme.m as usize { Case::A } else { Case::B };
        let r_star = match case {
            Case::A => 0,
            Case::B => {
                let applied: u64 = scheme.removals[..d].iter().map(|&r| r as u64).sum();
                (scheme.n as u64 - applied - d as u64) as u32
            }
        };
        Ok(CensoredSample { scheme, times, case, r_star })
    }

    pub fn scheme(&self) -> &CensoringScheme {
        &self.scheme
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of observed failures.
    pub fn d(&self) -> usize {
        self.times.len()
    }

    /// Removals actually applied (first D scheme entries).
    pub fn applied_removals(&self) -> &[u32] {
        &self.scheme.removals[..self.times.len()]
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn r_star(&self) -> u32 {
        self.r_star
    }

    pub fn t_cap(&self) -> f64 {
        self.scheme.t_cap
    }
}

/// Units withdrawn at the cap, recomputed from scratch and checked against
/// the stored value.
pub fn case_b_mass(s: &CensoredSample) -> Result<u32> {
    let expected = match s.case {
        Case::A => 0,
        Case::B => {
            let applied: u64 = s.applied_removals().iter().map(|&r| r as u64).sum();
            (s.scheme.n as u64)
                .checked_sub(applied + s.d() as u64)
                .ok_or_else(|| Error::InvalidSample("removals exceed sample size".into()))? as u32
        }
    };
    if expected != s.r_star {
        return Err(Error::InvalidSample(format!(
            "stored withdrawal count {} disagrees with recomputed {expected}",
            s.r_star
        )));
    }
    Ok(expected)
}

/// Draw one sample by the uniform-spacings transformation: with
/// gamma_i = i + R_m + ... + R_{m-i+1}, V_i = W_i^{1/gamma_i}, and
/// U_i = 1 - V_m V_{m-1} ... V_{m-i+1}, the U_i are the progressively
/// censored uniform order statistics; failure times are their quantiles,
/// truncated at T. D = 0 is a legal outcome.
pub fn generate_sample<R: Rng + ?Sized>(
    scheme: &CensoringScheme,
    params: Params,
    rng: &mut R,
) -> CensoredSample {
    let m = scheme.m as usize;
    let w: Vec<f64> = (0..m).map(|_| rng.sample(rand::distributions::Open01)).collect();
    let mut v = vec![0.0f64; m];
    let mut tail = 0u64;
    for i in 1..=m {
        tail += scheme.removals[m - i] as u64;
        v[i - 1] = w[i - 1].powf(1.0 / (i as f64 + tail as f64));
    }
    let mut times = Vec::with_capacity(m);
    let mut prod = 1.0f64;
    for i in 1..=m {
        prod *= v[m - i];
        let u = (1.0 - prod).min(1.0 - 0.5 * f64::EPSILON).max(0.5 * f64::MIN_POSITIVE);
        let x = le_quantile(u, params).expect("open-interval uniform");
        if x >= scheme.t_cap {
            break;
        }
        times.push(x);
    }
    let d = times.len();
    let case = if d == m { Case::A } else { Case::B };
    let r_star = match case {
        Case::A => 0,
        Case::B => {
            let applied: u64 = scheme.removals[..d].iter().map(|&r| r as u64).sum();
            (scheme.n as u64 - applied - d as u64) as u32
        }
    };
    debug_assert!(times.windows(2).all(|p| p[0] < p[1]));
    CensoredSample { scheme: scheme.clone(), times, case, r_star }
}
