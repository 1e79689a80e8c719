//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with the measured values before asserting. Tolerances are
//! pinned here and nowhere else; a failing criterion is reported with the
//! numbers that failed it.

use lexp::censor::{case_b_mass, generate_sample, CensoredSample, CensoringScheme};
use lexp::dist::Params;
use lexp::importance::{equal_tailed, hpd_interval, is_draws, is_estimate, WeightedDraws};
use lexp::lik::{deriv_bundle, loglik, score};
use lexp::lindley::{lindley_estimate, LossSpec, PriorSpec};
use lexp::mle::{fit_mle, nl_interval, FitOptions};
use lexp::sim::{rep_rng, run_simulation, Pivot, PivotMode, SchemeSpec, SimConfig};
use lexp::Target;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/guinea_pigs.txt");

const PRIOR: PriorSpec = PriorSpec::Independent { a: 3.0, b: 2.0, c: 3.0, d: 4.0 };
const HYPER: (f64, f64, f64, f64) = (3.0, 2.0, 3.0, 4.0);

fn truth() -> Params {
    Params::new(1.5, 0.75).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lexp"))
}

/// Prints the criterion's one-line verdict, then enforces it.
fn report(criterion: &str, failures: &[String], detail: &str) {
    if failures.is_empty() {
        println!("{criterion}: PASS - {detail}");
    } else {
        println!("{criterion}: FAIL - {}", failures.join("; "));
    }
    assert!(failures.is_empty(), "{criterion}: {}", failures.join("; "));
}

fn check(failures: &mut Vec<String>, ok: bool, msg: String) {
    if !ok {
        failures.push(msg);
    }
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{path:?}: {e}"))
}

/// fits.csv rows as (header -> field) maps keyed by family.
fn read_csv_by_first(path: &Path) -> Vec<(String, Vec<(String, String)>)> {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().expect("header").split(',').map(String::from).collect();
    lines
        .map(|line| {
            let fields = split_csv(line);
            (fields[0].clone(), header.iter().cloned().zip(fields).collect())
        })
        .collect()
}

fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn field(row: &[(String, String)], name: &str) -> String {
    row.iter().find(|(k, _)| k == name).unwrap_or_else(|| panic!("no column {name}")).1.clone()
}

fn numeric(row: &[(String, String)], name: &str) -> f64 {
    field(row, name).parse().unwrap_or_else(|e| panic!("column {name}: {e}"))
}

/// Reference desk-scale scheme from the study tables.
fn desk_scheme() -> CensoringScheme {
    CensoringScheme::new(35, 10, vec![25, 0, 0, 0, 0, 0, 0, 0, 0, 0], 0.5).unwrap()
}

/// First `count` seeds at the desk scheme with a fittable sample and an
/// applicable importance proposal.
fn desk_samples(count: usize) -> Vec<CensoredSample> {
    let scheme = desk_scheme();
    let mut out = Vec::new();
    for rep in 0u32.. {
        let mut rng = rep_rng(13, 0, rep, 0);
        let s = generate_sample(&scheme, truth(), &mut rng);
        if s.d() >= 2 && s.times().iter().sum::<f64>() < 4.0 {
            out.push(s);
            if out.len() == count {
                return out;
            }
        }
    }
    unreachable!()
}

/// Brute-force posterior means over [0.01, 10]^2, written from the density
/// directly; independent of the library's likelihood and estimators.
mod quad {
    use lexp::censor::CensoredSample;

    fn ln_z(u: f64) -> f64 {
        if u > 36.0 {
            u
        } else {
            u.exp_m1().ln()
        }
    }

    fn softplus(v: f64) -> f64 {
        if v > 36.0 {
            v
        } else if v < -36.0 {
            v.exp()
        } else {
            v.exp().ln_1p()
        }
    }

    fn log_post(s: &CensoredSample, hyper: (f64, f64, f64, f64), alpha: f64, lam: f64) -> f64 {
        let (a, b, c, d) = hyper;
        let mut lp = (a - 1.0) * alpha.ln() - b * alpha + (c - 1.0) * lam.ln() - d * lam;
        for (i, &x) in s.times().iter().enumerate() {
            let logz = ln_z(lam * x);
            lp += alpha.ln() + lam.ln() + lam * x + (alpha - 1.0) * logz
                - (s.applied_removals()[i] as f64 + 2.0) * softplus(alpha * logz);
        }
        if s.r_star() > 0 {
            lp -= s.r_star() as f64 * softplus(alpha * ln_z(lam * s.t_cap()));
        }
        lp
    }

    fn means_at(s: &CensoredSample, hyper: (f64, f64, f64, f64), n: usize) -> (f64, f64) {
        let (lo, hi) = (0.01f64, 10.0f64);
        let h = (hi - lo) / n as f64;
        let node = |i: usize| lo + i as f64 * h;
        let w1 = |i: usize| {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut lp = vec![0.0f64; (n + 1) * (n + 1)];
        let mut peak = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let v = log_post(s, hyper, node(i), node(j));
                lp[i * (n + 1) + j] = v;
                peak = peak.max(v);
            }
        }
        let (mut den, mut num_a, mut num_l) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..=n {
            for j in 0..=n {
                let w = w1(i) * w1(j) * (lp[i * (n + 1) + j] - peak).exp();
                den += w;
                num_a += w * node(i);
                num_l += w * node(j);
            }
        }
        (num_a / den, num_l / den)
    }

    /// Posterior means of (alpha, lambda), refined until two successive
    /// grid halvings agree to 1e-6 in both coordinates.
    pub fn posterior_means(s: &CensoredSample, hyper: (f64, f64, f64, f64)) -> (f64, f64) {
        let mut prev = means_at(s, hyper, 200);
        for n in [400, 800, 1600] {
            let cur = means_at(s, hyper, n);
            if (cur.0 - prev.0).abs() < 1e-6 && (cur.1 - prev.1).abs() < 1e-6 {
                return cur;
            }
            prev = cur;
        }
        panic!("quadrature did not settle; finest pair {prev:?}");
    }
}

#[test]
fn acceptance_01_real_data_fit() {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let status = bin()
        .args(["fit", DATA, "--complete", "--out"])
        .arg(dir.path())
        .status()
        .expect("spawn");
    let elapsed = started.elapsed().as_secs_f64();
    assert!(status.success(), "fit exited {status}");
    let fit = read_json(&dir.path().join("fit.json"));
    let get = |k: &str| fit[k].as_f64().unwrap_or_else(|| panic!("field {k}"));

    let mut failures = Vec::new();
    let alpha = get("alpha");
    check(
        &mut failures,
        (alpha - 1.680051).abs() <= 1e-3,
        format!("alpha {alpha:.7} vs 1.680051 +- 1e-3 (likelihood is stationary at 1.6810978)"),
    );
    let lambda = get("lambda");
    check(&mut failures, (lambda - 0.008596).abs() <= 1e-5, format!("lambda {lambda:.7}"));
    let nll = get("neg_loglik");
    check(&mut failures, (nll - 393.1994).abs() <= 1e-3, format!("-logL {nll:.5}"));
    let aic = get("aic");
    check(&mut failures, (aic - 790.3988).abs() <= 2e-3, format!("AIC {aic:.5}"));
    let aicc = get("aicc");
    check(&mut failures, (aicc - 790.5727).abs() <= 2e-3, format!("AICc {aicc:.5}"));
    check(&mut failures, elapsed < 1.0, format!("runtime {elapsed:.2}s"));
    report(
        "criterion 1 (real-data fit)",
        &failures,
        &format!(
            "alpha {alpha:.6}, lambda {lambda:.6}, -logL {nll:.4}, AIC {aic:.4}, \
             AICc {aicc:.4}, {elapsed:.2}s"
        ),
    );
}

#[test]
fn acceptance_02_comparison_fits() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["gof", DATA, "--families", "all", "--out"])
        .arg(dir.path())
        .status()
        .expect("spawn");
    assert!(status.success(), "gof exited {status}");
    let rows = read_csv_by_first(&dir.path().join("fits.csv"));
    let row = |fam: &str| {
        rows.iter().find(|(k, _)| k == fam).unwrap_or_else(|| panic!("no {fam} row")).1.clone()
    };

    let mut failures = Vec::new();
    let ed = numeric(&row("ed"), "param1");
    check(&mut failures, (ed - 0.010018).abs() <= 1e-5, format!("ED rate {ed:.7}"));

    let wd = row("wd");
    let (w1, w2, wn) = (numeric(&wd, "param1"), numeric(&wd, "param2"), numeric(&wd, "neg_loglik"));
    check(&mut failures, (w1 - 1.392761).abs() <= 5e-3, format!("WD shape {w1:.6}"));
    check(&mut failures, (w2 - 110.529489).abs() <= 0.1, format!("WD scale {w2:.4}"));
    check(&mut failures, (wn - 397.1477).abs() <= 0.01, format!("WD -logL {wn:.5}"));

    let ga = row("gamma");
    let (g1, g2, gn) = (numeric(&ga, "param1"), numeric(&ga, "param2"), numeric(&ga, "neg_loglik"));
    check(&mut failures, (g1 - 2.081241).abs() <= 5e-3, format!("gamma shape {g1:.6}"));
    check(&mut failures, (g2 - 0.020854).abs() <= 1e-4, format!("gamma rate {g2:.6}"));
    check(&mut failures, (gn - 394.2476).abs() <= 0.01, format!("gamma -logL {gn:.5}"));

    let iwn = numeric(&row("iwd"), "neg_loglik");
    check(&mut failures, (iwn - 395.6491).abs() <= 0.01, format!("IWD -logL {iwn:.5}"));

    let led = row("led");
    let (ln_, la) = (numeric(&led, "neg_loglik"), numeric(&led, "aic"));
    for (fam, r) in &rows {
        if fam != "led" {
            let other_nll = numeric(r, "neg_loglik");
            let other_aic = numeric(r, "aic");
            check(
                &mut failures,
                ln_ < other_nll && la < other_aic,
                format!("{fam} outranks led: -logL {other_nll:.4} vs {ln_:.4}"),
            );
        }
    }
    report(
        "criterion 2 (comparison fits)",
        &failures,
        &format!("ED {ed:.6}; WD ({w1:.4}, {w2:.2}) {wn:.4}; gamma ({g1:.4}, {g2:.5}) {gn:.4}; IWD {iwn:.4}; led first"),
    );
}

#[test]
fn acceptance_03_simulation_reproduction() {
    let cfg = SimConfig {
        truth: truth(),
        schemes: vec![SchemeSpec {
            n: 35,
            m: 10,
            removals: vec![25, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            t: 0.5,
        }],
        replicates: 2000,
        priors: vec![PRIOR],
        p_grid: vec![0.5],
        q_grid: vec![-0.25],
        levels: vec![0.95],
        seed: 2024,
        n_is: 400,
    };
    let started = Instant::now();
    let table = run_simulation(&cfg, 4).unwrap();
    let elapsed = started.elapsed().as_secs_f64();

    let avg = |estimator: &str, loss: &str| {
        table
            .estimates
            .iter()
            .find(|r| r.estimator == estimator && r.loss == loss && r.target == Target::Alpha)
            .unwrap_or_else(|| panic!("no {estimator}/{loss} alpha row"))
            .average
    };
    let mle = avg("mle", "");
    let sq = avg("lindley", "sq");

    let mut failures = Vec::new();
    check(&mut failures, (mle - 1.706).abs() <= 0.08, format!("mle alpha average {mle:.4} vs 1.706 +- 0.08"));
    check(&mut failures, (sq - 1.516).abs() <= 0.08, format!("sq Bayes alpha average {sq:.4} vs 1.516 +- 0.08"));
    check(&mut failures, elapsed < 600.0, format!("runtime {elapsed:.0}s"));
    report(
        "criterion 3 (simulation reproduction)",
        &failures,
        &format!("mle alpha {mle:.4}, sq Bayes alpha {sq:.4}, {elapsed:.1}s, used {}", table.schemes[0].used),
    );
}

#[test]
fn acceptance_04_coverage_reproduction() {
    let mut removals = vec![0u32; 25];
    removals[24] = 10;
    let cfg = SimConfig {
        truth: truth(),
        schemes: vec![SchemeSpec { n: 35, m: 25, removals, t: 0.65 }],
        replicates: 2000,
        priors: vec![],
        p_grid: vec![0.5],
        q_grid: vec![-0.25],
        levels: vec![0.95],
        seed: 501,
        n_is: 2,
    };
    let table = run_simulation(&cfg, 4).unwrap();
    let row = table
        .coverage
        .iter()
        .find(|r| r.pivot == Pivot::Q2 && r.mode == PivotMode::Printed)
        .expect("q2 printed row");

    let mut failures = Vec::new();
    check(
        &mut failures,
        (row.coverage - 0.874).abs() <= 0.04,
        format!("Q2 coverage {:.4} vs 0.874 +- 0.04", row.coverage),
    );
    report(
        "criterion 4 (coverage reproduction)",
        &failures,
        &format!("Q2 printed coverage {:.4} at z {:.4}, {} fits", row.coverage, row.z, row.used),
    );
}

#[test]
fn acceptance_05_hpd_reproduction() {
    let mut removals = vec![0u32; 25];
    removals[24] = 10;
    let scheme = CensoringScheme::new(35, 25, removals, 0.65).unwrap();
    let attempts = 400u32;
    let (mut lengths, mut inapplicable, mut no_failures, mut mismatch, mut floor_blocked) =
        (Vec::new(), 0u32, 0u32, 0u32, 0u32);
    let mut other = 0u32;
    for rep in 0..attempts {
        let s = generate_sample(&scheme, truth(), &mut rep_rng(77, 0, rep, 0));
        if s.d() == 0 {
            no_failures += 1;
            continue;
        }
        match is_draws(&s, &PRIOR, 5000, &mut rep_rng(77, 0, rep, 1)) {
            Ok(draws) => match hpd_interval(&draws, Target::Alpha, 0.10) {
                Ok((lo, hi)) => lengths.push(hi - lo),
                Err(lexp::Error::UnreliableInterval(_)) => floor_blocked += 1,
                Err(_) => other += 1,
            },
            Err(lexp::Error::ProposalInvalid(_)) => inapplicable += 1,
            Err(lexp::Error::ProposalMismatch(_)) => mismatch += 1,
            Err(_) => other += 1,
        }
    }
    let usable = lengths.len();
    let mean = lengths.iter().sum::<f64>() / usable.max(1) as f64;

    let mut failures = Vec::new();
    check(
        &mut failures,
        usable >= 200,
        format!(
            "only {usable} usable 90% intervals in {attempts} replicates \
             ({inapplicable} proposal-invalid, {mismatch} rejection-capped, \
             {floor_blocked} under the effective-sample-size floor, \
             {no_failures} without failures, {other} other failures)"
        ),
    );
    if usable >= 200 {
        check(
            &mut failures,
            (mean - 1.2915).abs() <= 0.15,
            format!("average 90% HPD length for alpha {mean:.4} vs 1.2915 +- 0.15"),
        );
    }
    report(
        "criterion 5 (HPD reproduction)",
        &failures,
        &format!("average length {mean:.4} over {usable} usable replicates"),
    );
}

#[test]
fn acceptance_06_loss_identities() {
    let mut failures = Vec::new();

    // posterior-expansion path on twenty fittable samples
    let scheme = CensoringScheme::new(25, 10, vec![15, 0, 0, 0, 0, 0, 0, 0, 0, 0], 1.5).unwrap();
    let mut checked = 0u32;
    let mut rep = 0u32;
    while checked < 20 {
        let s = generate_sample(&scheme, truth(), &mut rep_rng(21, 0, rep, 0));
        rep += 1;
        if s.d() < 2 || fit_mle(&s, &FitOptions::default()).map(|f| !f.converged).unwrap_or(true)
        {
            continue;
        }
        checked += 1;
        for target in [Target::Alpha, Target::Lambda] {
            let sq = lindley_estimate(&s, &PRIOR, &LossSpec::Sq, target).unwrap();
            let ge = lindley_estimate(&s, &PRIOR, &LossSpec::Ge { q: -1.0 }, target).unwrap();
            check(
                &mut failures,
                sq.to_bits() == ge.to_bits(),
                format!("expansion GE(-1) {ge} differs from SQ {sq} on sample {rep}"),
            );
            for p in [1e-6, -1e-6] {
                let lin = lindley_estimate(&s, &PRIOR, &LossSpec::Linex { p }, target).unwrap();
                check(
                    &mut failures,
                    (lin - sq).abs() <= 1e-4,
                    format!("expansion LINEX(p={p}) {lin} vs SQ {sq} on sample {rep}"),
                );
            }
        }
    }

    // importance-sampling path on twenty applicable samples
    for (i, s) in desk_samples(20).iter().enumerate() {
        let draws = is_draws(s, &PRIOR, 1000, &mut rep_rng(22, 0, i as u32, 1)).unwrap();
        for target in [Target::Alpha, Target::Lambda] {
            let sq = is_estimate(&draws, &LossSpec::Sq, target).unwrap();
            let ge = is_estimate(&draws, &LossSpec::Ge { q: -1.0 }, target).unwrap();
            check(
                &mut failures,
                sq.to_bits() == ge.to_bits(),
                format!("sampling GE(-1) {ge} differs from SQ {sq} on sample {i}"),
            );
            for p in [1e-6, -1e-6] {
                let lin = is_estimate(&draws, &LossSpec::Linex { p }, target).unwrap();
                check(
                    &mut failures,
                    (lin - sq).abs() <= 1e-4,
                    format!("sampling LINEX(p={p}) {lin} vs SQ {sq} on sample {i}"),
                );
            }
        }
    }
    report(
        "criterion 6 (loss identities)",
        &failures,
        "GE(-1) bit-identical to SQ and LINEX(+-1e-6) within 1e-4 on both paths, 20 samples each",
    );
}

#[test]
fn acceptance_07_oracle_agreement() {
    let mut failures = Vec::new();
    let (mut worst_lin, mut worst_is) = (0.0f64, 0.0f64);
    for (i, s) in desk_samples(10).iter().enumerate() {
        let (qa, ql) = quad::posterior_means(s, HYPER);
        let draws = is_draws(s, &PRIOR, 50_000, &mut rep_rng(9, 0, i as u32, 1));
        if let Err(e) = &draws {
            check(&mut failures, false, format!("sample {i} sampling unavailable: {e}"));
        }
        for (target, exact) in [(Target::Alpha, qa), (Target::Lambda, ql)] {
            match lindley_estimate(s, &PRIOR, &LossSpec::Sq, target) {
                Ok(lin) => {
                    worst_lin = worst_lin.max((lin - exact).abs());
                    check(
                        &mut failures,
                        (lin - exact).abs() <= 0.05,
                        format!(
                            "sample {i} {} expansion {lin:.4} vs quadrature {exact:.4} (D = {})",
                            target.name(),
                            s.d()
                        ),
                    );
                }
                Err(e) => check(&mut failures, false, format!("sample {i} expansion failed: {e}")),
            }
            let Ok(draws) = &draws else { continue };
            match is_estimate(draws, &LossSpec::Sq, target) {
                Ok(isv) => {
                    worst_is = worst_is.max((isv - exact).abs());
                    check(
                        &mut failures,
                        (isv - exact).abs() <= 0.02,
                        format!(
                            "sample {i} {} sampling {isv:.4} vs quadrature {exact:.4} \
                             (effective sample size {:.1})",
                            target.name(),
                            draws.ess()
                        ),
                    );
                }
                Err(e) => check(&mut failures, false, format!("sample {i} sampling failed: {e}")),
            }
        }
    }
    report(
        "criterion 7 (oracle agreement)",
        &failures,
        &format!("worst expansion gap {worst_lin:.4} (<= 0.05), worst sampling gap {worst_is:.4} (<= 0.02)"),
    );
}

#[test]
fn acceptance_08_derivative_suite() {
    use rand::Rng;
    let schemes = [
        CensoringScheme::new(30, 30, vec![0; 30], 60.0).unwrap(),
        desk_scheme(),
        CensoringScheme::new(35, 25, { let mut r = vec![0; 25]; r[24] = 10; r }, 0.65).unwrap(),
        CensoringScheme::new(30, 5, vec![5; 5], 1.0).unwrap(),
        CensoringScheme::new(14, 6, vec![2, 2, 0, 0, 2, 2], 2.0).unwrap(),
    ];
    let mut failures = Vec::new();
    let mut points = 0u32;
    for (si, scheme) in schemes.iter().enumerate() {
        let mut rep = 0u32;
        let s = loop {
            let s = generate_sample(scheme, truth(), &mut rep_rng(31, si as u32, rep, 0));
            if s.d() >= 2 {
                break s;
            }
            rep += 1;
        };
        let f = |al: f64, lm: f64| loglik(&s, Params::new(al, lm).unwrap()).unwrap();
        let mut rng = rep_rng(32, si as u32, 0, 0);
        for _ in 0..4 {
            points += 1;
            let al = 0.6 * (2.5f64 / 0.6).powf(rng.gen::<f64>());
            let lm = 0.4 * (1.6f64 / 0.4).powf(rng.gen::<f64>());
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);

            // first order against central differences of the log-likelihood
            let (sa, sl) = score(&s, Params::new(al, lm).unwrap()).unwrap();
            let (ha, hl) = (6e-6 * al, 6e-6 * lm);
            let fda = (f(al + ha, lm) - f(al - ha, lm)) / (2.0 * ha);
            let fdl = (f(al, lm + hl) - f(al, lm - hl)) / (2.0 * hl);
            check(&mut failures, rel(sa, fda) <= 1e-5, format!("l10 {sa:.8} vs {fda:.8} at ({al:.3}, {lm:.3})"));
            check(&mut failures, rel(sl, fdl) <= 1e-5, format!("l01 {sl:.8} vs {fdl:.8} at ({al:.3}, {lm:.3})"));

            // second and third order against nested differences
            let b = deriv_bundle(&s, Params::new(al, lm).unwrap()).unwrap();
            let (ha, hl) = (2e-4 * al, 2e-4 * lm);
            let d20 = |lm: f64| (f(al + ha, lm) - 2.0 * f(al, lm) + f(al - ha, lm)) / (ha * ha);
            let d02 = |al: f64| (f(al, lm + hl) - 2.0 * f(al, lm) + f(al, lm - hl)) / (hl * hl);
            let d11 = (f(al + ha, lm + hl) - f(al + ha, lm - hl) - f(al - ha, lm + hl)
                + f(al - ha, lm - hl))
                / (4.0 * ha * hl);
            for (name, have, want) in
                [("l20", b.l20, d20(lm)), ("l02", b.l02, d02(al)), ("l11", b.l11, d11)]
            {
                check(&mut failures, rel(have, want) <= 1e-4, format!("{name} {have:.6} vs {want:.6} at ({al:.3}, {lm:.3})"));
            }

            let (ta, tl) = (1.5e-3 * al, 1.5e-3 * lm);
            let d30 = (f(al + 2.0 * ta, lm) - 2.0 * f(al + ta, lm) + 2.0 * f(al - ta, lm)
                - f(al - 2.0 * ta, lm))
                / (2.0 * ta * ta * ta);
            let d03 = (f(al, lm + 2.0 * tl) - 2.0 * f(al, lm + tl) + 2.0 * f(al, lm - tl)
                - f(al, lm - 2.0 * tl))
                / (2.0 * tl * tl * tl);
            let d21 = (d20(lm + tl) - d20(lm - tl)) / (2.0 * tl);
            let d12 = (d02(al + ta) - d02(al - ta)) / (2.0 * ta);
            for (name, have, want) in
                [("l30", b.l30, d30), ("l03", b.l03, d03), ("l21", b.l21, d21), ("l12", b.l12, d12)]
            {
                check(&mut failures, rel(have, want) <= 1e-4, format!("{name} {have:.6} vs {want:.6} at ({al:.3}, {lm:.3})"));
            }
        }
    }
    report(
        "criterion 8 (derivative suite)",
        &failures,
        &format!("score to 1e-5 and second/third order to 1e-4 at {points} points over {} samples", schemes.len()),
    );
}

#[test]
fn acceptance_09_determinism() {
    let mut failures = Vec::new();

    // a censored dataset for the bayes command
    let sample_dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "sample", "--n", "35", "--m", "10", "--scheme", "(25,0*9)", "--T", "0.5",
            "--params", "1.5,0.75", "--seed", "7", "--reps", "25", "--out",
        ])
        .arg(sample_dir.path())
        .status()
        .expect("spawn");
    assert!(status.success());
    let jsonl = std::fs::read_to_string(sample_dir.path().join("samples.jsonl")).unwrap();
    let times: Vec<f64> = jsonl
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find_map(|v| {
            let ts: Vec<f64> =
                v["times"].as_array().unwrap().iter().map(|t| t.as_f64().unwrap()).collect();
            (ts.len() >= 2 && ts.iter().sum::<f64>() < 4.0).then_some(ts)
        })
        .expect("an applicable sample among 25 draws");
    let data_file = sample_dir.path().join("times.txt");
    std::fs::write(
        &data_file,
        times.iter().map(|t| format!("{t}\n")).collect::<String>(),
    )
    .unwrap();

    let run_bayes = |out: &Path| {
        let status = bin()
            .arg("bayes")
            .arg(&data_file)
            .args([
                "--n", "35", "--m", "10", "--scheme", "(25,0*9)", "--T", "0.5",
                "--prior", "3,2,3,4", "--method", "both", "--n-draws", "2000",
                "--seed", "5", "--save-draws", "--out",
            ])
            .arg(out)
            .status()
            .expect("spawn");
        assert!(status.success(), "bayes exited {status}");
    };
    let (b1, b2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_bayes(b1.path());
    run_bayes(b2.path());
    for name in ["estimates_lindley.csv", "estimates_is.csv", "hpd.csv", "draws_prior1.csv"] {
        let x = std::fs::read(b1.path().join(name)).unwrap();
        let y = std::fs::read(b2.path().join(name)).unwrap();
        check(&mut failures, x == y, format!("bayes re-run differs in {name}"));
    }
    // manifests agree except for the wall-time field
    let strip = |p: &Path| {
        let mut v = read_json(&p.join("manifest.json"));
        v["wall_time_ms"] = 0.into();
        v
    };
    check(
        &mut failures,
        strip(b1.path()) == strip(b2.path()),
        "bayes manifests differ beyond wall time".into(),
    );

    // shard-count independence of the study driver
    let cfg = serde_json::json!({
        "truth": {"alpha": 1.5, "lambda": 0.75},
        "schemes": [{"n": 20, "m": 8, "removals": [12, 0, 0, 0, 0, 0, 0, 0], "t": 2.0}],
        "replicates": 60,
        "priors": [{"kind": "independent", "a": 3.0, "b": 2.0, "c": 3.0, "d": 4.0}],
        "p_grid": [0.5],
        "q_grid": [-0.25],
        "levels": [0.95],
        "seed": 42,
        "n_is": 300
    });
    let cfg_file = sample_dir.path().join("study.json");
    std::fs::write(&cfg_file, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let run_sim = |out: &Path, shards: &str| {
        let status = bin()
            .arg("simulate")
            .arg(&cfg_file)
            .args(["--shards", shards, "--out"])
            .arg(out)
            .status()
            .expect("spawn");
        assert!(status.success(), "simulate exited {status}");
    };
    let (s1, s4) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_sim(s1.path(), "1");
    run_sim(s4.path(), "4");
    for name in ["estimates.csv", "intervals.csv", "coverage.csv", "schemes.csv"] {
        let x = std::fs::read(s1.path().join(name)).unwrap();
        let y = std::fs::read(s4.path().join(name)).unwrap();
        check(&mut failures, x == y, format!("shard counts 1 and 4 differ in {name}"));
    }

    // generator re-run
    let g2 = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "sample", "--n", "35", "--m", "10", "--scheme", "(25,0*9)", "--T", "0.5",
            "--params", "1.5,0.75", "--seed", "7", "--reps", "25", "--out",
        ])
        .arg(g2.path())
        .status()
        .expect("spawn");
    assert!(status.success());
    let x = std::fs::read(sample_dir.path().join("samples.jsonl")).unwrap();
    let y = std::fs::read(g2.path().join("samples.jsonl")).unwrap();
    check(&mut failures, x == y, "sample re-run differs".into());

    report(
        "criterion 9 (determinism)",
        &failures,
        "bayes, simulate (shards 1 vs 4), and sample outputs byte-identical",
    );
}

#[test]
fn acceptance_10_structural_invariants() {
    let mut failures = Vec::new();

    // unit conservation on ten thousand generated samples
    let schemes = [
        desk_scheme(),
        CensoringScheme::new(35, 25, { let mut r = vec![0; 25]; r[24] = 10; r }, 0.65).unwrap(),
        CensoringScheme::new(30, 5, vec![5; 5], 1.0).unwrap(),
        CensoringScheme::new(14, 6, vec![2, 2, 0, 0, 2, 2], 2.0).unwrap(),
    ];
    let mut conserved = 0u32;
    for rep in 0..10_000u32 {
        let scheme = &schemes[(rep % 4) as usize];
        let s = generate_sample(scheme, truth(), &mut rep_rng(91, rep % 4, rep / 4, 0));
        let total =
            s.d() as u64 + s.applied_removals().iter().map(|&r| r as u64).sum::<u64>()
                + s.r_star() as u64;
        if total == scheme.n() as u64 && case_b_mass(&s).is_ok() {
            conserved += 1;
        } else {
            check(&mut failures, false, format!("unit count {total} vs n = {} at replicate {rep}", scheme.n()));
        }
    }

    // log-scale interval lower bounds stay positive on every fit
    let mut fits = 0u32;
    let mut rep = 0u32;
    while fits < 500 {
        let scheme = &schemes[(rep % 4) as usize];
        let s = generate_sample(scheme, truth(), &mut rep_rng(92, rep % 4, rep / 4, 0));
        rep += 1;
        if s.d() < 2 {
            continue;
        }
        let Ok(fit) = fit_mle(&s, &FitOptions::default()) else { continue };
        if !fit.converged {
            continue;
        }
        fits += 1;
        let ints = nl_interval(&fit, 0.95).unwrap();
        check(
            &mut failures,
            ints.alpha.0 > 0.0 && ints.lambda.0 > 0.0,
            format!("nonpositive NL lower bound {:?} at replicate {rep}", (ints.alpha.0, ints.lambda.0)),
        );
    }

    // shortest window never beats equal tails on random weighted draws
    use rand::Rng;
    let mut sets = 0u32;
    for i in 0..200u32 {
        let mut rng = rep_rng(93, 0, i, 0);
        let n = 200 + (i as usize % 300);
        let pairs: Vec<(f64, f64)> =
            (0..n).map(|_| (0.1 + 3.0 * rng.gen::<f64>(), 0.1 + 2.0 * rng.gen::<f64>())).collect();
        let log_w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let draws = WeightedDraws::new(pairs, log_w, 0).unwrap();
        sets += 1;
        for target in [Target::Alpha, Target::Lambda] {
            for beta in [0.05, 0.10] {
                let (hl, hh) = hpd_interval(&draws, target, beta).unwrap();
                let (el, eh) = equal_tailed(&draws, target, beta).unwrap();
                check(
                    &mut failures,
                    hh - hl <= eh - el + 1e-12,
                    format!("HPD {:.4} longer than equal tails {:.4} on set {i}", hh - hl, eh - el),
                );
            }
        }
    }

    report(
        "criterion 10 (structural invariants)",
        &failures,
        &format!("{conserved} of 10000 samples conserve units; {fits} NL lower bounds positive; HPD <= equal tails on {sets} draw sets"),
    );
}
