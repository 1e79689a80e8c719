//! Scalar and simplex minimizers used for profile curves and the
//! comparison-family fits. Both are deterministic given their inputs.

/// Golden-section minimum of a unimodal f on [a, b]. Stops when the bracket
/// is narrower than xtol. Returns (argmin, min).
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    debug_assert!(b > a);
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > xtol && iter < 400 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fc < fd && fc < fx {
        (c, fc)
    } else if fd <= fc && fd < fx {
        (d, fd)
    } else {
        (x, fx)
    }
}

/// Nelder-Mead minimum from x0 with per-coordinate initial steps. Stops when
/// the simplex's value spread drops below ftol or after max_iter reflections.
/// Returns (argmin, min, converged).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    ftol: f64,
    max_iter: u32,
) -> (Vec<f64>, f64, bool) {
    let n = x0.len();
    debug_assert_eq!(step.len(), n);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let fx0 = f(x0);
    simplex.push((x0.to_vec(), fx0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        let fv = f(&v);
        simplex.push((v, fv));
    }

    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < ftol && spread.is_finite() {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let at = |coef: f64| -> Vec<f64> {
            (0..n).map(|j| centroid[j] + coef * (centroid[j] - worst.0[j])).collect()
        };

        let refl = at(1.0);
        let f_refl = f(&refl);
        if f_refl < simplex[0].1 {
            let exp = at(2.0);
            let f_exp = f(&exp);
            simplex[n] = if f_exp < f_refl { (exp, f_exp) } else { (refl, f_refl) };
        } else if f_refl < simplex[n - 1].1 {
            simplex[n] = (refl, f_refl);
        } else {
            let (cand, f_cand) = if f_refl < worst.1 {
                let c = at(0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = at(-0.5);
                let fc = f(&c);
                (c, fc)
            };
            if f_cand < worst.1.min(f_refl) {
                simplex[n] = (cand, f_cand);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for k in 1..=n {
                    let v: Vec<f64> = (0..n)
                        .map(|j| best[j] + 0.5 * (simplex[k].0[j] - best[j]))
                        .collect();
                    let fv = f(&v);
                    simplex[k] = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let best = simplex.remove(0);
    (best.0, best.1, converged)
}
