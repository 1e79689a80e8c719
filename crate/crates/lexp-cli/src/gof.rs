//! Complete-data model comparison: per-family fits with information
//! criteria plus Q-Q, P-P, ECDF, and histogram-density plot data.

use crate::output::{g9, OutDir};
use lexp::data::read_times;
use lexp::dist::{Family, FamilyTag};
use lexp::gof::{ecdf_points, fit_family, hist_density, pp_points, qq_points, FitSummary};
use lexp::Result;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct FamilyList(Vec<FamilyTag>);

fn parse_families(s: &str) -> std::result::Result<FamilyList, String> {
    if s.trim() == "all" {
        return Ok(FamilyList(FamilyTag::ALL.to_vec()));
    }
    let mut tags = Vec::new();
    for part in s.split(',') {
        let name = part.trim();
        let tag = FamilyTag::ALL
            .iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| format!("unknown family {name:?}; expected led, ed, wd, ied, iwd, gamma, burr, or all"))?;
        tags.push(*tag);
    }
    if tags.is_empty() {
        return Err("no families requested".into());
    }
    Ok(FamilyList(tags))
}

#[derive(Debug, clap::Args)]
pub struct GofArgs {
    /// Complete-sample data file
    pub data: PathBuf,
    /// Comma list of families, or "all"
    #[arg(long, default_value = "all", value_parser = parse_families)]
    pub families: FamilyList,
    /// Histogram bin count
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
    pub bins: u32,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn fit_row(f: &FitSummary) -> Vec<String> {
    let params = f.mle();
    let get = |v: &[f64], i: usize| v.get(i).copied().map(g9).unwrap_or_default();
    vec![
        f.family().name().to_string(),
        get(&params, 0),
        get(&params, 1),
        get(&f.se, 0),
        get(&f.se, 1),
        g9(f.neg_loglik),
        g9(f.aic),
        g9(f.aicc),
        g9(f.bic),
        f.k.to_string(),
        f.n.to_string(),
        f.converged.to_string(),
    ]
}

pub fn run(a: GofArgs) -> Result<()> {
    let tags: Vec<FamilyTag> = a.families.0.clone();
    let mut out = OutDir::new(&a.out)?;
    let data = read_times(&a.data)?;

    let mut fits: Vec<FitSummary> = Vec::new();
    for &tag in &tags {
        let f = fit_family(&data, tag)?;
        if !f.converged {
            out.warn(format!("{} fit did not converge; values reported as found", tag.name()));
        }
        fits.push(f);
    }

    let rows: Vec<Vec<String>> = fits.iter().map(fit_row).collect();
    out.write_csv(
        "fits.csv",
        &[
            "family",
            "param1",
            "param2",
            "se1",
            "se2",
            "neg_loglik",
            "aic",
            "aicc",
            "bic",
            "k",
            "n",
            "converged",
        ],
        &rows,
    )?;

    let ecdf = ecdf_points(&data)?;
    let families: Vec<Family> = fits.iter().map(|f| f.fit.clone()).collect();
    let hist = hist_density(&data, &families, a.bins as usize)?;

    for (i, f) in fits.iter().enumerate() {
        let name = f.family().name();
        let fam = &f.fit;

        let qq = qq_points(&data, fam)?;
        let rows: Vec<Vec<String>> =
            qq.iter().map(|&(t, o)| vec![g9(t), g9(o)]).collect();
        out.write_csv(&format!("qq_{name}.csv"), &["theoretical", "observed"], &rows)?;

        let pp = pp_points(&data, fam)?;
        let rows: Vec<Vec<String>> =
            pp.iter().map(|&(t, e)| vec![g9(t), g9(e)]).collect();
        out.write_csv(&format!("pp_{name}.csv"), &["theoretical", "empirical"], &rows)?;

        let rows: Vec<Vec<String>> = ecdf
            .iter()
            .map(|&(x, e)| Ok(vec![g9(x), g9(e), g9(fam.cdf(x)?)]))
            .collect::<Result<_>>()?;
        out.write_csv(&format!("ecdf_{name}.csv"), &["x", "ecdf", "cdf"], &rows)?;

        // bar rows at bin centers, then the fitted curve on the fine grid
        let mut rows: Vec<Vec<String>> = Vec::new();
        for (j, &d) in hist.density.iter().enumerate() {
            let center = 0.5 * (hist.edges[j] + hist.edges[j + 1]);
            rows.push(vec!["bar".into(), g9(center), g9(d)]);
        }
        let curve = &hist.curves[i].1;
        for (j, &v) in curve.iter().enumerate() {
            rows.push(vec!["curve".into(), g9(hist.grid[j]), g9(v)]);
        }
        out.write_csv(&format!("histdens_{name}.csv"), &["kind", "x", "value"], &rows)?;
    }

    let config = json!({
        "data": a.data.display().to_string(),
        "families": tags.iter().map(|t| t.name()).collect::<Vec<_>>(),
        "bins": a.bins,
    });
    out.finish("gof", None, config)
}
