//! Plot-ready CSV and JSON emitters.
//!
//! Every file starts with `#`-prefixed metadata lines (tool version, seed,
//! flags, input hashes) so a run can be reproduced from any single output.
//! Nothing time-dependent is written: fixed inputs and a fixed seed yield
//! byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::inference::{MarginalEffectsTable, RegressionResult};
use crate::metrics::{MetricsRecord, SectorProfile};
use crate::panel::{CountrySlope, Panel, RegionMean, RelativeChange};
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

/// Metadata echoed into every output file.
#[derive(Debug, Clone, Default)]
pub struct RunMetadata {
    lines: Vec<(String, String)>,
}

impl RunMetadata {
    pub fn new(tool_version: &str) -> Self {
        let mut m = Self::default();
        m.push("tool", format!("mrio {tool_version}"));
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn lines(&self) -> &[(String, String)] {
        &self.lines
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.lines.iter().cloned().collect()
    }

    fn write_header<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.lines {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// `metrics.csv`: one record per country-year.
pub fn write_metrics_csv<S: Scalar, W: Write>(
    records: &[MetricsRecord<S>],
    meta: &RunMetadata,
    mut w: W,
) -> Result<()> {
    meta.write_header(&mut w)?;
    writeln!(w, "country,year,region,openness,unevenness,dependency,size")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.country, r.year, r.region, r.openness, r.unevenness, r.dependency, r.size
        )?;
    }
    Ok(())
}

/// `panel.csv`: the pooled panel with its time covariate.
pub fn write_panel_csv<S: Scalar, W: Write>(
    panel: &Panel<S>,
    meta: &RunMetadata,
    mut w: W,
) -> Result<()> {
    meta.write_header(&mut w)?;
    writeln!(
        w,
        "country,year,year_index,region,openness,unevenness,dependency,size"
    )?;
    for r in panel.records() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.country,
            r.year,
            panel.year_index(r.year),
            r.region,
            r.openness,
            r.unevenness,
            r.dependency,
            r.size
        )?;
    }
    Ok(())
}

/// `profiles_<country>_<year>.csv`: sector profiles ranked ascending by UDE.
pub fn write_profiles_csv<S: Scalar, W: Write>(
    profiles: &[SectorProfile<S>],
    meta: &RunMetadata,
    mut w: W,
) -> Result<()> {
    meta.write_header(&mut w)?;
    writeln!(
        w,
        "sector,ude,export_share,import_share,domestic_input_share"
    )?;
    for p in profiles {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.sector_code, p.ude, p.export_share, p.import_share, p.domestic_input_share
        )?;
    }
    Ok(())
}

/// `country_slopes.csv`: per-country bivariate slopes with significance at
/// the configured threshold.
pub fn write_country_slopes_csv<S: Scalar, W: Write>(
    slopes: &[CountrySlope<S>],
    alpha: f64,
    meta: &RunMetadata,
    mut w: W,
) -> Result<()> {
    meta.write_header(&mut w)?;
    writeln!(w, "country,b,p,significant")?;
    let alpha = S::from_f64_lossy(alpha);
    for s in slopes {
        writeln!(
            w,
            "{},{},{},{}",
            s.country,
            s.b,
            s.p,
            if s.p <= alpha { "true" } else { "false" }
        )?;
    }
    Ok(())
}

/// `region_means.csv`: unweighted mean openness per region and year.
pub fn write_region_means_csv<S: Scalar, W: Write>(
    means: &[RegionMean<S>],
    meta: &RunMetadata,
    mut w: W,
) -> Result<()> {
    meta.write_header(&mut w)?;
    writeln!(w, "year,region,mean_openness")?;
    for m in means {
        writeln!(w, "{},{},{}", m.year, m.region, m.mean_openness)?;
    }
    Ok(())
}

/// `relative_change.csv`: endpoint-to-endpoint change per country.
pub fn write_relative_change_csv<S: Scalar, W: Write>(
    rows: &[RelativeChange<S>],
    meta: &RunMetadata,
    mut w: W,
) -> Result<()> {
    meta.write_header(&mut w)?;
    writeln!(w, "country,region,openness_change,unevenness_change")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.country, r.region, r.openness_change, r.unevenness_change
        )?;
    }
    Ok(())
}

/// `trajectory_<country>.csv`: smoothed bins plus the classification in the
/// metadata header.
pub fn write_trajectory_csv<S: Scalar, W: Write>(
    t: &Trajectory<S>,
    meta: &RunMetadata,
    mut w: W,
) -> Result<()> {
    let mut meta = meta.clone();
    meta.push("country", &t.country);
    meta.push("slope_b", t.slope_b);
    meta.push("slope_p", t.slope_p);
    meta.push("slope_class", t.slope_class.as_str());
    meta.push("shape", t.shape.as_str());
    if let Some(last) = t.bins.last() {
        meta.push(
            "last_bin",
            format!("{} ({} years)", last.label(), last.n_years()),
        );
    }
    meta.write_header(&mut w)?;
    writeln!(w, "bin,openness,unevenness")?;
    for b in &t.bins {
        writeln!(w, "{},{},{}", b.label(), b.openness, b.unevenness)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TermJson {
    term: String,
    b: f64,
    beta: Option<f64>,
    p: Option<f64>,
}

#[derive(Serialize)]
struct MarginalJson {
    vary: String,
    grid: Vec<f64>,
    extrapolated: Vec<bool>,
    series: BTreeMap<String, Vec<f64>>,
}

#[derive(Serialize)]
struct ModelJson {
    model: String,
    response: String,
    n: usize,
    predictors: usize,
    r2: f64,
    adj_r2: f64,
    /// `None` when the fit is exact and F diverges.
    f: Option<f64>,
    f_p: Option<f64>,
    degenerate: bool,
    replications: Option<usize>,
    seed: Option<u64>,
    metadata: BTreeMap<String, String>,
    terms: Vec<TermJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    marginal_effects: Option<MarginalJson>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Model results as JSON (`table2.json` / `table3.json`).
pub fn write_model_json<S: Scalar, W: Write>(
    model_name: &str,
    response: &str,
    fit: &RegressionResult<S>,
    marginal: Option<&MarginalEffectsTable<S>>,
    meta: &RunMetadata,
    mut w: W,
) -> Result<()> {
    let to64 = |v: S| v.to_f64().unwrap_or(f64::NAN);
    let terms = fit
        .terms
        .iter()
        .enumerate()
        .map(|(i, term)| TermJson {
            term: term.clone(),
            b: to64(fit.b[i]),
            beta: fit.beta[i].map(to64),
            p: fit.p.as_ref().map(|p| to64(p[i])),
        })
        .collect();
    let marginal_effects = marginal.map(|m| MarginalJson {
        vary: m.vary.clone(),
        grid: m.grid.iter().map(|v| to64(*v)).collect(),
        extrapolated: m.extrapolated.clone(),
        series: m
            .series
            .iter()
            .map(|(label, preds)| (label.clone(), preds.iter().map(|v| to64(*v)).collect()))
            .collect(),
    });
    let doc = ModelJson {
        model: model_name.to_string(),
        response: response.to_string(),
        n: fit.n,
        predictors: fit.n_predictors,
        r2: to64(fit.r2),
        adj_r2: to64(fit.adj_r2),
        f: finite(to64(fit.f_stat)),
        f_p: fit.f_p.map(to64),
        degenerate: fit.degenerate,
        replications: fit.replications,
        seed: fit.seed,
        metadata: meta.to_map(),
        terms,
        marginal_effects,
    };
    serde_json::to_writer_pretty(&mut w, &doc)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e))?;
    writeln!(w)?;
    Ok(())
}
