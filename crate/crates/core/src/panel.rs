//! Pooled panel assembly and the country-year models run on it.

use rayon::prelude::*;

use crate::accounts::{derive_national_accounts, AccountsOptions};
use crate::error::{Error, Result};
use crate::inference::{
    fit_with_pvalues, marginal_effects, DesignMatrix, GroupSetting, MarginalEffectsTable,
    PermutationScheme, RegressionResult,
};
use crate::metrics::{metrics_record, MetricsOptions, MetricsRecord};
use crate::scalar::Scalar;
use crate::table::MrioTable;
use crate::taxonomy::{Region, Taxonomy};

/// Options threaded from the CLI into accounts and metrics derivation.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalysisOptions {
    pub accounts: AccountsOptions,
    pub metrics: MetricsOptions,
}

/// Permutation settings shared by every model of a run.
#[derive(Debug, Clone, Copy)]
pub struct InferenceSettings {
    pub replications: usize,
    pub seed: u64,
    pub scheme: PermutationScheme,
}

impl Default for InferenceSettings {
    fn default() -> Self {
        Self {
            replications: 10_000,
            seed: 0,
            scheme: PermutationScheme::default(),
        }
    }
}

/// The pooled panel: one record per analysis country and year, sorted by
/// country then year, with a contiguous shared year range.
#[derive(Debug, Clone)]
pub struct Panel<S: Scalar> {
    records: Vec<MetricsRecord<S>>,
    first_year: i32,
    last_year: i32,
}

impl<S: Scalar> Panel<S> {
    /// Assemble a panel from already-computed records. Checks that every
    /// country covers the same contiguous year range.
    pub fn from_records(records: Vec<MetricsRecord<S>>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::MalformedTable("empty panel".into()));
        }
        let mut records = records;
        records.sort_by(|a, b| a.country.cmp(&b.country).then(a.year.cmp(&b.year)));
        let first_year = records.iter().map(|r| r.year).min().unwrap();
        let last_year = records.iter().map(|r| r.year).max().unwrap();
        let expected: Vec<i32> = (first_year..=last_year).collect();
        let mut by_country: Vec<(&str, Vec<i32>)> = Vec::new();
        for r in &records {
            match by_country.last_mut() {
                Some((c, years)) if *c == r.country => years.push(r.year),
                _ => by_country.push((&r.country, vec![r.year])),
            }
        }
        for (country, years) in &by_country {
            if years != &expected {
                let missing: Vec<i32> = expected
                    .iter()
                    .filter(|y| !years.contains(y))
                    .copied()
                    .collect();
                if missing.is_empty() {
                    return Err(Error::MalformedTable(format!(
                        "duplicate records for {country}"
                    )));
                }
                return Err(Error::MissingYears(format_year_runs(&missing)));
            }
        }
        Ok(Self {
            records,
            first_year,
            last_year,
        })
    }

    pub fn records(&self) -> &[MetricsRecord<S>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.last_year
    }

    pub fn n_years(&self) -> usize {
        (self.last_year - self.first_year + 1) as usize
    }

    /// Time covariate: 1 for the first panel year, rising by one per year.
    pub fn year_index(&self, year: i32) -> S {
        S::from_f64_lossy((year - self.first_year + 1) as f64)
    }

    /// Distinct countries in record order.
    pub fn countries(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.records {
            if out.last() != Some(&r.country.as_str()) {
                out.push(&r.country);
            }
        }
        out
    }

    pub fn get(&self, country: &str, year: i32) -> Option<&MetricsRecord<S>> {
        self.records
            .iter()
            .find(|r| r.country == country && r.year == year)
    }

    /// One country's records in year order.
    pub fn country_series(&self, country: &str) -> Vec<&MetricsRecord<S>> {
        self.records
            .iter()
            .filter(|r| r.country == country)
            .collect()
    }
}

/// Compress sorted years into `a..b` runs, comma separated.
fn format_year_runs(years: &[i32]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < years.len() {
        let start = years[i];
        let mut end = start;
        while i + 1 < years.len() && years[i + 1] == end + 1 {
            i += 1;
            end = years[i];
        }
        if start == end {
            parts.push(format!("{start}"));
        } else {
            parts.push(format!("{start}..{end}"));
        }
        i += 1;
    }
    parts.join(", ")
}

/// Build the pooled panel from one world table per year.
///
/// `years` pins the intended coverage; any gap is an error naming the
/// missing years. Records are derived per country-year in parallel.
pub fn build_panel<S: Scalar>(
    tables: &[MrioTable<S>],
    taxonomy: &Taxonomy,
    years: (i32, i32),
    opts: &AnalysisOptions,
) -> Result<Panel<S>> {
    let (from, to) = years;
    let mut seen: Vec<i32> = tables.iter().map(|t| t.year()).collect();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != tables.len() {
        return Err(Error::MalformedTable("duplicate year among tables".into()));
    }
    let missing: Vec<i32> = (from..=to).filter(|y| !seen.contains(y)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingYears(format_year_runs(&missing)));
    }
    if seen.iter().any(|y| *y < from || *y > to) {
        return Err(Error::MalformedTable(
            "table year outside the requested range".into(),
        ));
    }

    let pairs: Vec<(&MrioTable<S>, String, Region)> = tables
        .iter()
        .flat_map(|t| {
            taxonomy
                .countries()
                .map(move |(c, r)| (t, c.to_string(), r))
        })
        .collect();
    let records: Vec<MetricsRecord<S>> = pairs
        .into_par_iter()
        .map(|(table, country, region)| {
            let acc = derive_national_accounts(table, &country, &opts.accounts)?;
            metrics_record(&acc, region, &opts.metrics)
        })
        .collect::<Result<_>>()?;
    Panel::from_records(records)
}

/// A fitted pooled model together with the design it was fit on.
#[derive(Debug, Clone)]
pub struct PooledModel<S: Scalar> {
    pub design: DesignMatrix<S>,
    pub fit: RegressionResult<S>,
}

fn pooled_design<S: Scalar>(
    panel: &Panel<S>,
    response_name: &str,
    response: impl Fn(&MetricsRecord<S>) -> S,
) -> Result<DesignMatrix<S>> {
    let hundred = S::from_f64_lossy(100.0);
    let y: Vec<S> = panel.records().iter().map(|r| response(r) * hundred).collect();
    let openness: Vec<S> = panel.records().iter().map(|r| r.openness).collect();
    let year: Vec<S> = panel
        .records()
        .iter()
        .map(|r| panel.year_index(r.year))
        .collect();
    let size: Vec<S> = panel.records().iter().map(|r| r.size).collect();
    let indicator = |region: Region| -> Vec<S> {
        panel
            .records()
            .iter()
            .map(|r| {
                if r.region == region {
                    S::one()
                } else {
                    S::zero()
                }
            })
            .collect()
    };
    DesignMatrix::builder(response_name, y)
        .variable("Openness", openness)
        .variable("Year", year)
        .variable("Size", size)
        .variable("GIPS", indicator(Region::Gips))
        .variable("East", indicator(Region::East))
        .intercept()
        .main("Openness")
        .main("Year")
        .interaction("Year", "Openness")
        .main("Size")
        .main("GIPS")
        .main("East")
        .interaction("GIPS", "Openness")
        .interaction("East", "Openness")
        .build()
}

/// Pooled model predicting unevenness (times 100) from openness, year,
/// size, region indicators and region-openness interactions; the Core
/// region is the omitted category.
pub fn pooled_model_unevenness<S: Scalar>(
    panel: &Panel<S>,
    settings: &InferenceSettings,
) -> Result<PooledModel<S>> {
    let design = pooled_design(panel, "unevenness_x100", |r| r.unevenness)?;
    let fit = fit_with_pvalues(&design, settings.replications, settings.seed, settings.scheme)?;
    Ok(PooledModel { design, fit })
}

/// Same specification with dependency (times 100) as the response.
pub fn pooled_model_dependency<S: Scalar>(
    panel: &Panel<S>,
    settings: &InferenceSettings,
) -> Result<PooledModel<S>> {
    let design = pooled_design(panel, "dependency_x100", |r| r.dependency)?;
    let fit = fit_with_pvalues(&design, settings.replications, settings.seed, settings.scheme)?;
    Ok(PooledModel { design, fit })
}

/// Predicted response over an openness grid for each region, all other
/// variables held at their means.
pub fn openness_marginal_effects<S: Scalar>(
    model: &PooledModel<S>,
    grid_points: usize,
) -> Result<MarginalEffectsTable<S>> {
    let x = model.design.x();
    let col = model
        .design
        .terms()
        .iter()
        .position(|t| matches!(t, crate::inference::Term::Var(v) if v == "Openness"))
        .expect("pooled design has an Openness column");
    let min = x.column(col).iter().copied().fold(S::infinity(), S::min);
    let max = x
        .column(col)
        .iter()
        .copied()
        .fold(S::neg_infinity(), S::max);
    let steps = grid_points.max(2);
    let width = (max - min) / S::from_count(steps - 1);
    let grid: Vec<S> = (0..steps)
        .map(|i| min + width * S::from_count(i))
        .collect();
    let zero = S::zero();
    let one = S::one();
    let groups = [
        GroupSetting {
            label: "Core".to_string(),
            values: vec![("GIPS".to_string(), zero), ("East".to_string(), zero)],
        },
        GroupSetting {
            label: "GIPS".to_string(),
            values: vec![("GIPS".to_string(), one), ("East".to_string(), zero)],
        },
        GroupSetting {
            label: "East".to_string(),
            values: vec![("GIPS".to_string(), zero), ("East".to_string(), one)],
        },
    ];
    marginal_effects(&model.fit, &model.design, "Openness", &grid, &groups)
}

/// Per-country bivariate slope of unevenness on openness.
#[derive(Debug, Clone)]
pub struct CountrySlope<S> {
    pub country: String,
    pub region: Region,
    pub b: S,
    pub p: S,
}

/// Bivariate model for one country with a permutation p-value, suited to
/// the small per-country samples.
pub fn country_slope<S: Scalar>(
    panel: &Panel<S>,
    country: &str,
    settings: &InferenceSettings,
) -> Result<CountrySlope<S>> {
    let series = panel.country_series(country);
    if series.is_empty() {
        return Err(Error::CountryNotInTable(country.to_string()));
    }
    let x: Vec<S> = series.iter().map(|r| r.openness).collect();
    let y: Vec<S> = series.iter().map(|r| r.unevenness).collect();
    let first = x[0];
    if x.iter().all(|v| *v == first) {
        return Err(Error::DegeneratePredictor("openness".into()));
    }
    let d = DesignMatrix::builder("unevenness", y)
        .variable("openness", x)
        .intercept()
        .main("openness")
        .build()?;
    let fit = fit_with_pvalues(&d, settings.replications, settings.seed, settings.scheme)?;
    Ok(CountrySlope {
        country: country.to_string(),
        region: series[0].region,
        b: fit.b[1],
        p: fit.p.as_ref().expect("p-values attached")[1],
    })
}

/// Slopes for every panel country, in panel order.
pub fn all_country_slopes<S: Scalar>(
    panel: &Panel<S>,
    settings: &InferenceSettings,
) -> Result<Vec<CountrySlope<S>>> {
    let countries = panel.countries();
    countries
        .par_iter()
        .map(|c| country_slope(panel, c, settings))
        .collect()
}

/// Relative change of openness and unevenness between the panel endpoints.
#[derive(Debug, Clone)]
pub struct RelativeChange<S> {
    pub country: String,
    pub region: Region,
    pub openness_change: S,
    pub unevenness_change: S,
}

pub fn relative_change<S: Scalar>(panel: &Panel<S>) -> Result<Vec<RelativeChange<S>>> {
    let first = panel.first_year();
    let last = panel.last_year();
    let mut out = Vec::new();
    for country in panel.countries() {
        let start = panel.get(country, first).expect("panel is complete");
        let end = panel.get(country, last).expect("panel is complete");
        if start.openness <= S::zero() {
            return Err(Error::ZeroBaseline {
                quantity: format!("openness of {country}"),
                year: first,
            });
        }
        if start.unevenness <= S::zero() {
            return Err(Error::ZeroBaseline {
                quantity: format!("unevenness of {country}"),
                year: first,
            });
        }
        out.push(RelativeChange {
            country: country.to_string(),
            region: start.region,
            openness_change: (end.openness - start.openness) / start.openness,
            unevenness_change: (end.unevenness - start.unevenness) / start.unevenness,
        });
    }
    Ok(out)
}

/// Mean relative change over countries: (openness, unevenness).
pub fn mean_relative_change<S: Scalar>(rows: &[RelativeChange<S>]) -> (S, S) {
    let n = S::from_count(rows.len());
    let o: S = rows.iter().map(|r| r.openness_change).sum();
    let u: S = rows.iter().map(|r| r.unevenness_change).sum();
    (o / n, u / n)
}

/// Unweighted mean openness per region per year.
#[derive(Debug, Clone)]
pub struct RegionMean<S> {
    pub year: i32,
    pub region: Region,
    pub mean_openness: S,
}

pub fn region_means<S: Scalar>(panel: &Panel<S>) -> Vec<RegionMean<S>> {
    let mut out = Vec::new();
    for year in panel.first_year()..=panel.last_year() {
        for region in [Region::Core, Region::Gips, Region::East] {
            let values: Vec<S> = panel
                .records()
                .iter()
                .filter(|r| r.year == year && r.region == region)
                .map(|r| r.openness)
                .collect();
            if values.is_empty() {
                continue;
            }
            let mean = values.iter().copied().sum::<S>() / S::from_count(values.len());
            out.push(RegionMean {
                year,
                region,
                mean_openness: mean,
            });
        }
    }
    out
}
