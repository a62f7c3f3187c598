//! Invariant checks over loaded tables, used by the `validate` command.

use crate::accounts::{derive_national_accounts, AccountsOptions};
use crate::metrics::{dependency, metrics_record, ude_vector};
use crate::panel::AnalysisOptions;
use crate::scalar::Scalar;
use crate::table::MrioTable;
use crate::taxonomy::Taxonomy;

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: false,
            detail,
        }
    }
}

/// Tolerances for the invariant suite.
#[derive(Debug, Clone, Copy)]
pub struct ValidateConfig {
    /// Absolute bound on the UDE sum per country-year.
    pub ude_sum_tol: f64,
    /// Relative bound for index equality under uniform scaling.
    pub scale_tol: f64,
    /// Relative bound for flow-mass reconstruction.
    pub reconstruction_tol: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            ude_sum_tol: 1e-9,
            scale_tol: 1e-9,
            reconstruction_tol: 1e-6,
        }
    }
}

/// Run every invariant check. `expected_years` pins the intended panel
/// coverage; tables for other years count as failures of the panel check.
pub fn run_checks<S: Scalar>(
    tables: &[MrioTable<S>],
    taxonomy: &Taxonomy,
    opts: &AnalysisOptions,
    expected_years: (i32, i32),
    cfg: &ValidateConfig,
) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    out.push(check_panel_count(tables, taxonomy, expected_years));
    out.push(check_reconstruction(tables, taxonomy, cfg));
    out.push(check_ude_sum(tables, taxonomy, opts, cfg));
    out.push(check_dependency_bounds(tables, taxonomy, opts));
    out.push(check_scale_invariance(tables, taxonomy, opts, cfg));
    out
}

fn check_panel_count<S: Scalar>(
    tables: &[MrioTable<S>],
    taxonomy: &Taxonomy,
    expected_years: (i32, i32),
) -> CheckOutcome {
    const NAME: &str = "panel-count";
    let (from, to) = expected_years;
    let mut years: Vec<i32> = tables.iter().map(|t| t.year()).collect();
    years.sort_unstable();
    let expected: Vec<i32> = (from..=to).collect();
    if years != expected {
        return CheckOutcome::fail(
            NAME,
            format!(
                "expected years {from}..{to}, found {} table(s) covering {:?}",
                years.len(),
                years
            ),
        );
    }
    for t in tables {
        for (c, _) in taxonomy.countries() {
            if t.country_pos(c).is_none() {
                return CheckOutcome::fail(
                    NAME,
                    format!("country {c} missing from the {} table", t.year()),
                );
            }
        }
    }
    let n = taxonomy.len() * expected.len();
    CheckOutcome::pass(
        NAME,
        format!("{} countries x {} years = {n} records", taxonomy.len(), expected.len()),
    )
}

/// Every analysis country's supply splits exactly into domestic
/// intermediate use, cross-border outflows and domestic final use; adding
/// the non-analysis remainder must reproduce the grand total.
fn check_reconstruction<S: Scalar>(
    tables: &[MrioTable<S>],
    taxonomy: &Taxonomy,
    cfg: &ValidateConfig,
) -> CheckOutcome {
    const NAME: &str = "reconstruction";
    // Cross-border aggregates must count every foreign partner here, so the
    // rest-of-world switch is deliberately ignored.
    let opts = AccountsOptions {
        include_row_partner: true,
    };
    for table in tables {
        let grand = table.grand_total();
        let mut assembled = S::zero();
        for (c, _) in taxonomy.countries() {
            let acc = match derive_national_accounts(table, c, &opts) {
                Ok(acc) => acc,
                Err(e) => return CheckOutcome::fail(NAME, format!("{}: {e}", table.year())),
            };
            assembled += acc.zdom.sum() + acc.exports.sum() + acc.dfu;
        }
        for (pos, country) in table.countries().iter().enumerate() {
            if !taxonomy.contains(country) {
                assembled += table.row_total(pos);
            }
        }
        let diff = (assembled - grand).abs();
        let tol = grand.abs().max(S::one()) * S::from_f64_lossy(cfg.reconstruction_tol);
        if diff > tol {
            return CheckOutcome::fail(
                NAME,
                format!(
                    "{}: assembled {assembled} vs grand total {grand}",
                    table.year()
                ),
            );
        }
    }
    CheckOutcome::pass(NAME, format!("{} table(s) conserve flow mass", tables.len()))
}

fn check_ude_sum<S: Scalar>(
    tables: &[MrioTable<S>],
    taxonomy: &Taxonomy,
    opts: &AnalysisOptions,
    cfg: &ValidateConfig,
) -> CheckOutcome {
    const NAME: &str = "sum-ude-zero";
    let tol = S::from_f64_lossy(cfg.ude_sum_tol);
    let mut worst = S::zero();
    for table in tables {
        for (c, _) in taxonomy.countries() {
            let acc = match derive_national_accounts(table, c, &opts.accounts) {
                Ok(acc) => acc,
                Err(e) => return CheckOutcome::fail(NAME, format!("{c} {}: {e}", table.year())),
            };
            let sum = match ude_vector(&acc) {
                Ok(u) => u.sum().abs(),
                Err(e) => return CheckOutcome::fail(NAME, format!("{c} {}: {e}", table.year())),
            };
            worst = worst.max(sum);
            if sum > tol {
                return CheckOutcome::fail(
                    NAME,
                    format!("{c} {}: |sum UDE| = {sum}", table.year()),
                );
            }
        }
    }
    CheckOutcome::pass(NAME, format!("worst |sum UDE| = {worst}"))
}

fn check_dependency_bounds<S: Scalar>(
    tables: &[MrioTable<S>],
    taxonomy: &Taxonomy,
    opts: &AnalysisOptions,
) -> CheckOutcome {
    const NAME: &str = "dependency-bounds";
    for table in tables {
        for (c, _) in taxonomy.countries() {
            let acc = match derive_national_accounts(table, c, &opts.accounts) {
                Ok(acc) => acc,
                Err(e) => return CheckOutcome::fail(NAME, format!("{c} {}: {e}", table.year())),
            };
            match dependency(&acc, &opts.metrics) {
                Ok(dep) => {
                    for (i, gap) in &dep.gaps {
                        if *gap < S::zero() || *gap > S::one() {
                            return CheckOutcome::fail(
                                NAME,
                                format!("{c} {} sector {i}: gap {gap}", table.year()),
                            );
                        }
                    }
                }
                Err(e) => return CheckOutcome::fail(NAME, format!("{c} {}: {e}", table.year())),
            }
        }
    }
    CheckOutcome::pass(NAME, "all sector gaps within [0, 1]".to_string())
}

/// Indices must not move when a table is uniformly scaled; size must scale.
fn check_scale_invariance<S: Scalar>(
    tables: &[MrioTable<S>],
    taxonomy: &Taxonomy,
    opts: &AnalysisOptions,
    cfg: &ValidateConfig,
) -> CheckOutcome {
    const NAME: &str = "scale-invariance";
    let Some(table) = tables.first() else {
        return CheckOutcome::fail(NAME, "no tables".to_string());
    };
    let factor = S::from_f64_lossy(3.7);
    let scaled = table.scaled(factor);
    let tol = S::from_f64_lossy(cfg.scale_tol);
    let rel = |a: S, b: S| (a - b).abs() / a.abs().max(S::one());
    for (c, region) in taxonomy.countries() {
        let base = derive_national_accounts(table, c, &opts.accounts)
            .and_then(|acc| metrics_record(&acc, region, &opts.metrics));
        let big = derive_national_accounts(&scaled, c, &opts.accounts)
            .and_then(|acc| metrics_record(&acc, region, &opts.metrics));
        match (base, big) {
            (Ok(a), Ok(b)) => {
                if rel(a.openness, b.openness) > tol
                    || rel(a.unevenness, b.unevenness) > tol
                    || rel(a.dependency, b.dependency) > tol
                {
                    return CheckOutcome::fail(NAME, format!("{c}: indices moved under scaling"));
                }
                if rel(a.size * factor, b.size) > tol {
                    return CheckOutcome::fail(NAME, format!("{c}: size did not scale"));
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                return CheckOutcome::fail(NAME, format!("{c}: {e}"))
            }
        }
    }
    CheckOutcome::pass(
        NAME,
        format!("indices invariant under x{factor} on the {} table", table.year()),
    )
}
