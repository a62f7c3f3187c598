//! `mrio`: ingest world input-output tables, compute integration indices,
//! and reproduce the pooled panel models with permutation inference.
//!
//! Exit codes: 0 success, 2 ingestion error, 3 incomplete panel,
//! 4 validation failure.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use mrio_core::accounts::{derive_national_accounts, AccountsOptions};
use mrio_core::ingest::{parse_canonical, parse_wiot, write_canonical, IngestOptions, IngestReport};
use mrio_core::metrics::{sector_profiles, MetricsOptions};
use mrio_core::output::{
    write_country_slopes_csv, write_metrics_csv, write_model_json, write_panel_csv,
    write_profiles_csv, write_region_means_csv, write_relative_change_csv, write_trajectory_csv,
    RunMetadata,
};
use mrio_core::panel::{
    all_country_slopes, build_panel, mean_relative_change, openness_marginal_effects,
    pooled_model_dependency, pooled_model_unevenness, region_means, relative_change,
    AnalysisOptions, InferenceSettings,
};
use mrio_core::table::MrioTable;
use mrio_core::taxonomy::Taxonomy;
use mrio_core::trajectory::{smooth_and_classify, SmoothingConfig};
use mrio_core::validate::{run_checks, ValidateConfig};
use mrio_core::{Error as CoreError, PermutationScheme};

const VERSION: &str = env!("CARGO_PKG_VERSION");

const EXIT_INGEST: u8 = 2;
const EXIT_INCOMPLETE_PANEL: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "mrio", version, about = "Multi-regional input-output analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert WIOT spreadsheet exports into canonical long-format CSV.
    Ingest(IngestArgs),
    /// Build the panel and emit every analysis output.
    Analyze(AnalyzeArgs),
    /// Run the invariant suite over canonical files.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Single WIOT CSV export to convert.
    #[arg(long, requires = "year", requires = "out")]
    wiot: Option<PathBuf>,
    /// Year of the single file.
    #[arg(long)]
    year: Option<i32>,
    /// Output path for the single canonical file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory of `wiot_<year>.csv` files for batch conversion.
    #[arg(long, conflicts_with = "wiot")]
    data_dir: Option<PathBuf>,
    /// Year range for batch conversion, e.g. `1995..2011`.
    #[arg(long, default_value = "1995..2011")]
    years: String,
    /// Output directory for batch conversion.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory holding `canonical_<year>.csv` files.
    #[arg(long)]
    data_dir: PathBuf,
    /// Panel year range, e.g. `1995..2011`.
    #[arg(long, default_value = "1995..2011")]
    years: String,
    /// Taxonomy CSV (`iso3,region`); the builtin 24-country set by default.
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Permutation replications per model.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1_000..))]
    replications: u64,
    /// Seed for every permutation run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Significance threshold for slope coloring and the slopes table.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Output directory.
    #[arg(long)]
    out_dir: PathBuf,
    /// Sector profiles to emit, e.g. `DEU:1995,DEU:2011`.
    #[arg(long)]
    profiles: Option<String>,
    /// Count flows to the rest-of-world pseudo-country as cross-border.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    include_row_partner: bool,
    /// Add partner-country final use as pseudo-partners in the dependency
    /// ranking.
    #[arg(long)]
    dependency_final_use: bool,
    /// Use residual (Freedman-Lane) permutation instead of response
    /// shuffling.
    #[arg(long)]
    freedman_lane: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Directory holding `canonical_<year>.csv` files.
    #[arg(long)]
    data_dir: PathBuf,
    /// Expected panel year range.
    #[arg(long, default_value = "1995..2011")]
    years: String,
    /// Taxonomy CSV; the builtin 24-country set by default.
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Count flows to the rest-of-world pseudo-country as cross-border.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    include_row_partner: bool,
    /// Add partner-country final use as pseudo-partners in the dependency
    /// ranking.
    #[arg(long)]
    dependency_final_use: bool,
}

struct Failure {
    exit: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(exit: u8, error: anyhow::Error) -> Self {
        Self { exit, error }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.exit)
        }
    }
}

fn parse_years(spec: &str) -> anyhow::Result<(i32, i32)> {
    let spec = spec.trim();
    let (a, b) = if let Some((a, b)) = spec.split_once("..") {
        (a, b)
    } else if let Some((a, b)) = spec.split_once('-') {
        (a, b)
    } else {
        (spec, spec)
    };
    let from: i32 = a.trim().parse().context("bad year range")?;
    let to: i32 = b.trim().parse().context("bad year range")?;
    if from > to {
        return Err(anyhow!("year range {from}..{to} is reversed"));
    }
    Ok((from, to))
}

fn load_taxonomy(path: &Option<PathBuf>) -> anyhow::Result<(Taxonomy, String)> {
    match path {
        Some(p) => {
            let tax = Taxonomy::from_csv_path(p)
                .with_context(|| format!("loading taxonomy {}", p.display()))?;
            Ok((tax, p.display().to_string()))
        }
        None => Ok((Taxonomy::wiod24(), "builtin-24".to_string())),
    }
}

fn cmd_ingest(args: IngestArgs) -> Result<(), Failure> {
    let fail = |e: anyhow::Error| Failure::new(EXIT_INGEST, e);
    match (&args.wiot, &args.data_dir) {
        (Some(file), None) => {
            let year = args.year.expect("clap enforces --year");
            let out = args.out.as_ref().expect("clap enforces --out");
            let report = ingest_one(file, year, out).map_err(fail)?;
            print_report(year, &report);
            Ok(())
        }
        (None, Some(dir)) => {
            let out_dir = args
                .out_dir
                .as_ref()
                .ok_or_else(|| fail(anyhow!("--out-dir is required with --data-dir")))?;
            let (from, to) = parse_years(&args.years).map_err(fail)?;
            std::fs::create_dir_all(out_dir)
                .context("creating output directory")
                .map_err(fail)?;
            let mut rows = Vec::new();
            for year in from..=to {
                let input = dir.join(format!("wiot_{year}.csv"));
                if !input.exists() {
                    return Err(fail(anyhow!(
                        "missing WIOT file for year {year}: {}",
                        input.display()
                    )));
                }
                let out = out_dir.join(format!("canonical_{year}.csv"));
                let report = ingest_one(&input, year, &out).map_err(fail)?;
                print_report(year, &report);
                rows.push((year, report));
            }
            let report_path = out_dir.join("ingest_report.csv");
            let mut w = BufWriter::new(
                File::create(&report_path)
                    .context("creating ingest report")
                    .map_err(fail)?,
            );
            let mut write_all = || -> std::io::Result<()> {
                writeln!(w, "# tool: mrio {VERSION}")?;
                writeln!(
                    w,
                    "year,clamped_cells,clamped_mass,dropped_excluded_rows,dropped_excluded_cols,ignored_columns"
                )?;
                for (year, r) in &rows {
                    writeln!(
                        w,
                        "{year},{},{},{},{},{}",
                        r.clamped_cells,
                        r.clamped_mass,
                        r.dropped_excluded_rows,
                        r.dropped_excluded_cols,
                        r.ignored_columns
                    )?;
                }
                Ok(())
            };
            write_all().context("writing ingest report").map_err(fail)?;
            println!("wrote {}", report_path.display());
            Ok(())
        }
        _ => Err(fail(anyhow!(
            "use either --wiot/--year/--out or --data-dir/--years/--out-dir"
        ))),
    }
}

fn ingest_one(input: &Path, year: i32, out: &Path) -> anyhow::Result<IngestReport> {
    let opts = IngestOptions::default();
    let (table, report) = parse_wiot::<f64>(input, year, &opts)
        .with_context(|| format!("parsing {}", input.display()))?;
    let meta = vec![
        ("tool".to_string(), format!("mrio {VERSION}")),
        ("source".to_string(), input.display().to_string()),
        ("clamped_cells".to_string(), report.clamped_cells.to_string()),
        (
            "dropped_excluded_rows".to_string(),
            report.dropped_excluded_rows.to_string(),
        ),
    ];
    let mut w = BufWriter::new(
        File::create(out).with_context(|| format!("creating {}", out.display()))?,
    );
    write_canonical(&table, &mut w, &meta)?;
    Ok(report)
}

fn print_report(year: i32, r: &IngestReport) {
    println!(
        "{year}: clamped {} negative cell(s) (mass {}), dropped {} excluded row(s) and {} column(s), ignored {} column(s)",
        r.clamped_cells, r.clamped_mass, r.dropped_excluded_rows, r.dropped_excluded_cols, r.ignored_columns
    );
}

/// Parse the canonical file for each year, in parallel. Missing files are an
/// incomplete panel; unreadable or malformed files are ingestion errors.
fn load_tables(
    dir: &Path,
    years: (i32, i32),
) -> Result<(Vec<MrioTable<f64>>, String), Failure> {
    let (from, to) = years;
    let expected: Vec<i32> = (from..=to).collect();
    let missing: Vec<i32> = expected
        .iter()
        .filter(|y| !dir.join(format!("canonical_{y}.csv")).exists())
        .copied()
        .collect();
    if !missing.is_empty() {
        let list = missing
            .iter()
            .map(|y| y.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Failure::new(
            EXIT_INCOMPLETE_PANEL,
            anyhow!("incomplete panel: no canonical file for year(s) {list} in {}", dir.display()),
        ));
    }

    let opts = IngestOptions::default();
    let mut tables: Vec<(i32, MrioTable<f64>)> = expected
        .par_iter()
        .map(|year| {
            let path = dir.join(format!("canonical_{year}.csv"));
            let file = File::open(&path)
                .with_context(|| format!("opening {}", path.display()))?;
            let (table, _) = parse_canonical::<f64, _>(BufReader::new(file), &opts)
                .with_context(|| format!("parsing {}", path.display()))?;
            if table.year() != *year {
                return Err(anyhow!(
                    "{} declares year {}, expected {year}",
                    path.display(),
                    table.year()
                ));
            }
            Ok((*year, table))
        })
        .collect::<anyhow::Result<_>>()
        .map_err(|e| Failure::new(EXIT_INGEST, e))?;
    tables.sort_by_key(|(y, _)| *y);

    // one combined digest over every input file, in year order
    let mut hasher = Sha256::new();
    for year in &expected {
        let path = dir.join(format!("canonical_{year}.csv"));
        let bytes = std::fs::read(&path)
            .with_context(|| format!("hashing {}", path.display()))
            .map_err(|e| Failure::new(EXIT_INGEST, e))?;
        hasher.update(format!("canonical_{year}.csv\n").as_bytes());
        hasher.update(&bytes);
    }
    let digest = format!("{:x}", hasher.finalize());
    Ok((tables.into_iter().map(|(_, t)| t).collect(), digest))
}

fn exit_for(err: &CoreError) -> u8 {
    match err {
        CoreError::MissingYears(_) => EXIT_INCOMPLETE_PANEL,
        _ => 1,
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let years = parse_years(&args.years).map_err(|e| Failure::new(EXIT_INGEST, e))?;
    let (taxonomy, taxonomy_label) =
        load_taxonomy(&args.taxonomy).map_err(|e| Failure::new(EXIT_INGEST, e))?;
    let (tables, input_digest) = load_tables(&args.data_dir, years)?;

    let analysis = AnalysisOptions {
        accounts: AccountsOptions {
            include_row_partner: args.include_row_partner,
        },
        metrics: MetricsOptions {
            dependency_final_use: args.dependency_final_use,
        },
    };
    let scheme = if args.freedman_lane {
        PermutationScheme::ResidualShuffle
    } else {
        PermutationScheme::ResponseShuffle
    };
    let settings = InferenceSettings {
        replications: args.replications as usize,
        seed: args.seed,
        scheme,
    };

    let panel = build_panel(&tables, &taxonomy, years, &analysis)
        .map_err(|e| Failure::new(exit_for(&e), e.into()))?;

    std::fs::create_dir_all(&args.out_dir)
        .context("creating output directory")
        .map_err(|e| Failure::new(1, e))?;

    let mut meta = RunMetadata::new(VERSION);
    meta.push("seed", args.seed);
    meta.push("replications", args.replications);
    meta.push("alpha", args.alpha);
    meta.push("years", format!("{}..{}", years.0, years.1));
    meta.push("taxonomy", &taxonomy_label);
    meta.push(
        "flags",
        format!(
            "include_row_partner={},dependency_final_use={},freedman_lane={}",
            args.include_row_partner, args.dependency_final_use, args.freedman_lane
        ),
    );
    meta.push("input_sha256", &input_digest);

    let fail = |e: CoreError| Failure::new(exit_for(&e), e.into());
    let io_fail = |e: CoreError| Failure::new(1, anyhow::Error::from(e));
    let out = |name: &str| args.out_dir.join(name);
    let writer = |name: &str| -> Result<BufWriter<File>, Failure> {
        File::create(out(name))
            .with_context(|| format!("creating {name}"))
            .map(BufWriter::new)
            .map_err(|e| Failure::new(1, e))
    };

    write_metrics_csv(panel.records(), &meta, writer("metrics.csv")?).map_err(io_fail)?;
    write_panel_csv(&panel, &meta, writer("panel.csv")?).map_err(io_fail)?;

    let unevenness_model = pooled_model_unevenness(&panel, &settings).map_err(fail)?;
    let unevenness_margins =
        openness_marginal_effects(&unevenness_model, 21).map_err(fail)?;
    write_model_json(
        "pooled unevenness",
        "unevenness_x100",
        &unevenness_model.fit,
        Some(&unevenness_margins),
        &meta,
        writer("table2.json")?,
    )
    .map_err(io_fail)?;

    let dependency_model = pooled_model_dependency(&panel, &settings).map_err(fail)?;
    let dependency_margins =
        openness_marginal_effects(&dependency_model, 21).map_err(fail)?;
    write_model_json(
        "pooled dependency",
        "dependency_x100",
        &dependency_model.fit,
        Some(&dependency_margins),
        &meta,
        writer("table3.json")?,
    )
    .map_err(io_fail)?;

    let slopes = all_country_slopes(&panel, &settings).map_err(fail)?;
    write_country_slopes_csv(&slopes, args.alpha, &meta, writer("country_slopes.csv")?)
        .map_err(io_fail)?;

    let changes = relative_change(&panel).map_err(fail)?;
    let (mean_open, mean_uneven) = mean_relative_change(&changes);
    let mut change_meta = meta.clone();
    change_meta.push("mean_openness_change", mean_open);
    change_meta.push("mean_unevenness_change", mean_uneven);
    write_relative_change_csv(&changes, &change_meta, writer("relative_change.csv")?)
        .map_err(io_fail)?;

    write_region_means_csv(&region_means(&panel), &meta, writer("region_means.csv")?)
        .map_err(io_fail)?;

    let smoothing = SmoothingConfig {
        alpha: args.alpha,
        ..SmoothingConfig::default()
    };
    for country in panel.countries() {
        let trajectory = smooth_and_classify(&panel, country, &smoothing, &settings)
            .map_err(fail)?;
        write_trajectory_csv(
            &trajectory,
            &meta,
            writer(&format!("trajectory_{country}.csv"))?,
        )
        .map_err(io_fail)?;
    }

    if let Some(spec) = &args.profiles {
        let registry = tables[0].registry().clone();
        for (country, year) in parse_profiles_spec(spec).map_err(|e| Failure::new(1, e))? {
            let table = tables
                .iter()
                .find(|t| t.year() == year)
                .ok_or_else(|| Failure::new(1, anyhow!("no table for year {year}")))?;
            let acc = derive_national_accounts(table, &country, &analysis.accounts)
                .map_err(fail)?;
            let mut profiles = sector_profiles(&acc).map_err(fail)?;
            for p in &mut profiles {
                p.sector_code = registry.code(p.sector_index).to_string();
            }
            write_profiles_csv(
                &profiles,
                &meta,
                writer(&format!("profiles_{country}_{year}.csv"))?,
            )
            .map_err(io_fail)?;
        }
    }

    println!(
        "analyzed {} country-years into {}",
        panel.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn parse_profiles_spec(spec: &str) -> anyhow::Result<Vec<(String, i32)>> {
    spec.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let (country, year) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| anyhow!("profile spec `{part}` is not COUNTRY:YEAR"))?;
            Ok((
                mrio_core::normalize_country(country),
                year.trim().parse::<i32>().context("bad profile year")?,
            ))
        })
        .collect()
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    let years = parse_years(&args.years).map_err(|e| Failure::new(EXIT_INGEST, e))?;
    let (taxonomy, _) =
        load_taxonomy(&args.taxonomy).map_err(|e| Failure::new(EXIT_INGEST, e))?;

    // parse whatever is present; absences fail the panel-count check rather
    // than aborting the run
    let opts = IngestOptions::default();
    let mut tables = Vec::new();
    for year in years.0..=years.1 {
        let path = args.data_dir.join(format!("canonical_{year}.csv"));
        if !path.exists() {
            continue;
        }
        let file = File::open(&path)
            .with_context(|| format!("opening {}", path.display()))
            .map_err(|e| Failure::new(EXIT_INGEST, e))?;
        let (table, _) = parse_canonical::<f64, _>(BufReader::new(file), &opts)
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(|e| Failure::new(EXIT_INGEST, e))?;
        tables.push(table);
    }

    let analysis = AnalysisOptions {
        accounts: AccountsOptions {
            include_row_partner: args.include_row_partner,
        },
        metrics: MetricsOptions {
            dependency_final_use: args.dependency_final_use,
        },
    };
    let outcomes = run_checks(&tables, &taxonomy, &analysis, years, &ValidateConfig::default());
    let mut all_ok = true;
    let mut summary = String::new();
    for o in &outcomes {
        all_ok &= o.passed;
        let _ = writeln!(
            summary,
            "{}: {} ({})",
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    print!("{summary}");
    if all_ok {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VALIDATION, anyhow!("validation failed")))
    }
}
