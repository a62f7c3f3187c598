//! Multi-regional input-output analytics.
//!
//! This crate ingests world input-output tables, derives per-country
//! national accounts, computes three country-level integration indices
//! (openness, unevenness of upstream domestic embedding, export-partner
//! dependency) with per-sector profiles, and runs pooled panel regressions
//! with permutation inference plus smoothed country trajectories.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the crate
//! root exports `f64` aliases for the common types, which is what the CLI
//! uses.

pub mod accounts;
pub mod error;
pub mod inference;
pub mod ingest;
pub mod metrics;
pub mod output;
pub mod panel;
mod qr;
pub mod scalar;
pub mod synth;
pub mod table;
pub mod taxonomy;
pub mod trajectory;
pub mod validate;

pub use accounts::{derive_national_accounts, AccountsOptions, NationalAccounts};
pub use error::{Error, Result};
pub use inference::{
    fit_with_pvalues, marginal_effects, ols_fit, permutation_pvalues, DesignMatrix, GroupSetting,
    MarginalEffectsTable, PermutationScheme, RegressionResult, Term,
};
pub use ingest::{
    parse_canonical, parse_wiot, write_canonical, IngestOptions, IngestReport, CANONICAL_HEADER,
};
pub use metrics::{
    dependency, metrics_record, openness, sector_profiles, ude_vector, unevenness,
    DependencyBreakdown, MetricsOptions, MetricsRecord, SectorProfile,
};
pub use panel::{
    all_country_slopes, build_panel, country_slope, mean_relative_change,
    openness_marginal_effects, pooled_model_dependency, pooled_model_unevenness, region_means,
    relative_change, AnalysisOptions, CountrySlope, InferenceSettings, Panel, PooledModel,
    RegionMean, RelativeChange,
};
pub use scalar::Scalar;
pub use table::{Dest, MrioTable, TableBuilder};
pub use taxonomy::{normalize_country, Region, SectorRegistry, Taxonomy, ROW_COUNTRY};
pub use trajectory::{
    smooth_and_classify, ShapeTag, SlopeClass, SmoothingConfig, Trajectory, TrajectoryBin,
};

/// `f64` aliases, the default precision of the CLI.
pub type MrioTable64 = table::MrioTable<f64>;
pub type NationalAccounts64 = accounts::NationalAccounts<f64>;
pub type MetricsRecord64 = metrics::MetricsRecord<f64>;
pub type Panel64 = panel::Panel<f64>;
pub type RegressionResult64 = inference::RegressionResult<f64>;
pub type Trajectory64 = trajectory::Trajectory<f64>;

/// `f32` aliases for memory-constrained experimentation.
pub type MrioTable32 = table::MrioTable<f32>;
pub type NationalAccounts32 = accounts::NationalAccounts<f32>;
pub type MetricsRecord32 = metrics::MetricsRecord<f32>;
pub type Panel32 = panel::Panel<f32>;
pub type RegressionResult32 = inference::RegressionResult<f32>;
pub type Trajectory32 = trajectory::Trajectory<f32>;
