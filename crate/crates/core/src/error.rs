use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("country not in table: {0}")]
    CountryNotInTable(String),

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("canonical header mismatch: expected `{expected}`, found `{found}`")]
    CanonicalHeader { expected: String, found: String },

    #[error("line {line}: unknown sector or final-use code `{code}`")]
    UnknownCode { line: u64, code: String },

    #[error("line {line}: sector {code} ({name}) is excluded from the analysis")]
    ExcludedSector {
        line: u64,
        code: String,
        name: String,
    },

    #[error("line {line}: invalid value `{value}`")]
    InvalidValue { line: u64, value: String },

    #[error("multiple years in one table stream: {0} and {1}")]
    MixedYears(i32, i32),

    #[error("unrecognized WIOT layout: {0}")]
    UnrecognizedLayout(String),

    #[error("year mismatch: expected {expected}, file reports {found}")]
    YearMismatch { expected: i32, found: i32 },

    #[error("degenerate domestic economy: no off-diagonal domestic flows or final use")]
    DegenerateDomesticEconomy,

    #[error("no exports: UDE undefined")]
    NoExports,

    #[error("dependency undefined: no sector has foreign intermediate outflows")]
    DependencyUndefined,

    #[error("invalid design: {0}")]
    Design(String),

    #[error("design matrix needs more rows than columns ({rows} rows, {cols} columns)")]
    TooFewRows { rows: usize, cols: usize },

    #[error("rank-deficient design: column(s) {} collinear with earlier columns", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("marginal effects: {0}")]
    MarginalEffects(String),

    #[error("missing years {0}")]
    MissingYears(String),

    #[error("degenerate predictor: {0} is constant")]
    DegeneratePredictor(String),

    #[error("zero baseline for {quantity} in {year}: relative change undefined")]
    ZeroBaseline { quantity: String, year: i32 },

    #[error("taxonomy: {0}")]
    Taxonomy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
