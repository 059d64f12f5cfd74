use std::path::PathBuf;

use crate::series::MonthPeriod;

/// Errors raised anywhere in the forecasting pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty series")]
    EmptySeries,

    #[error("malformed period {0:?}, expected YYYY-MM")]
    MalformedPeriod(String),

    #[error("invalid month {month} in year {year}")]
    InvalidMonth { year: i32, month: u32 },

    #[error("month gap: expected {expected}, found {found}")]
    MonthGap {
        expected: MonthPeriod,
        found: MonthPeriod,
    },

    #[error("duplicate or out-of-order period {0}")]
    DuplicatePeriod(MonthPeriod),

    #[error("negative or non-finite count {value} at {period}")]
    NegativeCount { period: MonthPeriod, value: f64 },

    #[error("negative base {0}")]
    NegativeBase(f64),

    #[error("negative incident between {period} and its predecessor ({delta})")]
    NegativeIncident { period: MonthPeriod, delta: f64 },

    #[error("period {period} precedes origin {origin}")]
    BeforeOrigin {
        period: MonthPeriod,
        origin: MonthPeriod,
    },

    #[error("invalid ISO week {iso_year}-W{iso_week:02}")]
    InvalidIsoWeek { iso_year: i32, iso_week: u32 },

    #[error("reversed date range {first} > {last}")]
    ReversedRange {
        first: chrono::NaiveDate,
        last: chrono::NaiveDate,
    },

    #[error("weekly series does not cover {0}")]
    CoverageGap(chrono::NaiveDate),

    #[error("invalid network dimensions: delays {delays}, hidden {hidden}")]
    InvalidDimensions { delays: usize, hidden: usize },

    #[error("expected {expected} lag values, got {actual}")]
    LagLength { expected: usize, actual: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("unit-step activation is not differentiable")]
    NonDifferentiable,

    #[error("degenerate normalization range [{min}, {max}]")]
    DegenerateRange { min: f64, max: f64 },

    #[error("series of length {len} is too short for {delays} delays")]
    SeriesTooShort { len: usize, delays: usize },

    #[error("cannot split {0} samples into three nonempty subsets")]
    SplitTooSmall(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("statistic undefined: {0}")]
    Undefined(&'static str),

    #[error("max lag {max_lag} must be below series length {len}")]
    LagTooLarge { max_lag: usize, len: usize },

    #[error("nonpositive baseline {0}")]
    NonPositiveBase(f64),

    #[error("period ranges differ: {0} vs {1}")]
    PeriodMismatch(String, String),

    #[error("forecast target {target} ends before observation end")]
    TargetBeforeObservation { target: MonthPeriod },

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),

    #[error("malformed model document: {0}")]
    MalformedModel(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
