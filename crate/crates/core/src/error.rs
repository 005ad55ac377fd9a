use chrono::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty document")]
    EmptyDocument,
    #[error("malformed date {value:?} at row {row}")]
    MalformedDate { row: usize, value: String },
    #[error("non-numeric price {value:?} in column {column:?} at row {row}")]
    NonNumericPrice {
        row: usize,
        column: String,
        value: String,
    },
    #[error("duplicate date at row {row}")]
    DuplicateDate { row: usize },
    #[error("csv error at row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("empty intersection")]
    EmptyIntersection,
    #[error("leading gap in panel {panel} before {date} cannot be forward-filled")]
    LeadingGap { panel: usize, date: NaiveDate },
    #[error("non-positive price {value} for asset {asset:?} on {date}")]
    NonPositivePrice {
        asset: String,
        date: NaiveDate,
        value: f64,
    },
    #[error("insufficient observations: need at least {required}, got {available}")]
    InsufficientData { required: usize, available: usize },
    #[error("window too short: need at least {required} rows, got {available}")]
    WindowTooShort { required: usize, available: usize },
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("singular regression")]
    SingularRegression,
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("degenerate series")]
    DegenerateSeries,
    #[error("date misalignment: {0}")]
    DateMisalignment(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("all windows are gaps")]
    AllGaps,
    #[error("asset {index}: {source}")]
    Asset { index: usize, source: Box<Error> },
    #[error("window ending {date}: {source}")]
    Window { date: NaiveDate, source: Box<Error> },
}

impl Error {
    pub(crate) fn for_asset(self, index: usize) -> Self {
        Error::Asset {
            index,
            source: Box::new(self),
        }
    }

    pub(crate) fn for_window(self, date: NaiveDate) -> Self {
        Error::Window {
            date,
            source: Box::new(self),
        }
    }

    /// The innermost error, with asset/window annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Asset { source, .. } | Error::Window { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerics (singular systems, degenerate inputs)
    /// rather than malformed data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::ZeroVariance(_)
                | Error::SingularRegression
                | Error::NotPositiveDefinite(_)
                | Error::DegenerateSeries
                | Error::AllGaps
        )
    }
}
