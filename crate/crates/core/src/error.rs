use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while loading data or running an estimator.
///
/// Variants fall into three families which map onto the CLI exit codes:
/// input problems (2), estimator degeneracy (3) and bootstrap instability (4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: {reason}")]
    BadCell {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("row {row}: sigma must be strictly positive, got {value}")]
    NonPositiveSigma { row: usize, value: f64 },

    #[error("group `{group}` has {size} member(s); at least 2 are required")]
    SmallGroup { group: String, size: usize },

    #[error("group `{group}` has no within-group dispersion in x, so its sigma is zero")]
    ZeroWithinVariance { group: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("covariate columns {columns:?} are collinear with the intercept or each other")]
    Collinear { columns: Vec<usize> },

    #[error("invalid spec at `{pointer}`: {message}")]
    Spec { pointer: String, message: String },

    #[error("signal variance not identified in sample: var(X) - E[sigma^2] = {value}")]
    SignalVarianceNotIdentified { value: f64 },

    #[error("degenerate regressor: {0}")]
    DegenerateRegressor(String),

    #[error("zero first stage: {0}")]
    ZeroFirstStage(String),

    #[error("non-finite mixture log-likelihood at iteration {iteration}")]
    NonFiniteLikelihood { iteration: usize },

    #[error("posterior underflow at x = {x}, sigma = {sigma}: every atom has zero likelihood (support [{lo}, {hi}])")]
    PosteriorUnderflow { x: f64, sigma: f64, lo: f64, hi: f64 },

    #[error("diagnostics undefined under homoskedasticity: sigma is constant")]
    Homoskedastic,

    #[error("calibration infeasible: conditional variance clamped at zero on {clamped_fraction:.3} of the grid")]
    CalibrationInfeasible { clamped_fraction: f64 },

    #[error("bootstrap unstable: {failed} of {total} draws failed")]
    BootstrapUnstable { failed: usize, total: usize },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SignalVarianceNotIdentified { .. }
            | Error::DegenerateRegressor(_)
            | Error::ZeroFirstStage(_)
            | Error::NonFiniteLikelihood { .. }
            | Error::PosteriorUnderflow { .. }
            | Error::Homoskedastic
            | Error::CalibrationInfeasible { .. } => 3,
            Error::BootstrapUnstable { .. } => 4,
            _ => 2,
        }
    }

    /// Stable machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Schema(_) => "schema",
            Error::MissingColumn(_) => "missing_column",
            Error::BadCell { .. } => "bad_cell",
            Error::NonPositiveSigma { .. } => "non_positive_sigma",
            Error::SmallGroup { .. } => "small_group",
            Error::ZeroWithinVariance { .. } => "zero_within_variance",
            Error::InvalidInput(_) => "invalid_input",
            Error::Collinear { .. } => "collinear",
            Error::Spec { .. } => "spec",
            Error::SignalVarianceNotIdentified { .. } => "signal_variance_not_identified",
            Error::DegenerateRegressor(_) => "degenerate_regressor",
            Error::ZeroFirstStage(_) => "zero_first_stage",
            Error::NonFiniteLikelihood { .. } => "non_finite_likelihood",
            Error::PosteriorUnderflow { .. } => "posterior_underflow",
            Error::Homoskedastic => "homoskedastic",
            Error::CalibrationInfeasible { .. } => "calibration_infeasible",
            Error::BootstrapUnstable { .. } => "bootstrap_unstable",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
