use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate network: {0}")]
    DegenerateNetwork(String),

    #[error("degenerate imputation problem: {0}")]
    DegenerateProblem(String),

    #[error("infeasible constraints: {axis} {index} requires {required} but target is {target}")]
    Infeasible {
        axis: Axis,
        index: usize,
        required: f64,
        target: f64,
    },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("dense oracle limited to n <= {limit} (got n = {n}); use the Lanczos solver")]
    OracleTooLarge { n: usize, limit: usize },

    #[error("mixing time is infinite for lambda2 = {0} (disconnected network)")]
    InfiniteMixing(f64),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("degenerate scenario: {0}")]
    DegenerateScenario(String),

    #[error("missing coordinates for node {0}")]
    MissingGeo(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("collinear regressors: {}", .0.join(", "))]
    CollinearControls(Vec<String>),

    #[error("no observations for event year {0}")]
    MissingYear(i32),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("infeasible estimation window: {0}")]
    Window(String),

    #[error("sample too small: {0}")]
    SampleTooSmall(String),

    #[error("identification failure: {0}")]
    Identification(String),

    #[error("bootstrap unstable: {failed} of {reps} replications failed")]
    BootstrapUnstable { failed: usize, reps: usize },

    #[error("spectrum does not correspond to graph: {0}")]
    StaleSpectrum(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which marginal an infeasibility refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
