use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {defect:e})")]
    NonHermitianInput { defect: f64 },

    #[error("matrix is not unitary (max |U^H U - I| = {defect:e})")]
    NonUnitaryInput { defect: f64 },

    #[error("{0} did not converge")]
    ConvergenceFailure(&'static str),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point outside the metric domain (|z|^2 = {norm_sq})")]
    OutOfDomain { norm_sq: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel produced a non-real or negative weight at ({row}, {col})")]
    ComplexWeight { row: usize, col: usize },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("unsupported kernel for this operation: {0}")]
    UnsupportedKernel(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("spectral map is invalid on this spectrum: {0}")]
    InvalidMapDomain(String),

    #[error("band set is empty")]
    EmptyBandSet,

    #[error("band set too small for the requested signal")]
    BandTooSmall,

    #[error("linear system is singular")]
    SingularSystem,

    #[error("reference signal is zero")]
    ZeroReference,

    #[error("negative kernel weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("malformed CSV: {0}")]
    MalformedCsv(String),

    #[error("signal is empty")]
    EmptySignal,

    #[error("insufficient data: need at least {needed} positive samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("distribution fit diverged: {0}")]
    FitDiverged(String),

    #[error("failed to parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
