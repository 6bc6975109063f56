use alloc::string::String;

use crate::C64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the numerics can report.
///
/// [`Error::is_numerical`] separates numerical breakdowns (ill-conditioned
/// input, undersampled contours) from validation failures of the input itself.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown symbol `{symbol}` at column {column}")]
    UnknownSymbol { symbol: String, column: usize },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("generator `{generator}` has |det - 1| = {deviation:e} at lambda = {at}")]
    Determinant {
        generator: String,
        deviation: f64,
        at: C64,
    },
    #[error("lambda = {0} lies on a declared pole")]
    Pole(C64),
    #[error("non-finite matrix entry for generator `{generator}` at lambda = {at}")]
    NonFinite { generator: String, at: C64 },
    #[error("inverse residual {residual:e} exceeds 1e-10")]
    Singular { residual: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    Convergence { iterations: usize },
    #[error("rank collapse in QR step: |R[{index}][{index}]| < 1e-300")]
    RankCollapse { index: usize },
    #[error("Lyapunov spectrum out of order beyond 3 standard errors at index {index}")]
    OrderViolation { index: usize },
    #[error("grid too small: {0}")]
    InsufficientGrid(String),
    #[error("dd^c calibration failed: Lelong mass {mass} outside [0.98, 1.02]")]
    Calibration { mass: f64 },
    #[error("contour passes through a zero near lambda = {at}")]
    BoundaryZero { at: C64 },
    #[error("winding number residual {residual} exceeds 0.1 with {samples} boundary samples")]
    NonIntegerWinding { residual: f64, samples: usize },
    #[error("{masked_fraction} of the volume grid is masked (limit 0.1)")]
    VolumeUnreliable { masked_fraction: f64 },
    #[error("more than half of the cloud has a vanishing chart coordinate {chart}")]
    ChartDegenerate { chart: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// True for breakdowns of the numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::Singular { .. }
                | Error::Convergence { .. }
                | Error::RankCollapse { .. }
                | Error::OrderViolation { .. }
                | Error::Calibration { .. }
                | Error::BoundaryZero { .. }
                | Error::NonIntegerWinding { .. }
                | Error::VolumeUnreliable { .. }
        )
    }

    /// Name of the module the error originates from, used to qualify messages.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Syntax { .. }
            | Error::UnknownSymbol { .. }
            | Error::Dimension(_)
            | Error::Determinant { .. }
            | Error::Pole(_)
            | Error::NonFinite { .. }
            | Error::Singular { .. } => "family-dsl",
            Error::InvalidMeasure(_) => "group-walk",
            Error::Convergence { .. } | Error::RankCollapse { .. } => "matrix-core",
            Error::OrderViolation { .. } => "lyapunov",
            Error::InsufficientGrid(_) | Error::Calibration { .. } => "param-scan",
            Error::BoundaryZero { .. }
            | Error::NonIntegerWinding { .. }
            | Error::VolumeUnreliable { .. } => "divisors-volumes",
            Error::ChartDegenerate { .. } => "measures",
            Error::InvalidArgument(_) | Error::Config(_) => "cli-io",
        }
    }
}
