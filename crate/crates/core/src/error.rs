use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("matrix is not Hermitian: ‖M − M†‖_F = {defect:.3e}")]
    NotHermitian { defect: f64 },
    #[error("matrix does not have unit trace: Tr = {trace}")]
    NotUnitTrace { trace: f64 },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("function undefined at eigenvalue {eigenvalue:.3e}")]
    Domain { eigenvalue: f64 },
    #[error("dimension mismatch: expected a {expected}x{expected} matrix, found {rows} rows with row lengths {cols:?}")]
    Dimension {
        expected: usize,
        rows: usize,
        cols: Vec<usize>,
    },
    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("{name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("filter determinant {det:.3e} must be nonzero")]
    SingularFilter { det: f64 },
    #[error("filter annihilates the state: Tr = {trace:.3e}")]
    VanishingTrace { trace: f64 },
    #[error("trace factor must be positive, got {trace}")]
    NonpositiveTrace { trace: f64 },
    #[error("state is rank deficient: smallest eigenvalue {min_eigenvalue:.3e}")]
    RankDeficient { min_eigenvalue: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("state is not entangled (negativity {negativity:.3e})")]
    NotEntangled { negativity: f64 },
    #[error("square-root argument {product:.3e} is negative")]
    ComplexSigma { product: f64 },
    #[error("malformed state file: {0}")]
    Parse(String),
}
