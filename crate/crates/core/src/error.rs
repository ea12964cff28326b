use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tensor product of dimension {0} exceeds the three-qubit limit of 8")]
    DimensionOverflow(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("product spectrum has more than four significant eigenvalues (fifth = {0:e})")]
    RankOverflow(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid qubit selection: {0}")]
    InvalidQubits(String),

    #[error("invalid channel parameters: {0}")]
    InvalidParameters(String),

    #[error("Kraus set is not trace preserving (completeness residual {0:e})")]
    InvalidChannel(f64),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("outside the domain of the closed form: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("output error: {0}")]
    Output(String),
}
