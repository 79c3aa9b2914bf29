use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("matrix exponential residual {residual:e} exceeds bound {bound:e}")]
    ExpResidual { residual: f64, bound: f64 },

    #[error("matrix is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("rank deficient input at column {column}")]
    RankDeficient { column: usize },

    #[error("eigenvalue {value} outside the tolerance-padded unit interval")]
    SpectrumOutOfRange { value: f64 },

    #[error("eigensolver failed to converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("singular matrix")]
    Singular,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ground state selection: {0}")]
    GroundState(String),

    #[error("state collapsed at t = {time}: {reason}")]
    Collapse { time: f64, reason: String },

    #[error("purity defect {defect:e} exceeds tolerance")]
    Purity { defect: f64 },

    #[error("spectrum does not pair as (nu, 1 - nu): defect {0:e}")]
    Pairing(f64),

    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("system too large for the exact oracle: L = {0} (limit 12)")]
    TooLarge(usize),

    #[error("feature not detected: {0}")]
    NotDetected(String),

    #[error("non-uniform time grid")]
    NonUniformGrid,

    #[error("imaginary part {0:e} beyond tolerance")]
    ImaginaryResidue(f64),
}
