//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid precision context: {0}")]
    InvalidPrecision(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric: relative asymmetry {asymmetry}")]
    NotSymmetric { asymmetry: String },

    #[error("eigensolver did not converge after {sweeps} sweeps, off-diagonal residual {residual}")]
    EigenNonConvergence { sweeps: usize, residual: String },

    #[error("complex eigenvalue beyond tolerance: |Im| = {imag_magnitude} at index {index}")]
    ComplexEigenvalue { imag_magnitude: String, index: usize },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue}")]
    NotPsd { min_eigenvalue: String },

    #[error("quadrature did not converge: residual estimate {residual} above target {target}")]
    QuadratureNonConvergence { residual: String, target: String },

    #[error("covariance matrix failed the bonafide test: margin {margin}")]
    NotBonafide { margin: String },

    #[error("matrix is near-singular: conditioning diagnostic {diagnostic}")]
    NearSingular { diagnostic: String },

    #[error("degenerate PT symplectic eigenvalues, cluster: {cluster:?}")]
    DegenerateSpectrum { cluster: Vec<String> },

    #[error("vanishing symplectic norm in Gram-Schmidt at pair {pair}")]
    DegenerateSeed { pair: usize },

    #[error("spectrum routes disagree beyond tolerance: |delta| = {delta} at index {index}")]
    RouteDisagreement { delta: String, index: usize },

    #[error("pair negativity mismatch after consolidation at pair {pair}: {detail}")]
    PairNegativityMismatch { pair: usize, detail: String },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
