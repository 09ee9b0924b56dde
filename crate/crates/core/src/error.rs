use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ambiguous rank: singular value {value:e} inside the band ({tol:e}, {band:e})")]
    AmbiguousRank { value: f64, tol: f64, band: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is singular")]
    Singular,
    #[error("jet order {needed} exceeds available order {available}")]
    OrderExceeded { needed: usize, available: usize },
    #[error("degeneracy not isolated within jet order {0}")]
    NonIsolated(usize),
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("g*T is not symmetric")]
    NotGSymmetric,
    #[error("not an eigenvalue of the pencil")]
    NotAnEigenvalue,
    #[error("not transversal: {0}")]
    NotTransversal(String),
    #[error("refinement exhausted: {0}")]
    RefinementExhausted(String),
    #[error("path lies entirely in the Maslov cycle")]
    EntirelySingular,
    #[error("not symplectic: defect {0:e}")]
    NotSymplectic(f64),
    #[error("not isotropic: {0}")]
    NotIsotropic(String),
    #[error("Galerkin index not stabilized: N gives {0}, 2N gives {1}")]
    NotStabilized(i64, i64),
    #[error("M0 too small: endpoint lies in the Maslov cycle")]
    M0TooSmall,
    #[error("integration tolerance not met at t = {0}")]
    IntegrationTolerance(f64),
    #[error("no admissible g-symmetric T found")]
    NoAdmissibleT,
    #[error("inconsistent eigendata: {0}")]
    InconsistentEigendata(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
