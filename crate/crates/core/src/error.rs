use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// An input does not satisfy the hypothesis of the check being run.
    Hypothesis,
    /// Structure was fine but a numerical residual or conditioning test failed.
    Numerical,
    /// Malformed input or invalid parameters.
    Input,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Schatten index must satisfy p >= 1, got {0}")]
    InvalidSchattenIndex(f64),

    #[error("eigensolver did not converge (dimension {0})")]
    EigenNoConvergence(usize),

    #[error("ambiguous nilpotency verdict: spectral test says {spectral}, power test says {power}")]
    AmbiguousNilpotency { spectral: bool, power: bool },

    #[error("eigenvalue clusters at {a} and {b} are closer than twice the clustering radius {radius:e}")]
    ClusterAmbiguity { a: String, b: String, radius: f64 },

    #[error("{0} is not in the spectrum within the clustering radius")]
    NotInSpectrum(String),

    #[error("subspace is not invariant: residual {residual:e} exceeds {threshold:e}")]
    InvarianceViolation { residual: f64, threshold: f64 },

    #[error("subspace containment violated: {0}")]
    NotContained(String),

    #[error("element {index} is not a member of the enclosing algebra (residual {residual:e})")]
    NotInAlgebra { index: usize, residual: f64 },

    #[error("closure did not stabilise within {rounds} rounds")]
    ClosureNotStable { rounds: usize },

    #[error("closure verification failed for {kind}: residual {residual:e}")]
    ClosureVerification { kind: String, residual: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("generator {index} is not nilpotent")]
    NotNilpotent { index: usize },

    #[error("chain stalled at dimension {dim}: generators are nilpotent but generate a non-nilpotent algebra")]
    ChainStall { dim: usize },

    #[error("gap {gap} of the chain is not annihilated by generator {generator} (residual {residual:e})")]
    GapNotAnnihilated { gap: usize, generator: usize, residual: f64 },

    #[error("chain is not maximal: dimensions {0:?}")]
    NonMaximalChain(Vec<usize>),

    #[error("malformed chain: {0}")]
    MalformedChain(String),

    #[error("triangularization residual {residual:e} exceeds {threshold:e}")]
    ResidualExceeded { residual: f64, threshold: f64 },

    #[error("postcondition failed: {0}")]
    Postcondition(String),

    #[error("invariant subspace search exhausted although the associative closure is proper")]
    SearchExhausted,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::HypothesisViolation(_)
            | Error::NotNilpotent { .. }
            | Error::ChainStall { .. }
            | Error::NotInAlgebra { .. }
            | Error::NotContained(_)
            | Error::InvarianceViolation { .. }
            | Error::GapNotAnnihilated { .. } => ErrorClass::Hypothesis,
            Error::EigenNoConvergence(_)
            | Error::AmbiguousNilpotency { .. }
            | Error::ClusterAmbiguity { .. }
            | Error::ClosureNotStable { .. }
            | Error::ClosureVerification { .. }
            | Error::ResidualExceeded { .. }
            | Error::Postcondition(_)
            | Error::SearchExhausted => ErrorClass::Numerical,
            Error::DimensionMismatch { .. }
            | Error::InvalidMatrix(_)
            | Error::InvalidParameter(_)
            | Error::InvalidSchattenIndex(_)
            | Error::NotInSpectrum(_)
            | Error::NonMaximalChain(_)
            | Error::MalformedChain(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorClass::Input,
        }
    }
}
