use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("characteristic matrix fails nonsingularity at vertex {vertex:?} (det {det})")]
    Singular { vertex: Vec<usize>, det: String },
    #[error("matrix is not refined")]
    NotRefined,
    #[error("not a vertex: {0:?}")]
    NotAVertex(Vec<usize>),
    #[error("invalid equivalence move: {0}")]
    InvalidMove(String),
    #[error("not a basis of the degree-4 quotient: {0}")]
    NotABasis(String),
    #[error("wrong labeling for {family}: {detail}")]
    Labeling { family: &'static str, detail: String },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An identity that the underlying theory guarantees did not hold.
    #[error("internal contradiction: {0}")]
    Contradiction(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("unknown claim id `{0}`")]
    UnknownClaim(String),
    #[error("io/format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
