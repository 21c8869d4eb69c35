use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("self-loop at node {node}")]
    SelfLoop { node: usize },
    #[error("duplicate edge ({i}, {j})")]
    DuplicateEdge { i: usize, j: usize },
    #[error("edge ({i}, {j}) has nonpositive weight {weight}")]
    NonpositiveWeight { i: usize, j: usize, weight: f64 },
    #[error("node index {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("eigendecomposition failed: {0}")]
    EigSolveFailure(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported norm `{0}` (expected 1, 2 or inf)")]
    UnsupportedNorm(String),
    #[error("cycle space is trivial (graph is a tree)")]
    TrivialCycleSpace,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("graph too large for exhaustive search: n = {n} > {max}")]
    TooLarge { n: usize, max: usize },
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("test requires an unweighted graph")]
    WeightedGraphNotCovered,
    #[error("amplification factor computed for gamma = {found}, test requested gamma = {expected}")]
    GammaMismatch { expected: f64, found: f64 },
    #[error("graph is not acyclic")]
    NotAcyclic,
    #[error("graph is neither an unweighted complete graph nor an unweighted ring")]
    TopologyNotApplicable,
    #[error("time step {dt} too large (stability bound {bound})")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("sync window {window} exceeds trajectory span {span}")]
    WindowTooLong { window: f64, span: f64 },
    #[error("fixed-point iterate {iteration} left the domain (norm {norm} > {gamma})")]
    IterateLeftDomain { iteration: usize, norm: f64, gamma: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian (smallest eigenvalue on 1-perp {lambda:e})")]
    SingularJacobian { lambda: f64 },
    #[error("state is not an equilibrium (residual {residual:e})")]
    NotAnEquilibrium { residual: f64 },
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("power case is disconnected after dropping out-of-service branches")]
    DisconnectedCase,
    #[error("no bracket for critical coupling found up to K = {k_hi}")]
    BracketNotFound { k_hi: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI's JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyGraph => "EmptyGraph",
            Error::Disconnected => "Disconnected",
            Error::SelfLoop { .. } => "SelfLoop",
            Error::DuplicateEdge { .. } => "DuplicateEdge",
            Error::NonpositiveWeight { .. } => "NonpositiveWeight",
            Error::NodeOutOfRange { .. } => "NodeOutOfRange",
            Error::EigSolveFailure(_) => "EigSolveFailure",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnsupportedNorm(_) => "UnsupportedNorm",
            Error::TrivialCycleSpace => "TrivialCycleSpace",
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::TooLarge { .. } => "TooLarge",
            Error::DomainError(_) => "DomainError",
            Error::WeightedGraphNotCovered => "WeightedGraphNotCovered",
            Error::GammaMismatch { .. } => "GammaMismatch",
            Error::NotAcyclic => "NotAcyclic",
            Error::TopologyNotApplicable => "TopologyNotApplicable",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::WindowTooLong { .. } => "WindowTooLong",
            Error::IterateLeftDomain { .. } => "IterateLeftDomain",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularJacobian { .. } => "SingularJacobian",
            Error::NotAnEquilibrium { .. } => "NotAnEquilibrium",
            Error::Parse { .. } => "ParseError",
            Error::DisconnectedCase => "DisconnectedCase",
            Error::BracketNotFound { .. } => "BracketNotFound",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
