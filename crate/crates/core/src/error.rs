use thiserror::Error;

/// Errors raised by operators, cutters and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate set: {0}")]
    DegenerateSet(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{name} = {value} is outside {allowed}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("relaxation parameter {0} is outside [0, 2)")]
    GammaOutOfRange(f64),

    #[error("damping parameter eta = {0} must be positive")]
    EtaNonpositive(f64),

    /// f(x) > 0 but the selected subgradient vanishes, so the level set is empty.
    #[error("zero subgradient at a point with positive value {value}; the level set is empty")]
    ZeroSubgradient { value: f64 },

    #[error("product space needs at least two blocks, got {0}")]
    FewerThanTwoBlocks(usize),

    #[error("reference set is empty")]
    EmptyReferenceSet,

    #[error("step {step}: {name}(2 - {name}) = {value} fell below the floor {floor}")]
    ParamFloorViolated {
        step: usize,
        name: &'static str,
        value: f64,
        floor: f64,
    },

    #[error("function `{0}` is not certified convex; it may only be used in permissive mode")]
    NotCertifiedConvex(String),

    #[error("subgradient inequality fails for `{name}`: gap {gap:e}")]
    InvalidSubgradient { name: String, gap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("trace i/o: {0}")]
    TraceIo(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
