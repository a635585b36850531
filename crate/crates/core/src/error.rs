use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("word enumeration for m={m}, r={r} needs {words} words, cap is {cap}")]
    SizeCap {
        m: usize,
        r: usize,
        words: u128,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("grade index {k} out of range 1..={max}")]
    GradeOutOfRange { k: usize, max: usize },

    #[error("structure constants not antisymmetric at ({i}, {j}, {l})")]
    Antisymmetry { i: usize, j: usize, l: usize },

    #[error("Jacobi identity fails on basis triple ({i}, {j}, {k}): residual {residual:e}")]
    Jacobi {
        i: usize,
        j: usize,
        k: usize,
        residual: f64,
    },

    #[error("algebra is not nilpotent: bracket word {word} of length {len} is nonzero")]
    NotNilpotent { word: String, len: usize },

    #[error("algebra is not nilpotent: lower central series does not vanish within {steps} steps")]
    LowerCentralSeries { steps: usize },

    #[error("vector fields do not realize the structure constants on pair ({i}, {j})")]
    FieldMismatch { i: usize, j: usize },

    #[error("operation needs a vector-field realization")]
    MissingFields,

    #[error("unsupported event: {0}")]
    UnsupportedEvent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("flow step refinement did not converge after {steps} steps (change {change:e})")]
    Flow { steps: usize, change: f64 },

    #[error("degenerate constraints: Gram matrix is singular")]
    DegenerateConstraints,

    #[error("constraints are infeasible: {0}")]
    Infeasible(String),

    #[error("no feasible control found across {restarts} restarts")]
    FeasibilityUnknown { restarts: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("grade {k} has no predecessor in the flag")]
    NoPredecessor { k: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
