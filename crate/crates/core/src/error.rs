//! Crate-wide error type.

/// Errors produced by ingestion, discretization, and the solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: cannot parse {text:?} as a decimal number")]
    ParseLine { line: usize, text: String },

    #[error("no samples")]
    NoSamples,

    #[error("sample value at position {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("all sample values equal {value}; the range is degenerate and cannot be rescaled")]
    DegenerateRange { value: f64 },

    #[error("margin must lie in [0, 0.5), got {0}")]
    InvalidMargin(f64),

    #[error("margin {0} places an extreme sample on the interval boundary; use a positive margin")]
    SampleOnBoundary(f64),

    #[error("variance must be positive, got {0}")]
    InvalidVariance(f64),

    #[error("rejection sampling stalled: the [0,1] window carries almost no mass for mu = {mu}, sigma2 = {sigma2}")]
    RejectionStalled { mu: f64, sigma2: f64 },

    #[error("sample count must be at least 1")]
    EmptyDraw,

    #[error("nominal step size must be positive, got {0}")]
    InvalidStepSize(f64),

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error("state holds {got} nodes but the grid has {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("tabulated reference function has {got} values but the grid has {expected} nodes")]
    TabulatedLength { expected: usize, got: usize },

    #[error("reference function is tabulated on grid nodes and cannot be evaluated at an arbitrary point")]
    TabulatedPointwise,

    #[error("divergent iterate: exp overflow at node {node} (y2 = {value:.3e})")]
    DivergentIterate { node: usize, value: f64 },

    #[error("singular band matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("singular linear system in Newton iteration {iteration}")]
    SingularSystem { iteration: usize },

    #[error("damping floor reached in Newton iteration {iteration} (residual {residual:.3e})")]
    DampingFloor { iteration: usize, residual: f64 },

    #[error("operation requires a converged solution (final residual {residual:.3e})")]
    NotConverged { residual: f64 },

    #[error("order-reduction diagnostic requires the zero reference function")]
    OrderReductionNeedsZeroReference,

    #[error("sample point {value} does not coincide with a grid node")]
    SampleOffGrid { value: f64 },

    #[error("iteration cap {cap} reached (gradient norm {grad_norm:.3e})")]
    IterationCap { cap: usize, grad_norm: f64 },

    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),

    #[error("histogram needs at least one bin")]
    EmptyBins,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
