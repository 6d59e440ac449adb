use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probabilities must be positive and sum to 1 (got sum {sum})")]
    BadProbabilities { sum: f64 },
    #[error("cells at level {level} do not form a partition of the atoms")]
    NotAPartition { level: usize },
    #[error("partition at level {level} does not refine the previous level")]
    NotRefining { level: usize },
    #[error("value is not measurable at level {level} (atoms {a} and {b} differ in cell {cell})")]
    MeasurabilityViolation {
        level: usize,
        cell: usize,
        a: usize,
        b: usize,
    },
    #[error("process row {row} is not measurable at its level (cell {cell})")]
    AdaptednessError { row: usize, cell: usize },
    #[error("cell {cell} at level {level} has zero weighted mass with non-constant values")]
    ZeroCellMass { level: usize, cell: usize },
    #[error("conditional expectation over non-finite values in cell {cell}")]
    NonFiniteInput { cell: usize },
    #[error("invalid monotone function: {0}")]
    BadMonotoneFn(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("internal identity check failed: {0}")]
    IdentityViolation(String),
    #[error("level grid too coarse: max discrepancy {discrepancy} exceeds the local grid step")]
    GridTooCoarse { discrepancy: f64 },
    #[error("maximizer stuck at the search-grid boundary (cell {cell})")]
    GridExhausted { cell: usize },
    #[error("bisection bracket does not sandwich the target on cell {cell}")]
    BracketFailure { cell: usize },
    #[error("m -> alpha(m*kappa) is not increasing on the bracket (cell {cell})")]
    NotIncreasing { cell: usize },
    #[error("distorted expectation is not decreasing in m on the grid (family {family})")]
    NonMonotoneFamily { family: String },
    #[error("dual grid is empty")]
    EmptyDualGrid,
    #[error("refinement schedule produced a non-monotone gap sequence: {0:?}")]
    NonMonotoneRefinement(Vec<f64>),
    #[error("division by zero in return-reactive weights at time {time}")]
    DivisionByZero { time: usize },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
