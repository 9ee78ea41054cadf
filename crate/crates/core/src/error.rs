use thiserror::Error;

use crate::groupoid::{ArrowId, ObjectId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("groupoid must have at least one object")]
    EmptyGroupoid,

    #[error("{what} index {index} out of range (limit {limit})")]
    OutOfRange { what: &'static str, index: usize, limit: usize },

    #[error("table `{table}` has length {found}, expected {expected}")]
    TableLength { table: &'static str, found: usize, expected: usize },

    #[error("composition of ({0}, {1}) listed more than once")]
    DuplicateComposition(usize, usize),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("action law violated: {0}")]
    ActionLaw(String),

    #[error("object set {0:?} is not invariant; pass allow_non_invariant to take the full subgroupoid")]
    NonInvariantSubset(Vec<usize>),

    #[error("fiber dimension differs inside an orbit: object {a} has {dim_a}, object {b} has {dim_b}")]
    DimensionNotOrbitConstant { a: usize, dim_a: usize, b: usize, dim_b: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("Gram matrix at object {object} is not symmetric positive definite")]
    NotSpd { object: ObjectId },

    #[error("matrix at arrow {arrow} is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { arrow: ArrowId, condition: f64 },

    #[error("matrix is singular or ill-conditioned (condition estimate {0:e})")]
    SingularMatrix(f64),

    #[error("Haar weight at arrow {arrow} is not strictly positive ({value})")]
    NonPositiveWeight { arrow: ArrowId, value: f64 },

    #[error("Haar system is not left invariant ({0} violations)")]
    NotLeftInvariant(usize),

    #[error("cut-off value at object {object} is negative or not finite ({value})")]
    InvalidCutoff { object: ObjectId, value: f64 },

    #[error("cut-off function vanishes on the whole orbit of object {object}")]
    StarvedOrbit { object: ObjectId },

    #[error("cut-off support {support:?} is not contained in the prescribed set")]
    SupportOutsideSet { support: Vec<usize> },

    #[error("normalizing identity fails at object {object}: fiber sum is {sum}")]
    NotNormalized { object: ObjectId, sum: f64 },

    #[error("not a near representation: r = {r} exceeds min(1/4, 1/(9b²)) = {threshold} (b = {b})")]
    GateRefused { b: f64, r: f64, threshold: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("averaged metric is not positive definite at object {object} (min eigenvalue {min_eigenvalue:e})")]
    AveragedMetricNotPd { object: ObjectId, min_eigenvalue: f64 },

    #[error("coefficient system is not a representation (defect {defect:e})")]
    NotRepresentation { defect: f64 },

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
