use thiserror::Error;

/// Errors raised by the library. Feasibility violations are reported
/// separately through [`crate::solution::Violation`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cost matrix has {rows} rows but {expected} vertices are required")]
    DimensionMismatch { rows: usize, expected: usize },
    #[error("cost matrix row {row} has {len} entries, expected {expected}")]
    RaggedMatrix { row: usize, len: usize, expected: usize },
    #[error("capacity must be a positive integer")]
    ZeroCapacity,
    #[error("instance has no customers")]
    NoCustomers,
    #[error("invalid cost c({x},{y}) = {value}")]
    InvalidCost { x: usize, y: usize, value: f64 },
    #[error("c({x},{x}) must be zero")]
    NonZeroDiagonal { x: usize },
    #[error("asymmetric cost between {x} and {y}")]
    AsymmetricCost { x: usize, y: usize },
    #[error("triangle inequality violated: c({x},{y}) > c({x},{via}) + c({via},{y})")]
    TriangleViolation { x: usize, y: usize, via: usize },
    #[error("demand of customer {v} is outside [1, capacity]")]
    DemandOutOfRange { v: usize },
    #[error("customer {v} does not exist")]
    UnknownCustomer { v: usize },
    #[error("all customers sit on the depot; the demand profile is undefined")]
    ZeroRadialMass,
    #[error("interval ({l}, {r}] is not inside [0, 1]")]
    BadInterval { l: String, r: String },
    #[error("delta = {0} is outside the admissible range")]
    BadDelta(String),
    #[error("subset of {size} customers exceeds the Held-Karp cap of {cap}")]
    SubsetTooLarge { size: usize, cap: usize },
    #[error("vertex {v} must be kept but the walk never visits it")]
    KeepNotVisited { v: usize },
    #[error("walk must start and end at the depot")]
    WalkNotClosed,
    #[error("tour does not visit exactly the requested customers")]
    TourMismatch,
    #[error("customer {v} has normalized demand above one")]
    DemandExceedsCapacity { v: usize },
    #[error("tour catalog would hold about {estimate} tours (cap {cap})")]
    CatalogTooLarge { estimate: u128, cap: u128 },
    #[error("customer {v} is not covered by any catalog tour")]
    Infeasible { v: usize },
    #[error("simplex failed: {0}")]
    Numerical(String),
    #[error("instance has {n} customers; the exact solver is capped at {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
    #[error("no sign change of the target function on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("witness ({theta}, {tau}, {rho}) leaves the admissible box")]
    DomainViolation { theta: f64, tau: f64, rho: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
