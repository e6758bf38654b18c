//! Approximation algorithms, exact baselines and analytic constants for the
//! unsplittable capacitated vehicle routing problem.
//!
//! Customers `1..=n` have integer demands no larger than the vehicle
//! capacity `k`; vertex `0` is the depot. Every tour starts and ends at the
//! depot and each customer's demand is delivered by exactly one tour.

pub mod algorithms;
pub mod big_matching;
pub mod constants;
pub mod error;
pub mod generate;
pub mod instance;
pub mod io;
pub mod itp;
pub mod lp_round;
pub mod matching;
pub mod oracle;
pub mod solution;
pub mod tsp;

pub use error::{Error, Result};
pub use instance::{Instance, Rational, DEPOT};
pub use solution::{check_feasible, Solution, Violation};
pub use tsp::{Tour, TourQuality};
