//! Random-coding exponents for finite-alphabet lossy source coding and
//! channel coding, with brute-force oracles and a Monte-Carlo simulator.
//!
//! All quantities are in nats. Exponents and rates live in [`ExtendedReal`]
//! so that `+∞` is a value rather than an error.

pub mod curve;
pub mod error;
pub mod exponent;
pub mod extended;
pub mod montecarlo;
pub mod optimize;
pub mod oracle;
pub mod prob;
pub mod rate;
pub mod spec;

pub use error::{Error, Result};
pub use exponent::{evaluate, BoundaryFlag, ExponentKind, ExponentResult, Model};
pub use extended::ExtendedReal;
pub use prob::{Channel, ConditionalKernel, Distribution, DistortionModel, JointDistribution};
pub use rate::RateResult;
pub use spec::ModelSpec;
