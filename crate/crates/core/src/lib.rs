//! Exact Bayesian equilibria and revenue maximization for pricing a single
//! product on a social network with positive externalities.
//!
//! Agents hold private values drawn uniformly from `[a_i, b_i]` and receive
//! utility `T[j][i]` from every friend `j` who also buys. For a posted price
//! the buying probabilities of the least (pessimistic) and greatest
//! (optimistic) Bayesian Nash equilibria are piecewise-linear functions of
//! the price; [`sweep`] computes them exactly with rational arithmetic, and
//! [`pricing`] turns them into optimal uniform, shifted, scaled and
//! discriminative prices.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod instances;
pub mod linalg;
pub mod model;
pub mod pricing;
pub mod rat;
pub mod sweep;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{
    agent_utility, evaluate, structure_of, validate_instance, AffineSegment, GroupedInstance,
    Instance, Label, NormalizedInfluence, Partition, PiecewiseEquilibrium, PricingOutcome,
    ProbVec, Side, Structure,
};
pub use rat::Rat;
