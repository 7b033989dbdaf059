//! Probability-distribution and Renyi-entropy estimation for delay PUFs.
//!
//! A delay PUF with weights `w` answers a challenge `c in {-1,+1}^n` with
//! `sign(c . w)`; as a Boolean function it is a self-dual threshold function.
//! This crate estimates the distribution of such functions under i.i.d.
//! symmetric weight models and computes the Renyi entropies H0, H1, H2 and
//! H-infinity with confidence intervals. The state space is compressed from
//! individual functions to equivalence classes under coordinate permutations
//! and sign flips, identified by canonical Chow parameter vectors.
//!
//! Modules:
//! - [`puf`]: evaluation, Chow extraction, canonical forms.
//! - [`group`]: the symmetry group, its actions, exact orbit sizes.
//! - [`sampler`]: seeded, shardable Monte-Carlo accumulation of class counts.
//! - [`estimators`]: H0/H1/H2/H-infinity point estimates and intervals.
//! - [`oracle`]: exact ground truth at small n (census, class probabilities).
//! - [`store`]: the text interchange format for class maps and censuses.

pub mod error;
pub mod estimators;
pub mod group;
pub mod oracle;
pub mod puf;
pub mod sampler;
pub mod store;

pub use error::{Error, Result};
