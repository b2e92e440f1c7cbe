//! Counter-example boosting for local robustness verification of
//! feed-forward ReLU networks.
//!
//! The pipeline has three stages:
//!
//! 1. [`seeding`] picks seed inputs whose output margin is small, i.e.
//!    inputs close to a decision boundary;
//! 2. [`greedy`] searches the seed's L∞ ball for a label change by
//!    coordinate-wise moves with step halving;
//! 3. [`verifier`] decides the remaining queries completely with interval
//!    bound propagation and input-space branch-and-bound.
//!
//! [`harness`] runs campaigns over the four combinations of random or
//! boosted seeds with or without greedy pre-analysis, and [`attacks`]
//! applies the same seed selection to FGSM.

pub mod attacks;
pub mod error;
pub mod format;
pub mod greedy;
pub mod harness;
pub mod network;
pub mod region;
pub mod rng;
pub mod seeding;
pub mod synth;
pub mod verifier;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use network::{Layer, Network, OutputProfile};
pub use region::Region;
