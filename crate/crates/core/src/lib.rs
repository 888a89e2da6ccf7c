//! Finite-state Bayesian experiment algebra.
//!
//! The crate computes what one Bayesian expects another's posterior mean to
//! be after an experiment, checks how those expectations move along the
//! Blackwell order, and solves two games built on that comparison: a
//! voluntary testing game with cutoff equilibria and a costly signaling game
//! with a least-cost separating equilibrium.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The
//! `*64` aliases below fix the scalar to `f64`, which is what the CLI uses.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod blackwell;
mod error;
pub mod ivp;
pub mod rng;
mod scalar;
pub mod signaling;
pub mod testing;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use belief::{Belief, Experiment, PosteriorReport, StateSpace};
pub use blackwell::GarblingKernel;

pub type StateSpace64 = belief::StateSpace<f64>;
pub type Belief64 = belief::Belief<f64>;
pub type Experiment64 = belief::Experiment<f64>;
pub type GarblingKernel64 = blackwell::GarblingKernel<f64>;
pub type IvpReport64 = ivp::IvpReport<f64>;
pub type TestingModel64 = testing::TestingModel<f64>;
pub type SignalingModel64 = signaling::SignalingModel<f64>;
pub type LcseSolution64 = signaling::LcseSolution<f64>;

pub type StateSpace32 = belief::StateSpace<f32>;
pub type Belief32 = belief::Belief<f32>;
pub type Experiment32 = belief::Experiment<f32>;
