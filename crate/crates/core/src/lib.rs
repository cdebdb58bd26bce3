//! Revenue analysis for semi-selfish mining (SSM) with several strategic miners.
//!
//! The lead-state Markov chain lives in [`chain`], per-state block rewards and
//! relative revenue in [`revenue`], single-miner closed forms in [`closedform`],
//! the induced games in [`games`] and a block-tree Monte Carlo oracle in [`simkit`].

pub mod chain;
pub mod closedform;
pub mod error;
pub mod games;
pub mod linalg;
pub mod revenue;
pub mod scalar;
pub mod simkit;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use chain::{enumerate_states, steady_state, transition_matrix, LeadState};
pub use revenue::{relative_revenue, S22Variant};

pub type HashDistribution = chain::HashDistribution<f64>;
pub type ChainModel = chain::ChainModel<f64>;
pub type PropagationModel = revenue::PropagationModel<f64>;
pub type RevenueProfile = revenue::RevenueProfile<f64>;

pub type HashDistributionF32 = chain::HashDistribution<f32>;
pub type ChainModelF32 = chain::ChainModel<f32>;
pub type PropagationModelF32 = revenue::PropagationModel<f32>;
pub type RevenueProfileF32 = revenue::RevenueProfile<f32>;
