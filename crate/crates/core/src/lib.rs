//! Blockage and spectral-efficiency engine for mmWave relaying through
//! vehicle-mounted relays ("cells on wheels", COWs) on an urban street.
//!
//! The analytic side computes blockage probabilities and mean spectral
//! efficiency (SE) of three connectivity strategies in closed form plus
//! adaptive quadrature. The [`sim`] module rebuilds the same street in 3-D
//! and estimates every quantity by Monte Carlo.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockage;
pub mod config;
pub mod link;
pub mod numerics;
pub mod scenario;
pub mod sim;
pub mod strategy;
pub mod sweep;

pub use config::{StochasticConfig, StreetConfig};
pub use scenario::Scenario;
pub use strategy::{Strategy, StrategyMeans};
