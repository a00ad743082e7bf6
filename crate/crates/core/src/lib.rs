//! Maneuver control for a UAV collecting uplink NOMA traffic from mobile
//! ground users in an obstacle field.
//!
//! The crate is organised bottom-up:
//!
//! - [`world`]: grid, obstacles, user tracks, UAV kinematics and ray/box occlusion
//! - [`channel`]: segmented LoS/NLoS gain realization and the probabilistic-LoS predictor
//! - [`noma`]: SIC per-user rates and the order-free sum rate
//! - [`qlearn`]: tabular Q-learning (table, ε-greedy, Bellman update, online run)
//! - [`warmstart`]: surrogate pre-training of the Q-table from the predicted channel
//! - [`baseline`]: per-slot grid search on the predicted channel plus a greedy step rule
//! - [`harness`]: seeded experiments, value-iteration oracle, trace and plot-data output
//!
//! Scenario and experiment inputs live in [`scenario`]; random streams in [`rng`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod channel;
pub mod error;
pub mod harness;
pub mod noma;
pub mod qlearn;
pub mod rng;
pub mod scenario;
pub mod units;
pub mod warmstart;
pub mod world;

pub use error::{Error, Result};
