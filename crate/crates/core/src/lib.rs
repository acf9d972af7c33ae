//! Single-target tracking under range-gate pull-off (RGPO) deception.
//!
//! The tracker treats jammer returns as structured clutter in a random
//! finite set measurement model and estimates the deceptive range bias
//! alongside the kinematic state. The crate also ships the scenario
//! simulator, naive and clairvoyant baselines, the posterior Cramér-Rao
//! bound and a Monte Carlo harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod gaussmix;
pub mod metrics;
pub mod models;
pub mod sim;
pub mod tracker;

pub use error::{Error, Result};
