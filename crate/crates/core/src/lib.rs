//! Success probability and cache-size allocation for cellular networks whose
//! base stations sit behind limited backhaul links.
//!
//! A user succeeds when its wireless link sustains the playback rate *and* the
//! requested file is either cached at the base station or granted a backhaul
//! slot. The crate provides
//!
//! * [`model`]: cell, radio and popularity types plus unit normalization,
//! * [`analytic`]: exact and closed-form success probabilities,
//! * [`optimizer`]: single-cell minimum cache search and multi-cell max-min
//!   budget allocation, with a brute-force reference allocator,
//! * [`simulator`]: a seeded Monte Carlo oracle for every analytic quantity.

pub mod analytic;
mod error;
pub mod model;
pub mod optimizer;
pub mod simulator;

pub use error::{Error, Result};
