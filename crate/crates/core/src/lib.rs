//! Success probabilities of approval-voting committee elections in which voters
//! see only noisy signals about candidate honesty.
//!
//! The crate computes these probabilities exactly wherever a finite formula
//! exists and by seeded, reproducible Monte Carlo simulation otherwise. It
//! also compares approval voting against single-choice voting and
//! stake-weighted lottery selection.

pub mod analytics;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod signal;
pub mod simulator;
pub mod strategies;

pub use error::{Error, Result};
