//! Bite-timing engine for robot-assisted feeding.
//!
//! Wearable IMU acceleration and throat-microphone streams are resampled,
//! cut into 1 s windows at a 2 Hz cadence and summarised into a
//! 48-dimensional feature vector. A small MLP regresses the time until the
//! robot next reaches the feeding position, and a user-selected
//! assertiveness threshold turns that estimate into proceed/stop commands.
//!
//! The crate also carries everything needed to exercise the pipeline without
//! the original wearable dataset: a seeded synthetic participant generator,
//! a trajectory state machine for the feeding robot, leave-one-subject-out
//! evaluation and a CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod features;
pub mod mlp;
pub mod parallel;
pub mod policy;
pub mod signal;
pub mod sim;

pub use error::{Error, Result};
