//! Hybrid quantum-classical log anomaly detection.
//!
//! The crate is layered bottom-up:
//!
//! - [`qsim`]: exact statevector simulation of small registers.
//! - [`encode`]: angle (`R_x`, `R_y`, `R_z`) and amplitude feature maps.
//! - [`pqc`]: layered rotation + CNOT circuits with shift-rule gradients.
//! - [`nn`]: linear layers, LSTM cell, attention, losses and Adam.
//! - [`models`]: DeepLog, LogAnomaly and LogRobust, each with a classical
//!   and a quantum variant, plus parameter accounting.
//! - [`logpipe`]: Drain parsing, windowing, splitting and vectorization.
//! - [`harness`]: metrics, experiment configs, research-question sweeps and
//!   report files.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

pub mod encode;
pub mod error;
pub mod harness;
pub mod kv;
pub mod logpipe;
pub mod models;
pub mod nn;
pub mod pqc;
pub mod qsim;

pub use error::{Error, Result};
