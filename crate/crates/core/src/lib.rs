//! Matsuoka oscillator CPG networks and the machinery around them.
//!
//! The crate is organised bottom-up:
//!
//! * [`cpg`] integrates the four-oscillator Matsuoka network that drives the
//!   snake's links.
//! * [`analysis`] holds the describing-function closed forms (steering bias,
//!   duty-cycle bias, free-response amplitude, entrainment threshold) and the
//!   trajectory measurement used to check them against simulation.
//! * [`snake`] is a planar articulated surrogate of the soft snake robot.
//! * [`rl`] contains the curriculum, reward, episode bookkeeping and an
//!   option-critic PPO learner.
//! * [`gp`] is the evolutionary tuner for the oscillator parameters.

pub mod analysis;
pub mod config;
pub mod cpg;
pub mod error;
pub mod gp;
pub mod io;
pub mod rl;
pub mod snake;
pub mod stats;

pub use error::{Error, Result};
