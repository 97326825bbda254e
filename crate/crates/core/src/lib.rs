//! Age of Information for spectrum sharing between an incumbent and a
//! secondary user under attack by a power-limited jammer, where every
//! transmit and jam decision is taken by an imperfect signal detector.
//!
//! The crate is organized bottom-up:
//!
//! - [`link`]: SINR success probabilities under Rayleigh fading, with a Monte Carlo oracle.
//! - [`occupancy`]: joint distribution of active transmitters, jammer duty cycle and power.
//! - [`aoi`]: the age recursion, its stationary law and mean.
//! - [`synth`]: labeled BPSK/noise I/Q packet datasets.
//! - [`nn`]: FNN and CNN detectors trained from scratch.
//! - [`scenario`] and [`sim`]: closed-form analysis and the slotted Monte Carlo simulator.
//! - [`experiment`]: sweeps, CSV output and SVG plots behind the `agejam` binary.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod aoi;
pub mod config;
pub mod error;
pub mod experiment;
pub mod link;
pub mod nn;
pub mod occupancy;
pub mod scenario;
pub mod sim;
pub mod synth;

pub use error::{Error, Result};
