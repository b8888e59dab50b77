//! Simulation and Monte Carlo verification for regime-switching diffusions
//! with state-dependent switching on a countable regime space.
//!
//! The continuous component solves `dX = b(t, X, L) dt + sigma(t, X, L) dW`
//! while the regime `L` jumps according to a banded, possibly
//! state-dependent Q-matrix. Switching is represented through the interval
//! layout of the rates and a jump function driven by uniform marks, which
//! makes shared-noise coupling of two paths meaningful.

pub mod engine;
pub mod estimators;
pub mod error;
pub mod models;
pub mod noise;
pub mod numeric;
pub mod regime_graph;
pub mod suites;

/// Regime index, 1-based.
pub type Regime = usize;

pub use error::{ModelError, SimError};
