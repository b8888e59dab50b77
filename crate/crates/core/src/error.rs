use thiserror::Error;

use crate::Regime;

/// Errors raised while building or querying rate structures and models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("negative switching rate {rate} at x={x:?} for {from}->{to}")]
    NegativeRate {
        x: Vec<f64>,
        from: Regime,
        to: Regime,
        rate: f64,
    },
    #[error("non-finite switching rate at x={x:?} for {from}->{to}")]
    NonFiniteRate { x: Vec<f64>, from: Regime, to: Regime },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("missing model metadata: {0}")]
    MissingMetadata(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("assumption `{assumption}` fails: {detail}")]
    AssumptionFailed { assumption: &'static str, detail: String },
}

/// Errors raised by a single path simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("numerical blow-up at t={t}, regime {regime}: x={x:?}")]
    Blowup { t: f64, x: Vec<f64>, regime: Regime },
    #[error(transparent)]
    Model(#[from] ModelError),
}
