use thiserror::Error;

/// Failure modes of the numerical laboratory.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("control map evaluation overflowed at r = {r} (mu = {mu})")]
    EvaluationOverflow { r: f64, mu: f64 },

    #[error("closed-form derivative disagrees with finite differences at r = {r}: component {component}, closed form {closed}, finite difference {numeric}")]
    Transcription {
        r: f64,
        component: &'static str,
        closed: f64,
        numeric: f64,
    },

    #[error("|v3| = 1 at r = {r}: the spin sits on a pole")]
    DegeneratePole { r: f64 },

    #[error("third derivative of the transition profile jumps at z = {z}")]
    JunctionPoint { z: f64 },

    #[error("time step {dt} exceeds the stability limit {limit}")]
    Stability { dt: f64, limit: f64 },

    #[error("non-finite value after step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("sup norm {norm} exceeded the blow-up threshold {threshold} at step {step}")]
    BlowUp {
        step: usize,
        norm: f64,
        threshold: f64,
    },

    #[error("front is extinct: {0}")]
    ExtinctFront(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("reaction routes disagree at r = {r}: from-equation {from_equation}, simplified {simplified}")]
    Derivation {
        r: f64,
        from_equation: f64,
        simplified: f64,
    },

    #[error("probe mask is empty (margin {margin} too large)")]
    EmptyMask { margin: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
