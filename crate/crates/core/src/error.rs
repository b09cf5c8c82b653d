use thiserror::Error;

use crate::kam::KamState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The logarithm was requested too close to `-Id`.
    #[error("element lies within {distance:e} of the cut locus -Id")]
    CutLocus { distance: f64 },

    #[error("grid of size {got} cannot resolve band {band} (need at least {required})")]
    Undersampled { band: usize, required: usize, got: usize },

    #[error("fiber is not close to a constant: {0}")]
    NotNormalizable(String),

    #[error("rational iterate reached at Gauss-map step {step}")]
    RationalIterate { step: usize },

    /// A retained Fourier mode had a vanishing denominator, which means a
    /// resonance was not removed before the homological solve.
    #[error("denominator underflow at mode {k:?} (|denominator| = {modulus:e})")]
    DenominatorUnderflow { k: Vec<i64>, modulus: f64 },

    #[error("resonance removal failed at step {step}: residual defect {defect:e} >= {threshold:e}")]
    RemovalFailed {
        step: usize,
        defect: f64,
        threshold: f64,
    },

    #[error("perturbation {norm:e} outside the perturbative regime (bound {bound:e}) at step {step}")]
    NonPerturbative { step: usize, norm: f64, bound: f64 },

    #[error("scheme diverged at step {step}: |F| went from {before:e} to {after:e}")]
    Divergence {
        step: usize,
        before: f64,
        after: f64,
        state: Box<KamState>,
    },

    #[error("scheme did not converge: |F| = {norm:e} after {steps} steps")]
    NotConverged { steps: usize, norm: f64 },

    #[error("rotation vector not resolved at this horizon: last accumulator gap {gap:e}")]
    RotationUnresolved { gap: f64 },

    #[error("frequencies differ")]
    FrequencyMismatch,
}
