//! Numerics for quasi-periodic cocycles on `T^d x SU(2)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`arithmetic`]: Diophantine and resonance conditions, continued fractions.
//! - [`su2`]: unit quaternions, the Lie algebra `su(2)` and its root structure.
//! - [`fourier`]: band-limited maps `T^d -> su(2)`, Sobolev norms, conjugation chains.
//! - [`cocycle`]: cocycles `(alpha, A e^{F(.)})`, fibered conjugation, iteration.
//! - [`kam`]: the almost-reducibility scheme and its normal-form ledger.
//! - [`rotation`]: fibered rotation vectors, equivalence classes and reducibility audits.
//!
//! Throughout, the torus generator `e` of `su(2)` is normalised so that
//! `exp(e) = -Id` and the positive root takes the value `1` on `e`. With that
//! choice the centre lattice is `Z e` and a constant `exp(theta e)` is resonant
//! exactly when `theta = k . alpha mod 1` for some nonzero `k`.

pub mod arithmetic;
pub mod cocycle;
pub mod error;
pub mod fourier;
pub mod kam;
pub mod rotation;
pub mod su2;

pub use arithmetic::{DiophParams, Frequency, ResonanceRecord};
pub use cocycle::{Cocycle, FiberSamples};
pub use error::{Error, Result};
pub use fourier::{AlgebraMap, ChainFactor, ConjugationChain, Grid, TorusMorphism};
pub use kam::{NormalForm, SchemeParams};
pub use rotation::{ArithmeticClass, RotationVector};
pub use su2::{AlgebraVector, GroupElement, TorusElement};
