//! Block coherence of frames.
//!
//! A block frame is an `n × (m·r)` matrix made of `m` blocks with `r`
//! orthonormal columns each. This crate measures the worst-case and average
//! block coherence of such frames, evaluates the closed-form bounds that
//! constrain them, builds deterministic frames that meet those bounds, lowers
//! average coherence by per-block sign flipping, and runs the Monte-Carlo
//! experiments (random subspaces, block-sparse support recovery) that compare
//! deterministic and random frames.
//!
//! All numerical code is generic over the real scalar type (`f32`/`f64`)
//! through [`Real`]; the aliases below fix it to `f64`, which is what every
//! tolerance in the test suites assumes.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockcs;
pub mod bounds;
pub mod constructions;
pub mod error;
pub mod flipping;
pub mod format;
pub mod frame;
pub mod matrix;
pub mod random;
pub mod rng;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use frame::{BlockFrame, CoherenceReport, Field, GramMap, Validation};
pub use matrix::CMatrix;
pub use scalar::Real;

/// Double-precision complex matrix.
pub type Matrix = CMatrix<f64>;
/// Single-precision complex matrix.
pub type Matrix32 = CMatrix<f32>;
/// Double-precision block frame.
pub type Frame = BlockFrame<f64>;
/// Single-precision block frame.
pub type Frame32 = BlockFrame<f32>;
/// Complex double.
pub type C64 = num_complex::Complex<f64>;
