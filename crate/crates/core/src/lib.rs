//! Stabilizing static feedback gains of LTI systems.
//!
//! Membership tests for the Hurwitz and Schur stabilizing sets, canonical
//! forms of controllable pairs, Lyapunov/Stein certificates, and sampled
//! maps of structured gain regions with connected-component counts.

pub mod error;
pub mod linalg;
pub mod lyap;
pub mod canonical;
pub mod poly;
pub mod stability;
pub mod regions;
pub mod seed;

pub use error::{Error, Result};
pub use linalg::{RealMatrix, Spectrum};
