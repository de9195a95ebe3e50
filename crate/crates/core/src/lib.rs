//! Cycle-level model of a unified butterfly engine that computes a 512-point
//! complex FFT in Q16.15 fixed point and the 256-point number-theoretic
//! transforms used by ML-KEM (q = 3329) and ML-DSA (q = 8380417) on one
//! shared datapath.
//!
//! The usual entry points are [`engine::fft`], [`engine::ntt`] and
//! [`validation::verify_seed`].

pub mod batch;
pub mod butterfly;
pub mod engine;
pub mod error;
pub mod fixed_point;
pub mod formats;
pub mod memory;
pub mod modring;
pub mod par;
pub mod reference;
pub mod rng;
pub mod twiddle;
pub mod validation;

pub use butterfly::Mode;
pub use engine::{CycleReport, Engine, Fault};
pub use error::{Error, Result};
pub use fixed_point::{FixedComplex, Q16_15, Q1_30};
pub use memory::{MemoryImage, Signal};
pub use modring::{Modulus, Polynomial, Residue};
pub use par::Execution;
