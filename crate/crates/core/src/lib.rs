//! Nonadiabatic geometric gates on Kerr-cat qubits.
//!
//! The crate synthesizes invariant-engineered control waveforms, propagates
//! closed and open dynamics in a truncated Fock space, and scores the
//! resulting gates. Time is measured in μs and frequencies in rad/μs
//! throughout; see [`units`] for the textual conventions.

// `!(x > 0.0)` is used on purpose: unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod fock;
pub mod gates;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod numeric;
pub mod propagate;
pub mod scenarios;
pub mod selftest;
pub mod squeeze;
pub mod synth;
pub mod units;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
