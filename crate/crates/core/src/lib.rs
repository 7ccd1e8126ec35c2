//! Uhlmann's mixed-state geometric phase for a qubit.
//!
//! The crate computes the phase in two independent ways: by discretized
//! parallel transport of Hilbert-Schmidt lifts along an arbitrary path of
//! density matrices ([`transport`]), and in closed form for a three-arc path
//! traced by a precessing qubit under isotropic depolarization
//! ([`analytic`]). The [`channel`] module provides the depolarizing dynamics
//! in Lindblad and Kraus form, and [`experiment`] simulates a four-qubit
//! interferometer in which the phase appears as a fringe shift.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod qubit;
pub mod transport;

pub use error::{Error, Result};
pub use qubit::{BlochVector, CMat2, DensityMatrix, HSOperator, SqrtDensity, C64};
