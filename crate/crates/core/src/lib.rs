//! Slow light through a persistent spectral hole.
//!
//! Three engines describe the same weak probe pulse crossing an
//! inhomogeneously broadened absorber in which a narrow transparency window
//! has been burnt:
//!
//! * [`holeburn`] turns a pump sequence into ground-sublevel populations of a
//!   double-Λ ion ensemble and from there into an absorption spectrum.
//! * [`propagation`] multiplies the pulse spectrum by the linear transfer
//!   function of the medium ([`medium`]).
//! * [`bloch`] integrates the optical Bloch equations over a discretised
//!   detuning distribution together with the reduced wave equation, and keeps
//!   an energy ledger of field versus atoms.
//!
//! [`analysis`] extracts delays, hole fits and distortion metrics from the
//! traces these engines produce.
//!
//! All frequencies are angular (rad/s) inside the library. Pulse envelopes
//! are Rabi frequencies in rad/s.

// validation is written as `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bloch;
mod error;
pub mod exec;
pub mod holeburn;
pub mod io;
pub mod medium;
pub mod propagation;
pub mod pulse;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
pub use medium::{ComplexResponse, Medium, SpectralHole};
pub use pulse::Pulse;

pub use num_complex::Complex64 as C64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
