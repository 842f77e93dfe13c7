//! Time-domain Maxwell-Bloch engine.
//!
//! The inhomogeneous line is replaced by a quadrature over detuning classes
//! ([`grid`]); each class obeys the optical Bloch equations ([`class`]) and
//! the classes radiate into a single envelope equation stepped along `z` in
//! the frame moving at `c` ([`time_domain`]). [`ledger`] books the pulse
//! energy between the field inside, the field outside and the atoms.

pub mod adiabatic;
pub mod class;
pub mod grid;
pub mod ledger;
pub mod series;
pub mod time_domain;

pub use adiabatic::{adiabatic_population, adiabatic_state_coefficients};
pub use class::{integrate_bloch_class, BlochMode, ClassTrace};
pub use grid::{build_detuning_grid, DetuningGrid, GridConfig};
pub use ledger::{energy_ledger, EnergyLedger};
pub use series::series_coherence;
pub use time_domain::{
    minimum_z_steps, propagate_time_domain, SpatialSnapshot, Station, TdOptions, TdRun,
};

pub(crate) const MODULE: &str = "maxwell-bloch";
