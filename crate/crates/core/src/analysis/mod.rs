//! Measured quantities from simulated traces: delays, hole fits, distortion
//! metrics and the delay-versus-αL/Γ regression.

pub mod delay;
pub mod distortion;
pub mod fit;
pub mod scan;

pub use delay::{extract_delay, DelayEstimate};
pub use distortion::{distortion_metrics, Distortion};
pub use fit::{fit_lorentzian_hole, fit_spectrum, HoleFit};
pub use scan::{delay_scan, DelayScan, LinearFit, ScanRow};

pub(crate) const MODULE: &str = "analysis";
