//! Conversions between ordinary and angular frequency.
//!
//! Everything user-facing (config files, CSV columns, CLI flags) is in Hz;
//! everything inside the library is in rad/s.

use std::f64::consts::TAU;

#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    TAU * f
}

#[inline]
pub fn rad_to_hz(w: f64) -> f64 {
    w / TAU
}
