//! The hole-modified inhomogeneous distribution and its linear response.
//!
//! The background distribution is flat over the simulation window; a
//! Lorentzian hole of full width `width_fwhm` and fractional `depth` is carved
//! into it. The amplitude exponent per unit length seen by a spectral
//! component at offset `Δ` from the carrier is
//!
//! ```text
//! κ(Δ) = −(α₀/2) · [1 − depth · γ / (γ − i(Δ − center))],   γ = Δ₀/2
//! ```
//!
//! Offsets follow the `exp(−iΔt)` convention for envelope components, so a
//! positive `Δ` is a component above the carrier. With that convention the
//! phase slope `∂ Im κ / ∂Δ` is the group delay per metre and is positive
//! inside a transparency window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Site};
use crate::C64;

mod kk;

pub use kk::{discrete_hilbert, kramers_kronig, KkPhase};

const MODULE: &str = "spectral-medium";

/// A Lorentzian transparency dip in the inhomogeneous distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralHole {
    /// Offset of the hole centre from the carrier (rad/s).
    pub center: f64,
    /// Full width at half depth, Δ₀ (rad/s).
    pub width_fwhm: f64,
    /// Fraction of the background removed at the centre, in `[0, 1]`.
    pub depth: f64,
}

impl SpectralHole {
    pub fn new(center: f64, width_fwhm: f64, depth: f64) -> Result<Self> {
        let site = Site::new(MODULE, "SpectralHole::new");
        if !(width_fwhm > 0.0 && width_fwhm.is_finite()) {
            return Err(Error::invalid(
                site,
                format!("hole width must be > 0, got {width_fwhm}"),
            ));
        }
        if !(0.0..=1.0).contains(&depth) {
            return Err(Error::invalid(
                site,
                format!("hole depth must lie in [0, 1], got {depth}"),
            ));
        }
        if !center.is_finite() {
            return Err(Error::invalid(site, "hole centre must be finite"));
        }
        Ok(Self {
            center,
            width_fwhm,
            depth,
        })
    }

    /// Depth-one hole centred on the carrier.
    pub fn centered(width_fwhm: f64) -> Result<Self> {
        Self::new(0.0, width_fwhm, 1.0)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.width_fwhm
    }

    /// Fraction of the background removed at `delta`.
    pub fn profile(&self, delta: f64) -> f64 {
        hole_profile(delta, self)
    }
}

/// `depth · (Δ₀²/4) / ((delta − center)² + Δ₀²/4)`.
pub fn hole_profile(delta: f64, hole: &SpectralHole) -> f64 {
    let g2 = hole.half_width() * hole.half_width();
    let x = delta - hole.center;
    hole.depth * g2 / (x * x + g2)
}

/// Conditions under which the closed-form slow-light results hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ValidityWarning {
    /// `Δ₀ · T₂` is below 10: the homogeneous line is not negligible against
    /// the hole.
    DephasingNotNegligible { ratio: f64 },
    /// `Γ_inh / Δ₀` is below 10: the background is not flat across the hole.
    HoleNotNarrow { ratio: f64 },
}

/// Optically thick slab with a burnt hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    /// Background intensity absorption coefficient α₀ (1/m).
    pub alpha0: f64,
    /// Propagation length L (m).
    pub length: f64,
    pub hole: SpectralHole,
    /// Inhomogeneous width Γ_inh (rad/s); only used for validity checks.
    pub gamma_inh: f64,
    /// Transverse relaxation time T₂ (s).
    pub t2: f64,
    /// Longitudinal relaxation time T₁ (s).
    pub t1: f64,
}

impl Medium {
    pub fn new(
        alpha0: f64,
        length: f64,
        hole: SpectralHole,
        gamma_inh: f64,
        t2: f64,
        t1: f64,
    ) -> Result<Self> {
        let site = Site::new(MODULE, "Medium::new");
        if !(alpha0 >= 0.0 && alpha0.is_finite()) {
            return Err(Error::invalid(
                site,
                format!("alpha0 must be >= 0, got {alpha0}"),
            ));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(
                site,
                format!("length must be > 0, got {length}"),
            ));
        }
        if !(t2 > 0.0 && t1 > 0.0) {
            return Err(Error::invalid(site, "relaxation times must be > 0"));
        }
        if !(gamma_inh > 0.0) {
            return Err(Error::invalid(site, "inhomogeneous width must be > 0"));
        }
        Ok(Self {
            alpha0,
            length,
            hole,
            gamma_inh,
            t2,
            t1,
        })
    }

    /// A medium with effectively no dephasing and a very wide inhomogeneous
    /// line, the regime assumed by the closed-form results.
    pub fn ideal(alpha0: f64, length: f64, hole: SpectralHole) -> Result<Self> {
        Self::new(
            alpha0,
            length,
            hole,
            2.0 * std::f64::consts::PI * 20e9,
            1.0,
            10.0,
        )
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    pub fn optical_depth(&self) -> f64 {
        self.alpha0 * self.length
    }

    pub fn validity(&self) -> Vec<ValidityWarning> {
        let mut out = Vec::new();
        let dephasing = self.hole.width_fwhm * self.t2;
        if dephasing < 10.0 {
            out.push(ValidityWarning::DephasingNotNegligible { ratio: dephasing });
        }
        let narrow = self.gamma_inh / self.hole.width_fwhm;
        if narrow < 10.0 {
            out.push(ValidityWarning::HoleNotNarrow { ratio: narrow });
        }
        out
    }

    /// Intensity absorption coefficient at `delta` (1/m).
    pub fn absorption_coefficient(&self, delta: f64) -> f64 {
        absorption_coefficient(delta, self)
    }

    /// Amplitude exponent per metre κ(Δ); see the module docs.
    pub fn exponent(&self, delta: f64) -> C64 {
        let g = self.hole.half_width();
        let lorentz = C64::new(g, 0.0) / C64::new(g, -(delta - self.hole.center));
        -0.5 * self.alpha0 * (C64::new(1.0, 0.0) - self.hole.depth * lorentz)
    }
}

/// `alpha0 · (1 − hole_profile(delta))`.
pub fn absorption_coefficient(delta: f64, medium: &Medium) -> f64 {
    medium.alpha0 * (1.0 - hole_profile(delta, &medium.hole))
}

/// Complex amplitude exponent sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexResponse {
    pub detunings: Vec<f64>,
    /// Real part `−α/2`; imaginary part is the phase per metre.
    pub exponent_per_meter: Vec<C64>,
}

impl ComplexResponse {
    pub fn new(detunings: Vec<f64>, exponent_per_meter: Vec<C64>) -> Result<Self> {
        let site = Site::new(MODULE, "ComplexResponse::new");
        if detunings.is_empty() {
            return Err(Error::invalid(site, "empty detuning grid"));
        }
        if detunings.len() != exponent_per_meter.len() {
            return Err(Error::invalid(
                site,
                "detunings and exponents differ in length",
            ));
        }
        check_increasing(&detunings, site)?;
        Ok(Self {
            detunings,
            exponent_per_meter,
        })
    }

    /// Response of a raw absorption spectrum, with the dispersion obtained
    /// from the numerical Kramers-Kronig transform.
    pub fn from_absorption(detunings: &[f64], alpha: &[f64]) -> Result<Self> {
        let kk = kramers_kronig(detunings, alpha)?;
        let exponent = alpha
            .iter()
            .zip(&kk.phase_per_meter)
            .map(|(&a, &p)| C64::new(-0.5 * a, p))
            .collect();
        Self::new(detunings.to_vec(), exponent)
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.detunings[0], *self.detunings.last().unwrap())
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn exponent_at(&self, delta: f64) -> Option<C64> {
        let (lo, hi) = self.range();
        if delta < lo || delta > hi {
            return None;
        }
        let i = self.detunings.partition_point(|&d| d <= delta);
        if i == 0 {
            return Some(self.exponent_per_meter[0]);
        }
        if i >= self.len() {
            return Some(*self.exponent_per_meter.last().unwrap());
        }
        let (x0, x1) = (self.detunings[i - 1], self.detunings[i]);
        let t = (delta - x0) / (x1 - x0);
        Some(self.exponent_per_meter[i - 1] * (1.0 - t) + self.exponent_per_meter[i] * t)
    }

    /// Largest spacing between neighbouring samples inside `[lo, hi]`.
    pub(crate) fn max_spacing_within(&self, lo: f64, hi: f64) -> f64 {
        self.detunings
            .windows(2)
            .filter(|w| w[1] >= lo && w[0] <= hi)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Samples the analytic response of `medium` on `grid`.
pub fn complex_response(grid: &[f64], medium: &Medium) -> Result<ComplexResponse> {
    let site = Site::new(MODULE, "complex_response");
    if grid.is_empty() {
        return Err(Error::invalid(site, "empty detuning grid"));
    }
    check_increasing(grid, site)?;
    let exponent = grid.iter().map(|&d| medium.exponent(d)).collect();
    Ok(ComplexResponse {
        detunings: grid.to_vec(),
        exponent_per_meter: exponent,
    })
}

/// Uniform grid of `n` points on `[-half_span, half_span]`.
pub fn symmetric_grid(half_span: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = 2.0 * half_span / (n - 1) as f64;
    (0..n).map(|i| -half_span + step * i as f64).collect()
}

fn check_increasing(grid: &[f64], site: Site) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(site, "grid contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(site, "grid must be strictly increasing"));
    }
    Ok(())
}
