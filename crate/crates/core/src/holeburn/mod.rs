//! Persistent hole burning in a double-Λ ensemble.
//!
//! Each ion class is labelled by the offset `δ` of its g₁→e₁ line from the
//! burn frequency ν₀. Excited states are eliminated adiabatically, so a class
//! is just the pair of ground populations `(n1, n2)` with `n1 + n2 = 1`.
//! Optical pumping moves population out of whichever sublevel the laser is
//! resonant with; hyperfine relaxation pulls `n1 − n2` back to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Site};

mod pump;
mod spectrum;

pub use pump::{simulate_pump_sequence, PumpOptions, PumpSegment, PumpSequence};
pub use spectrum::{
    absorption_spectrum, enhancement_gain, spectral_features, AbsorptionSpectrum, BackgroundWindow,
    Feature, FeatureKind, PROBE_WINDOW_FWHMS,
};

pub(crate) const MODULE: &str = "hole-burning";

/// Hyperfine structure and relaxation of the active ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSystem {
    /// Ground-state splitting Δg (rad/s).
    pub delta_g: f64,
    /// Excited-state splitting Δe (rad/s).
    pub delta_e: f64,
    /// Homogeneous linewidth, FWHM (rad/s).
    pub gamma_hom: f64,
    /// Probability that an excited ion decays into the other ground sublevel.
    pub branching: f64,
    /// Optical lifetime (s).
    pub t1_opt: f64,
    /// Lifetime of the shelving sublevel (s). May be infinite.
    pub t_hyperfine: f64,
    /// Power-broadening coefficient `s` (s): a pump of rate `R` burns with a
    /// kernel of FWHM `gamma_hom · sqrt(1 + s·R)`.
    #[serde(default)]
    pub saturation_per_rate: f64,
}

impl LevelSystem {
    pub fn validate(&self) -> Result<()> {
        let site = Site::new(MODULE, "LevelSystem::validate");
        let bad = |r: String| Err(Error::invalid(site, r));
        if !(self.delta_g > 0.0
            && self.delta_e >= 0.0
            && self.delta_g.is_finite()
            && self.delta_e.is_finite())
        {
            return bad(format!(
                "splittings must be finite with Δg > 0, Δe ≥ 0 (Δg = {}, Δe = {})",
                self.delta_g, self.delta_e
            ));
        }
        if !(self.gamma_hom > 0.0 && self.gamma_hom.is_finite()) {
            return bad(format!(
                "homogeneous width must be > 0, got {}",
                self.gamma_hom
            ));
        }
        if !(self.branching > 0.0 && self.branching < 1.0) {
            return bad(format!(
                "branching must lie in (0, 1), got {}",
                self.branching
            ));
        }
        if !(self.t1_opt > 0.0 && self.t1_opt.is_finite()) {
            return bad(format!("optical lifetime must be > 0, got {}", self.t1_opt));
        }
        if !(self.t_hyperfine > 100.0 * self.t1_opt) {
            return bad(format!(
                "shelving lifetime {} s is not much longer than the optical lifetime {} s",
                self.t_hyperfine, self.t1_opt
            ));
        }
        if !(self.saturation_per_rate >= 0.0 && self.saturation_per_rate.is_finite()) {
            return bad(format!(
                "saturation coefficient must be ≥ 0, got {}",
                self.saturation_per_rate
            ));
        }
        Ok(())
    }

    /// Burn-kernel FWHM at pump rate `rate`.
    pub fn burn_width(&self, rate: f64) -> f64 {
        self.gamma_hom * (1.0 + self.saturation_per_rate * rate.abs()).sqrt()
    }

    pub(crate) fn hyperfine_rate(&self) -> f64 {
        if self.t_hyperfine.is_finite() {
            1.0 / self.t_hyperfine
        } else {
            0.0
        }
    }

    /// Offsets of the four lines from `δ`, in [`Transition::ALL`] order.
    pub(crate) fn offsets(&self) -> [f64; 4] {
        [
            0.0,
            self.delta_e,
            -self.delta_g,
            -self.delta_g + self.delta_e,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ground {
    G1,
    G2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Excited {
    E1,
    E2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub ground: Ground,
    pub excited: Excited,
}

impl Transition {
    pub const ALL: [Transition; 4] = [
        Transition {
            ground: Ground::G1,
            excited: Excited::E1,
        },
        Transition {
            ground: Ground::G1,
            excited: Excited::E2,
        },
        Transition {
            ground: Ground::G2,
            excited: Excited::E1,
        },
        Transition {
            ground: Ground::G2,
            excited: Excited::E2,
        },
    ];
}

/// The four optical lines of a class at offset `delta`, labelled by their
/// ground and excited sublevels.
pub fn ion_transition_frequencies(delta: f64, levels: &LevelSystem) -> [(Transition, f64); 4] {
    let o = levels.offsets();
    std::array::from_fn(|k| (Transition::ALL[k], delta + o[k]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonClass {
    pub delta: f64,
    pub n1: f64,
    pub n2: f64,
}

impl IonClass {
    pub fn thermal(delta: f64) -> Self {
        Self {
            delta,
            n1: 0.5,
            n2: 0.5,
        }
    }

    pub(crate) fn population(&self, g: Ground) -> f64 {
        match g {
            Ground::G1 => self.n1,
            Ground::G2 => self.n2,
        }
    }
}

/// Uniformly spaced ion classes.
#[derive(Debug, Clone, PartialEq)]
pub struct IonEnsemble {
    pub spacing: f64,
    pub classes: Vec<IonClass>,
}

impl IonEnsemble {
    /// Thermal classes on `first + k·spacing`, `k < count`.
    pub fn thermal(first: f64, spacing: f64, count: usize) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite() && first.is_finite()) || count == 0 {
            return Err(Error::grid(
                Site::new(MODULE, "IonEnsemble::thermal"),
                "need a positive spacing and at least one class",
            ));
        }
        let classes = (0..count)
            .map(|k| IonClass::thermal(first + k as f64 * spacing))
            .collect();
        Ok(Self { spacing, classes })
    }

    /// Classes at spacing `gamma_hom / 4` covering every class with a line in
    /// `[probe_lo − margin, probe_hi + margin]`.
    ///
    /// The grid is laid out mirror-symmetric about `(Δg − Δe)/2`, the centre
    /// of the class ↔ class map `δ → Δg − Δe − δ` that swaps the two ground
    /// sublevels. This keeps symmetric pump sequences exactly symmetric.
    pub fn covering(
        levels: &LevelSystem,
        probe_lo: f64,
        probe_hi: f64,
        margin: f64,
    ) -> Result<Self> {
        levels.validate()?;
        let o = levels.offsets();
        let omin = o.iter().cloned().fold(f64::INFINITY, f64::min);
        let omax = o.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = probe_lo - margin - omax;
        let hi = probe_hi + margin - omin;
        let centre = 0.5 * (levels.delta_g - levels.delta_e);
        let spacing = levels.gamma_hom / 4.0;
        let half = ((hi - centre).max(centre - lo) / spacing).ceil() as usize;
        let count = 2 * half + 1;
        Self::thermal(centre - half as f64 * spacing, spacing, count)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.classes.first().map_or(0.0, |c| c.delta)
    }

    /// Indices of classes with `δ ∈ [lo, hi]`.
    pub(crate) fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let n = self.classes.len();
        let x0 = self.first();
        let a = ((lo - x0) / self.spacing).ceil().max(0.0);
        let b = ((hi - x0) / self.spacing).floor() + 1.0;
        let a = (a as usize).min(n);
        let b = (b.max(0.0) as usize).min(n);
        a..b.max(a)
    }
}

/// Unit-peak Lorentzian of full width `fwhm`.
#[inline]
pub(crate) fn lorentzian(x: f64, fwhm: f64) -> f64 {
    let u = 2.0 * x / fwhm;
    1.0 / (1.0 + u * u)
}
