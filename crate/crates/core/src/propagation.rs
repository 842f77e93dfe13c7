//! Frequency-domain propagation and the closed-form slow-light quantities.
//!
//! The propagator works on the envelope in the frame moving at `c`: the
//! carrier phase `exp(ikL)` and the vacuum transit `L/c` are removed, so every
//! delay reported here is the excess group delay against a reference pulse.

use rustfft::FftPlanner;
use serde::Serialize;

use crate::analysis::delay::peak_time;
use crate::error::{Error, Result, Site};
use crate::medium::{ComplexResponse, Medium};
use crate::pulse::Pulse;
use crate::{C64, SPEED_OF_LIGHT};

const MODULE: &str = "linear-propagation";

/// Spectral content below this fraction of the peak is treated as absent.
const NEGLIGIBLE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct PropagationResult {
    pub transmitted: Pulse,
    /// Shift of the interpolated amplitude maximum (s).
    pub delay_peak: f64,
    /// Shift of the intensity centroid (s); a diagnostic for distorted pulses.
    pub delay_centroid: f64,
    pub energy_transmission: f64,
    /// Output over input intensity FWHM.
    pub broadening: f64,
}

/// `1/v_g = 1/c + alpha0/delta0`.
pub fn group_velocity(alpha0: f64, delta0: f64) -> Result<f64> {
    let site = Site::new(MODULE, "group_velocity");
    if !(delta0 > 0.0) {
        return Err(Error::invalid(
            site,
            format!("hole width must be > 0, got {delta0}"),
        ));
    }
    if !(alpha0 >= 0.0) {
        return Err(Error::invalid(
            site,
            format!("alpha0 must be >= 0, got {alpha0}"),
        ));
    }
    Ok(1.0 / (1.0 / SPEED_OF_LIGHT + alpha0 / delta0))
}

/// Excess group delay `depth · α₀ L / Δ₀` at the hole centre.
///
/// For a depth-one hole this is `L/v_g − L/c`. Partial holes scale
/// linearly with depth.
pub fn expected_delay(medium: &Medium) -> Result<f64> {
    let site = Site::new(MODULE, "expected_delay");
    if !(medium.hole.width_fwhm > 0.0) {
        return Err(Error::invalid(site, "hole width must be > 0"));
    }
    Ok(medium.hole.depth * medium.alpha0 * medium.length / medium.hole.width_fwhm)
}

/// Length of the zero-padded FFT record used for a pulse of `n` samples.
pub fn padded_len(n: usize) -> usize {
    (4 * n).next_power_of_two()
}

/// Carrier offsets (rad/s, `exp(−iΔt)` convention) of the bins of a forward
/// FFT of length `m` with sample interval `dt`, in bin order.
pub fn bin_offsets(m: usize, dt: f64) -> Vec<f64> {
    let df = std::f64::consts::TAU / (m as f64 * dt);
    (0..m)
        .map(|k| {
            let signed = if k < m.div_ceil(2) {
                k as f64
            } else {
                k as f64 - m as f64
            };
            // forward FFT bins are exp(+iωt) components, i.e. Δ = −ω
            -signed * df
        })
        .collect()
}

/// Multiplies the pulse spectrum by `exp(κ(Δ)·length)` with κ taken from
/// `response`, which is interpolated linearly between its samples.
pub fn propagate_frequency_domain(
    pulse: &Pulse,
    response: &ComplexResponse,
    length: f64,
) -> Result<PropagationResult> {
    let site = Site::new(MODULE, "propagate_frequency_domain");
    check_input(pulse, length, site)?;
    let m = padded_len(pulse.len());
    let offsets = bin_offsets(m, pulse.dt);
    let spectrum = forward(pulse, m);
    let (lo, hi) = response.range();
    let peak = spectrum.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let significant: Vec<f64> = offsets
        .iter()
        .zip(&spectrum)
        .filter(|(_, c)| c.norm() > NEGLIGIBLE * peak)
        .map(|(&d, _)| d)
        .collect();
    let (band_lo, band_hi) = significant
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &d| {
            (l.min(d), h.max(d))
        });
    if band_lo < lo || band_hi > hi {
        return Err(Error::grid(
            site,
            format!(
                "pulse spectrum spans [{band_lo:e}, {band_hi:e}] rad/s but the response only covers [{lo:e}, {hi:e}]"
            ),
        ));
    }
    let width = spectral_rms(&offsets, &spectrum);
    let spacing = response.max_spacing_within(band_lo, band_hi);
    if spacing > 0.5 * width {
        return Err(Error::grid(
            site,
            format!("response spacing {spacing:e} rad/s does not resolve the pulse spectrum (rms width {width:e} rad/s)"),
        ));
    }
    let transfer = |d: f64| {
        let k = response
            .exponent_at(d.clamp(lo, hi))
            .expect("clamped into range");
        (k * length).exp()
    };
    Ok(finish(pulse, spectrum, &offsets, transfer))
}

/// Propagates through the analytic response of `medium` over its full length.
pub fn propagate_medium(pulse: &Pulse, medium: &Medium) -> Result<PropagationResult> {
    let site = Site::new(MODULE, "propagate_medium");
    check_input(pulse, medium.length, site)?;
    let m = padded_len(pulse.len());
    let offsets = bin_offsets(m, pulse.dt);
    let spectrum = forward(pulse, m);
    let transfer = |d: f64| (medium.exponent(d) * medium.length).exp();
    Ok(finish(pulse, spectrum, &offsets, transfer))
}

fn check_input(pulse: &Pulse, length: f64, site: Site) -> Result<()> {
    if pulse.len() < 2 {
        return Err(Error::invalid(site, "pulse needs at least two samples"));
    }
    if pulse.energy() == 0.0 {
        return Err(Error::invalid(site, "zero-energy pulse"));
    }
    if !(length >= 0.0) {
        return Err(Error::invalid(site, "length must be >= 0"));
    }
    Ok(())
}

fn forward(pulse: &Pulse, m: usize) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..pulse.len()].copy_from_slice(&pulse.envelope);
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf
}

fn spectral_rms(offsets: &[f64], spectrum: &[C64]) -> f64 {
    let w: f64 = spectrum.iter().map(|c| c.norm_sqr()).sum();
    let mean: f64 = offsets
        .iter()
        .zip(spectrum)
        .map(|(d, c)| d * c.norm_sqr())
        .sum::<f64>()
        / w;
    let var: f64 = offsets
        .iter()
        .zip(spectrum)
        .map(|(d, c)| (d - mean).powi(2) * c.norm_sqr())
        .sum::<f64>()
        / w;
    var.sqrt()
}

fn finish(
    pulse: &Pulse,
    mut spectrum: Vec<C64>,
    offsets: &[f64],
    transfer: impl Fn(f64) -> C64,
) -> PropagationResult {
    let m = spectrum.len();
    for (c, &d) in spectrum.iter_mut().zip(offsets) {
        *c *= transfer(d);
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut spectrum);
    let norm = 1.0 / m as f64;
    let full_energy: f64 =
        spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>() * norm * norm * pulse.dt;
    let envelope: Vec<C64> = spectrum[..pulse.len()].iter().map(|c| c * norm).collect();
    let transmitted = Pulse {
        t0: pulse.t0,
        dt: pulse.dt,
        envelope,
    };
    PropagationResult {
        delay_peak: peak_time(&transmitted) - peak_time(pulse),
        delay_centroid: transmitted.centroid() - pulse.centroid(),
        energy_transmission: full_energy / pulse.energy(),
        broadening: transmitted.fwhm() / pulse.fwhm(),
        transmitted,
    }
}
