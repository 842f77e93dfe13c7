//! Numerical Kramers-Kronig transform on a uniform grid.

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result, Site};
use crate::C64;

const MODULE: &str = "spectral-medium";

/// Dispersion recovered from an absorption spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct KkPhase {
    pub detunings: Vec<f64>,
    /// Phase per metre relative to the carrier (rad/m).
    pub phase_per_meter: Vec<f64>,
    /// Mean of the two edge samples, subtracted before the transform (1/m).
    pub edge_absorption: f64,
    /// Set when the grid edges are not flat to 1 % of the peak absorption, in
    /// which case the truncated wings bias the result.
    pub edge_warning: bool,
}

/// Phase per metre of a medium with intensity absorption `alpha` sampled on
/// the uniform grid `detunings`.
///
/// Returns `−H[(α − α_edge)/2]` with `H f(x) = (1/π) PV ∫ f(y)/(x − y) dy`,
/// which is the imaginary part of the exponent in the convention of
/// [`crate::medium`]: a transparency dip gives a positive phase slope.
pub fn kramers_kronig(detunings: &[f64], alpha: &[f64]) -> Result<KkPhase> {
    let site = Site::new(MODULE, "kramers_kronig");
    let n = detunings.len();
    if n < 3 || alpha.len() != n {
        return Err(Error::invalid(
            site,
            "need at least 3 samples with matching lengths",
        ));
    }
    let step = (detunings[n - 1] - detunings[0]) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::invalid(site, "grid must be increasing"));
    }
    let tol = 1e-6 * step.max(detunings[0].abs().max(detunings[n - 1].abs()) * 1e-9);
    for (i, &d) in detunings.iter().enumerate() {
        if (d - (detunings[0] + step * i as f64)).abs() > tol.max(1e-9 * step) {
            return Err(Error::invalid(site, "grid must be uniform"));
        }
    }

    let edge = 0.5 * (alpha[0] + alpha[n - 1]);
    let peak = alpha.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let edge_span = (n / 100).max(1);
    let flat = |s: &[f64]| {
        let (lo, hi) = s
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| {
                (l.min(a), h.max(a))
            });
        hi - lo
    };
    let edge_warning = peak > 0.0
        && ((alpha[0] - alpha[n - 1]).abs() > 0.01 * peak
            || flat(&alpha[..edge_span]) > 0.01 * peak
            || flat(&alpha[n - edge_span..]) > 0.01 * peak);

    let f: Vec<f64> = alpha.iter().map(|&a| 0.5 * (a - edge)).collect();
    let h = discrete_hilbert(&f);
    Ok(KkPhase {
        detunings: detunings.to_vec(),
        phase_per_meter: h.into_iter().map(|v| -v).collect(),
        edge_absorption: edge,
        edge_warning,
    })
}

/// Discrete Hilbert transform of uniformly spaced samples,
/// `H_i = (2/π) Σ_{i−j odd} f_j / (i − j)`, evaluated as a linear
/// convolution through a zero-padded FFT.
pub fn discrete_hilbert(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    if n == 0 {
        return Vec::new();
    }
    let m = (2 * n - 1).next_power_of_two();
    let mut signal = vec![C64::new(0.0, 0.0); m];
    for (s, &v) in signal.iter_mut().zip(f) {
        s.re = v;
    }
    let mut kernel = vec![C64::new(0.0, 0.0); m];
    for k in (1..n).step_by(2) {
        let v = 2.0 / (std::f64::consts::PI * k as f64);
        kernel[k].re = v;
        kernel[m - k].re = -v;
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    fwd.process(&mut signal);
    fwd.process(&mut kernel);
    for (s, k) in signal.iter_mut().zip(&kernel) {
        *s *= *k;
    }
    inv.process(&mut signal);
    let norm = 1.0 / m as f64;
    signal[..n].iter().map(|c| c.re * norm).collect()
}
