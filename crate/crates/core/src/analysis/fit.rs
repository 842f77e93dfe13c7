//! Least-squares fit of a Lorentzian dip on a flat baseline.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use super::MODULE;
use crate::error::{Error, Result, Site};
use crate::holeburn::AbsorptionSpectrum;

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-6;

/// `baseline − depth_abs · (Δ₀²/4) / ((ν − center)² + Δ₀²/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoleFit {
    pub center: f64,
    pub width_fwhm: f64,
    pub depth_abs: f64,
    pub baseline: f64,
    pub rms_residual: f64,
    pub iterations: usize,
}

impl HoleFit {
    pub fn model(&self, nu: f64) -> f64 {
        model(&self.params(), nu)
    }

    fn params(&self) -> Vector4<f64> {
        Vector4::new(self.baseline, self.depth_abs, self.center, self.width_fwhm)
    }
}

fn model(p: &Vector4<f64>, nu: f64) -> f64 {
    let g = 0.5 * p[3];
    let u = nu - p[2];
    p[0] - p[1] * g * g / (u * u + g * g)
}

fn jacobian_row(p: &Vector4<f64>, nu: f64) -> Vector4<f64> {
    let (d, g) = (p[1], 0.5 * p[3]);
    let u = nu - p[2];
    let q = u * u + g * g;
    Vector4::new(
        1.0,
        -g * g / q,
        -2.0 * d * g * g * u / (q * q),
        -d * g * u * u / (q * q),
    )
}

/// Fits the sampled spectrum restricted to `init_window` on either side of
/// its minimum.
pub fn fit_spectrum(spectrum: &AbsorptionSpectrum, init_window: f64) -> Result<HoleFit> {
    fit_lorentzian_hole(&spectrum.detunings, &spectrum.alpha, init_window)
}

/// Damped least squares (Levenberg-Marquardt with diagonal scaling) using the
/// analytic Jacobian of the Lorentzian model.
pub fn fit_lorentzian_hole(nu: &[f64], alpha: &[f64], init_window: f64) -> Result<HoleFit> {
    let site = Site::new(MODULE, "fit_lorentzian_hole");
    if nu.len() != alpha.len() || nu.len() < 5 {
        return Err(Error::invalid(
            site,
            "need at least 5 samples with matching lengths",
        ));
    }
    let (kmin, _) = alpha
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let centre0 = nu[kmin];
    let idx: Vec<usize> = (0..nu.len())
        .filter(|&i| (nu[i] - centre0).abs() <= init_window)
        .collect();
    if idx.len() < 5 {
        return Err(Error::invalid(
            site,
            "fewer than 5 samples inside the fit window",
        ));
    }
    let xs: Vec<f64> = idx.iter().map(|&i| nu[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| alpha[i]).collect();

    let baseline0 = 0.5 * (ys[0] + ys[ys.len() - 1]);
    let depth0 = baseline0 - alpha[kmin];
    if !(depth0 > 0.0) {
        return Err(Error::invalid(site, "no dip inside the fit window"));
    }
    let half = baseline0 - 0.5 * depth0;
    let kc = xs.iter().position(|&x| x == centre0).unwrap();
    let left = (0..kc)
        .rev()
        .find(|&i| ys[i] >= half)
        .map_or(xs[0], |i| xs[i]);
    let right = (kc..xs.len())
        .find(|&i| ys[i] >= half)
        .map_or(xs[xs.len() - 1], |i| xs[i]);
    let width0 = (right - left).max(xs[1] - xs[0]);

    let mut p = Vector4::new(baseline0, depth0, centre0, width0);
    let cost = |p: &Vector4<f64>| {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| (model(p, x) - y).powi(2))
            .sum::<f64>()
    };
    let mut current = cost(&p);
    let mut lambda = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&x, &y) in xs.iter().zip(&ys) {
            let j = jacobian_row(&p, x);
            let r = model(&p, x) - y;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut accepted = None;
        for _ in 0..40 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            if !(trial[3] > 0.0) {
                lambda *= 10.0;
                continue;
            }
            let c = cost(&trial);
            if c <= current {
                accepted = Some((trial, step, c));
                lambda = (lambda * 0.3).max(1e-12);
                break;
            }
            lambda *= 10.0;
        }
        let Some((trial, step, c)) = accepted else {
            // no downhill step at any damping: we are at the minimum to
            // working precision
            return Ok(finish(p, current, xs.len(), iteration));
        };
        p = trial;
        current = c;
        let scales = [p[0].abs().max(p[1].abs()), p[1].abs(), p[3], p[3]];
        let rel = (0..4)
            .map(|k| step[k].abs() / scales[k].max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if rel < STEP_TOLERANCE {
            return Ok(finish(p, current, xs.len(), iteration));
        }
    }
    Err(Error::NoConvergence {
        site,
        iterations: MAX_ITERATIONS,
        reason: "parameter updates did not fall below 1e-6 relative".into(),
        last_iterate: p.iter().cloned().collect(),
    })
}

fn finish(p: Vector4<f64>, cost: f64, n: usize, iterations: usize) -> HoleFit {
    HoleFit {
        baseline: p[0],
        depth_abs: p[1],
        center: p[2],
        width_fwhm: p[3],
        rms_residual: (cost / n as f64).sqrt(),
        iterations,
    }
}
