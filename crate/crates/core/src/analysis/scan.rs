use serde::Serialize;

use super::fit::{fit_lorentzian_hole, HoleFit};
use super::MODULE;
use crate::error::{Error, Result, Site};
use crate::exec::Execution;
use crate::medium::Medium;
use crate::propagation::propagate_medium;
use crate::pulse::Pulse;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    /// `α L / Γ` from the fitted hole: fitted depth (1/m) times length over
    /// fitted angular FWHM (s).
    pub alpha_l_over_gamma: f64,
    pub delay: f64,
    pub delay_centroid: f64,
    pub broadening: f64,
    pub transmission: f64,
    pub hole_fit: HoleFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DelayScan {
    pub rows: Vec<ScanRow>,
    /// Indices of scenarios excluded because their hole is narrower than the
    /// distortion floor.
    pub excluded: Vec<usize>,
    pub fit: LinearFit,
}

/// Ordinary least-squares line through `(x, y)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Frequency-domain delay of `pulse` through each scenario, regressed against
/// `α L / Γ` measured from a Lorentzian fit of the scenario's absorption.
///
/// Scenarios whose hole is narrower than `width_floor` (rad/s) are skipped
/// and listed in [`DelayScan::excluded`].
pub fn delay_scan(
    scenarios: &[Medium],
    pulse: &Pulse,
    width_floor: f64,
    exec: Execution,
) -> Result<DelayScan> {
    let site = Site::new(MODULE, "delay_scan");
    let kept: Vec<Medium> = scenarios
        .iter()
        .filter(|m| m.hole.width_fwhm >= width_floor)
        .cloned()
        .collect();
    let excluded = scenarios
        .iter()
        .enumerate()
        .filter(|(_, m)| m.hole.width_fwhm < width_floor)
        .map(|(i, _)| i)
        .collect();
    let rows = exec
        .map(&kept, |m| scan_one(m, pulse))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.alpha_l_over_gamma, r.delay))
        .collect();
    let fit = if points.len() >= 2 {
        linear_fit(&points)
            .ok_or_else(|| Error::invalid(site, "all scenarios share the same αL/Γ"))?
    } else if let [(x, y)] = points[..] {
        LinearFit {
            slope: if x != 0.0 { y / x } else { f64::NAN },
            intercept: f64::NAN,
        }
    } else {
        return Err(Error::invalid(
            site,
            "no scenario passed the distortion floor",
        ));
    };
    Ok(DelayScan {
        rows,
        excluded,
        fit,
    })
}

fn scan_one(m: &Medium, pulse: &Pulse) -> Result<ScanRow> {
    let result = propagate_medium(pulse, m)?;
    let width = m.hole.width_fwhm;
    let hole_fit = if m.alpha0 * m.hole.depth > 0.0 {
        let nu: Vec<f64> = (0..801)
            .map(|i| m.hole.center + (i as f64 - 400.0) * width / 40.0)
            .collect();
        let alpha: Vec<f64> = nu.iter().map(|&x| m.absorption_coefficient(x)).collect();
        fit_lorentzian_hole(&nu, &alpha, 10.0 * width)?
    } else {
        HoleFit {
            center: m.hole.center,
            width_fwhm: width,
            depth_abs: 0.0,
            baseline: m.alpha0,
            rms_residual: 0.0,
            iterations: 0,
        }
    };
    Ok(ScanRow {
        alpha_l_over_gamma: hole_fit.depth_abs * m.length / hole_fit.width_fwhm,
        delay: result.delay_peak,
        delay_centroid: result.delay_centroid,
        broadening: result.broadening,
        transmission: result.energy_transmission,
        hole_fit,
    })
}
