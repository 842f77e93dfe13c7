use serde::Serialize;

use super::MODULE;
use crate::error::{Error, Result, Site};
use crate::pulse::Pulse;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayEstimate {
    /// Shift of the parabolically interpolated amplitude maximum (s).
    pub peak: f64,
    /// Shift of the intensity centroid (s).
    pub centroid: f64,
}

/// Delay of `transmitted` against `reference` from the position of the
/// amplitude maximum, refined by a three-point parabola.
pub fn extract_delay(reference: &Pulse, transmitted: &Pulse) -> Result<DelayEstimate> {
    let site = Site::new(MODULE, "extract_delay");
    if !reference.same_grid(transmitted) {
        return Err(Error::invalid(
            site,
            "reference and transmitted pulses are on different time grids",
        ));
    }
    for (name, p) in [("reference", reference), ("transmitted", transmitted)] {
        if p.peak_amplitude() == 0.0 {
            return Err(Error::invalid(
                site,
                format!("{name} pulse is identically zero"),
            ));
        }
        if p.edge_ratio() > 1e-3 {
            return Err(Error::invalid(
                site,
                format!(
                    "{name} pulse does not decay at the record edges (edge/peak = {:e})",
                    p.edge_ratio()
                ),
            ));
        }
    }
    let amp: Vec<f64> = transmitted.envelope.iter().map(|c| c.norm()).collect();
    if let Some(ratio) = secondary_peak_ratio(&amp) {
        if ratio >= 0.5 {
            return Err(Error::Ambiguous {
                site,
                reason: format!(
                    "secondary maximum at {:.0}% of the main peak",
                    100.0 * ratio
                ),
            });
        }
    }
    Ok(DelayEstimate {
        peak: peak_time(transmitted) - peak_time(reference),
        centroid: transmitted.centroid() - reference.centroid(),
    })
}

/// Time of the amplitude maximum with three-point parabolic refinement.
pub(crate) fn peak_time(p: &Pulse) -> f64 {
    let amp: Vec<f64> = p.envelope.iter().map(|c| c.norm()).collect();
    let Some((k, _)) = amp.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return f64::NAN;
    };
    if k == 0 || k + 1 == amp.len() {
        return p.time(k);
    }
    let (y0, y1, y2) = (amp[k - 1], amp[k], amp[k + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    let shift = if denom.abs() > 0.0 {
        0.5 * (y0 - y2) / denom
    } else {
        0.0
    };
    p.time(k) + shift.clamp(-0.5, 0.5) * p.dt
}

/// Height of the tallest local maximum other than the global one, relative
/// to the global maximum. Maxima with less than 10 % prominence towards the
/// main peak are ignored as ripple.
fn secondary_peak_ratio(amp: &[f64]) -> Option<f64> {
    let (main, &top) = amp.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let mut best: Option<f64> = None;
    for k in 1..amp.len().saturating_sub(1) {
        if k == main || !(amp[k] > amp[k - 1] && amp[k] >= amp[k + 1]) {
            continue;
        }
        let (lo, hi) = if k < main { (k, main) } else { (main, k) };
        let valley = amp[lo..=hi].iter().cloned().fold(f64::INFINITY, f64::min);
        if amp[k] - valley >= 0.1 * amp[k] {
            best = Some(best.map_or(amp[k], |b: f64| b.max(amp[k])));
        }
    }
    best.map(|b| b / top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{make_gaussian_pulse, TimeGrid};
    use crate::C64;

    fn gaussian_at(centre: f64) -> Pulse {
        let g = TimeGrid::centered(5.37e-6, 64, 12.0);
        let a = 2.0 * std::f64::consts::LN_2 / (5.37e-6f64).powi(2);
        let env = (0..g.n)
            .map(|k| C64::new((-a * (g.t0 + g.dt * k as f64 - centre).powi(2)).exp(), 0.0))
            .collect();
        Pulse::new(g.t0, g.dt, env).unwrap()
    }

    #[test]
    fn synthetic_shift() {
        let r = gaussian_at(0.0);
        let t = gaussian_at(2e-6);
        let d = extract_delay(&r, &t).unwrap();
        assert!((d.peak - 2e-6).abs() < r.dt / 10.0, "{}", d.peak);
        assert!((d.centroid - 2e-6).abs() < r.dt / 10.0);
        assert_eq!(extract_delay(&r, &r).unwrap().peak, 0.0);
    }

    #[test]
    fn double_peak_is_ambiguous() {
        let a = gaussian_at(-8e-6);
        let b = gaussian_at(8e-6);
        let env = a
            .envelope
            .iter()
            .zip(&b.envelope)
            .map(|(x, y)| x + y * 0.7)
            .collect();
        let two = Pulse::new(a.t0, a.dt, env).unwrap();
        assert!(matches!(
            extract_delay(&a, &two),
            Err(Error::Ambiguous { .. })
        ));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let r = make_gaussian_pulse(5.37e-6, 1.0, TimeGrid::centered(5.37e-6, 64, 8.0)).unwrap();
        let t = make_gaussian_pulse(5.37e-6, 1.0, TimeGrid::centered(5.37e-6, 60, 8.0)).unwrap();
        assert!(extract_delay(&r, &t).is_err());
    }
}
