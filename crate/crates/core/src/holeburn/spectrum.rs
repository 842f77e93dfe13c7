use serde::Serialize;

use super::{lorentzian, IonEnsemble, LevelSystem, Transition, MODULE};
use crate::error::{Error, Result, Site};
use crate::medium::ComplexResponse;

/// Probe lines are summed out to this many homogeneous widths.
pub const PROBE_WINDOW_FWHMS: f64 = 50.0;

/// Sampled absorption coefficient versus probe offset from ν₀.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionSpectrum {
    /// Probe offsets (rad/s), increasing.
    pub detunings: Vec<f64>,
    /// Absorption coefficient (1/m).
    pub alpha: Vec<f64>,
    /// Absorption of the unpumped ensemble (1/m).
    pub alpha_thermal: f64,
}

impl AbsorptionSpectrum {
    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    /// Linear response derived from the sampled absorption through the
    /// numerical Kramers-Kronig transform. The grid must be uniform.
    pub fn response(&self) -> Result<ComplexResponse> {
        ComplexResponse::from_absorption(&self.detunings, &self.alpha)
    }

    /// The same spectrum with every sample above the thermal level clipped
    /// to it, that is, without anti-holes.
    pub fn holes_only(&self) -> Self {
        Self {
            alpha: self
                .alpha
                .iter()
                .map(|a| a.min(self.alpha_thermal))
                .collect(),
            ..self.clone()
        }
    }
}

/// `α(ν) = α_th · Σ (n_src / 0.5) Λ(ν − ν_line) / Σ Λ(ν − ν_line)`, summed over
/// every class and line. The denominator is the same sum for a thermal
/// ensemble, so an unpumped ensemble returns `alpha_thermal` exactly. Probe
/// lines have the unbroadened homogeneous width.
pub fn absorption_spectrum(
    ensemble: &IonEnsemble,
    levels: &LevelSystem,
    probe: &[f64],
    alpha_thermal: f64,
) -> Result<AbsorptionSpectrum> {
    let site = Site::new(MODULE, "absorption_spectrum");
    levels.validate()?;
    if probe.is_empty() || probe.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::grid(
            site,
            "probe grid must be non-empty and strictly increasing",
        ));
    }
    if !(alpha_thermal >= 0.0 && alpha_thermal.is_finite()) {
        return Err(Error::invalid(
            site,
            format!("thermal absorption must be ≥ 0, got {alpha_thermal}"),
        ));
    }
    if ensemble.spacing > 0.5 * levels.gamma_hom {
        return Err(Error::grid(
            site,
            format!(
                "class spacing {:e} rad/s does not resolve the homogeneous width {:e} rad/s",
                ensemble.spacing, levels.gamma_hom
            ),
        ));
    }
    // half a class spacing keeps the window edges off the class grid, so a
    // probe and its mirror image always sum over mirrored class sets
    let reach = PROBE_WINDOW_FWHMS * levels.gamma_hom + 0.5 * ensemble.spacing;
    let offsets = levels.offsets();
    let (lo, hi) = (
        ensemble.first(),
        ensemble.first() + (ensemble.len() - 1) as f64 * ensemble.spacing,
    );
    for o in offsets {
        if probe[0] - o - reach < lo - ensemble.spacing
            || probe[probe.len() - 1] - o + reach > hi + ensemble.spacing
        {
            return Err(Error::grid(
                site,
                "ion classes do not cover every line the probe grid reaches",
            ));
        }
    }
    let alpha = probe
        .iter()
        .map(|&nu| {
            let (mut num, mut den) = (0.0, 0.0);
            for (j, o) in offsets.iter().enumerate() {
                let g = Transition::ALL[j].ground;
                let centre = nu - o;
                for c in &ensemble.classes[ensemble.index_range(centre - reach, centre + reach)] {
                    let l = lorentzian(nu - (c.delta + o), levels.gamma_hom);
                    num += 2.0 * c.population(g) * l;
                    den += l;
                }
            }
            alpha_thermal * num / den
        })
        .collect();
    Ok(AbsorptionSpectrum {
        detunings: probe.to_vec(),
        alpha,
        alpha_thermal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FeatureKind {
    Hole,
    AntiHole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feature {
    pub kind: FeatureKind,
    pub detuning: f64,
    pub alpha: f64,
}

/// Strict local minima below and maxima above the thermal level, ignoring
/// those that stay within `rel_threshold · alpha_thermal` of it.
pub fn spectral_features(spectrum: &AbsorptionSpectrum, rel_threshold: f64) -> Vec<Feature> {
    let a = &spectrum.alpha;
    let floor = rel_threshold * spectrum.alpha_thermal;
    let mut out = Vec::new();
    for i in 1..a.len().saturating_sub(1) {
        let dev = a[i] - spectrum.alpha_thermal;
        let kind = if a[i] < a[i - 1] && a[i] <= a[i + 1] && dev < -floor {
            FeatureKind::Hole
        } else if a[i] > a[i - 1] && a[i] >= a[i + 1] && dev > floor {
            FeatureKind::AntiHole
        } else {
            continue;
        };
        out.push(Feature {
            kind,
            detuning: spectrum.detunings[i],
            alpha: a[i],
        });
    }
    out
}

/// Band `inner ≤ |ν| ≤ outer` around ν₀ in which the background is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundWindow {
    pub inner: f64,
    pub outer: f64,
}

/// Ratio of mean background absorption after and before a repump, averaged
/// over `window`. The window must clear the hole: its inner edge has to lie
/// at least three half-widths of any hole found in either spectrum away
/// from ν₀.
pub fn enhancement_gain(
    before: &AbsorptionSpectrum,
    after: &AbsorptionSpectrum,
    window: BackgroundWindow,
) -> Result<f64> {
    let site = Site::new(MODULE, "enhancement_gain");
    if before.detunings != after.detunings {
        return Err(Error::grid(
            site,
            "spectra are sampled on different probe grids",
        ));
    }
    if !(window.inner >= 0.0 && window.outer > window.inner) {
        return Err(Error::invalid(
            site,
            "background window needs 0 ≤ inner < outer",
        ));
    }
    let band: Vec<usize> = (0..before.len())
        .filter(|&i| (window.inner..=window.outer).contains(&before.detunings[i].abs()))
        .collect();
    if band.is_empty() {
        return Err(Error::invalid(
            site,
            "no probe samples inside the background window",
        ));
    }
    let mean =
        |s: &AbsorptionSpectrum| band.iter().map(|&i| s.alpha[i]).sum::<f64>() / band.len() as f64;
    let (b, a) = (mean(before), mean(after));
    for (s, level) in [(before, b), (after, a)] {
        if let Some(hwhm) = hole_half_width(s, window.outer, level) {
            if window.inner < 3.0 * hwhm {
                return Err(Error::invalid(
                    site,
                    format!(
                        "window inner edge {:e} rad/s overlaps the hole (half width {:e} rad/s)",
                        window.inner, hwhm
                    ),
                ));
            }
        }
    }
    if b <= 0.0 {
        return Err(Error::domain(
            site,
            "background absorption before the repump is zero",
        ));
    }
    Ok(a / b)
}

/// Half width of the dip around the deepest point with `|ν| ≤ reach`,
/// measured at half depth below `baseline`. `None` when there is no dip.
fn hole_half_width(s: &AbsorptionSpectrum, reach: f64, baseline: f64) -> Option<f64> {
    let (k, &amin) = s
        .alpha
        .iter()
        .enumerate()
        .filter(|(i, _)| s.detunings[*i].abs() <= reach)
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    if amin >= baseline {
        return None;
    }
    let half = 0.5 * (baseline + amin);
    let nu = &s.detunings;
    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = k;
        for i in range {
            if s.alpha[i] >= half {
                let t = (half - s.alpha[prev]) / (s.alpha[i] - s.alpha[prev]);
                return Some((nu[prev] + t * (nu[i] - nu[prev]) - nu[k]).abs());
            }
            prev = i;
        }
        None
    };
    let right = cross(&mut (k + 1..s.len()));
    let left = cross(&mut (0..k).rev());
    match (left, right) {
        (Some(l), Some(r)) => Some(0.5 * (l + r)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => Some(reach),
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::tm_yag;
    use super::super::{simulate_pump_sequence, PumpOptions, PumpSegment, PumpSequence};
    use super::*;
    use crate::units::hz_to_rad;

    fn probe(half_mhz: f64, step_khz: f64) -> Vec<f64> {
        let n = (half_mhz * 1e3 / step_khz).round() as i64;
        (-n..=n)
            .map(|k| hz_to_rad(k as f64 * step_khz * 1e3))
            .collect()
    }

    fn ensemble_for(levels: &LevelSystem, grid: &[f64]) -> IonEnsemble {
        IonEnsemble::covering(
            levels,
            grid[0],
            grid[grid.len() - 1],
            PROBE_WINDOW_FWHMS * levels.gamma_hom,
        )
        .unwrap()
    }

    #[test]
    fn thermal_ensemble_is_flat() {
        let l = tm_yag();
        let grid = probe(2.0, 100.0);
        let e = ensemble_for(&l, &grid);
        let s = absorption_spectrum(&e, &l, &grid, 500.0).unwrap();
        for a in &s.alpha {
            assert!((a - 500.0).abs() < 1e-9);
        }
        assert!(spectral_features(&s, 1e-3).is_empty());
    }

    #[test]
    fn uncovered_probe_is_rejected() {
        let l = tm_yag();
        let grid = probe(2.0, 100.0);
        let e = IonEnsemble::covering(&l, -hz_to_rad(0.1e6), hz_to_rad(0.1e6), 0.0).unwrap();
        assert!(matches!(
            absorption_spectrum(&e, &l, &grid, 500.0),
            Err(Error::Grid { .. })
        ));
    }

    #[test]
    fn no_repump_gives_unit_gain_and_window_must_clear_hole() {
        let l = tm_yag();
        let grid = probe(3.0, 10.0);
        let e = ensemble_for(&l, &grid);
        let seq = PumpSequence::new(vec![PumpSegment::fixed(0, 0.0, 5e-3, 2e3)]);
        let burnt = simulate_pump_sequence(&seq, &l, &e, PumpOptions::default()).unwrap();
        let s = absorption_spectrum(&burnt, &l, &grid, 500.0).unwrap();
        let w = BackgroundWindow {
            inner: hz_to_rad(1e6),
            outer: hz_to_rad(2e6),
        };
        assert!((enhancement_gain(&s, &s, w).unwrap() - 1.0).abs() < 1e-15);
        let bad = BackgroundWindow {
            inner: 0.0,
            outer: hz_to_rad(2e6),
        };
        assert!(enhancement_gain(&s, &s, bad).is_err());
    }

    #[test]
    fn holes_only_clips_anti_holes() {
        let s = AbsorptionSpectrum {
            detunings: vec![0.0, 1.0, 2.0],
            alpha: vec![1.0, 7.0, 4.0],
            alpha_thermal: 5.0,
        };
        assert_eq!(s.holes_only().alpha, vec![1.0, 5.0, 4.0]);
    }
}
