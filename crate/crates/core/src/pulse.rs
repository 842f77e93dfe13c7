//! Signal pulses as complex Rabi-frequency envelopes on a uniform time grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Site};
use crate::C64;

const MODULE: &str = "linear-propagation";

/// Uniform sampling of a time record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    /// Record of `record_fwhms · fwhm` centred on zero with `samples_per_fwhm`
    /// samples per FWHM.
    pub fn centered(fwhm: f64, samples_per_fwhm: usize, record_fwhms: f64) -> Self {
        let dt = fwhm / samples_per_fwhm as f64;
        let n = (record_fwhms * fwhm / dt).ceil() as usize + 1;
        Self {
            t0: -0.5 * (n - 1) as f64 * dt,
            dt,
            n,
        }
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.n.saturating_sub(1)) as f64
    }
}

/// Complex envelope `Ω(t)` (rad/s) sampled at `t0 + k·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub t0: f64,
    pub dt: f64,
    pub envelope: Vec<C64>,
}

impl Pulse {
    pub fn new(t0: f64, dt: f64, envelope: Vec<C64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(Error::invalid(
                Site::new(MODULE, "Pulse::new"),
                format!("bad time grid t0={t0}, dt={dt}"),
            ));
        }
        Ok(Self { t0, dt, envelope })
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            dt: self.dt,
            n: self.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.envelope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envelope.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.dt * k as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    pub fn same_grid(&self, other: &Pulse) -> bool {
        self.len() == other.len()
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t0 - other.t0).abs() <= 1e-9 * self.dt
    }

    /// Energy surrogate `Σ |Ω|² dt`.
    pub fn energy(&self) -> f64 {
        self.envelope.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dt
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.envelope.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.envelope.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Ratio of the larger record-edge amplitude to the peak amplitude.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.peak_amplitude();
        if peak == 0.0 || self.is_empty() {
            return 0.0;
        }
        self.envelope[0]
            .norm()
            .max(self.envelope[self.len() - 1].norm())
            / peak
    }

    /// Full width at half maximum of `|Ω|²`, with linear interpolation of the
    /// half-maximum crossings. Zero for an empty or all-zero pulse.
    pub fn fwhm(&self) -> f64 {
        fwhm_of(&self.intensity(), self.dt)
    }

    /// First moment of `|Ω|²`.
    pub fn centroid(&self) -> f64 {
        let w: f64 = self.envelope.iter().map(|c| c.norm_sqr()).sum();
        if w == 0.0 {
            return f64::NAN;
        }
        self.envelope
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() * self.time(k))
            .sum::<f64>()
            / w
    }

    /// Linear interpolation of the envelope; zero outside the record.
    pub fn value_at(&self, t: f64) -> C64 {
        let x = (t - self.t0) / self.dt;
        if x < 0.0 || x > (self.len().saturating_sub(1)) as f64 || self.is_empty() {
            return C64::new(0.0, 0.0);
        }
        let i = x.floor() as usize;
        if i + 1 >= self.len() {
            return self.envelope[self.len() - 1];
        }
        let f = x - i as f64;
        self.envelope[i] * (1.0 - f) + self.envelope[i + 1] * f
    }

    /// Same pulse delayed by `delay` on the same grid, interpolated.
    pub fn delayed(&self, delay: f64) -> Pulse {
        let env = self.times().map(|t| self.value_at(t - delay)).collect();
        Pulse {
            t0: self.t0,
            dt: self.dt,
            envelope: env,
        }
    }

    pub fn scaled(&self, a: C64) -> Pulse {
        Pulse {
            t0: self.t0,
            dt: self.dt,
            envelope: self.envelope.iter().map(|&c| c * a).collect(),
        }
    }

    /// `∂Ω/∂t` by central differences, one-sided at the record ends.
    pub fn derivative(&self) -> Vec<C64> {
        let n = self.len();
        if n < 2 {
            return vec![C64::new(0.0, 0.0); n];
        }
        let e = &self.envelope;
        (0..n)
            .map(|k| match k {
                0 => (e[1] - e[0]) / self.dt,
                k if k == n - 1 => (e[n - 1] - e[n - 2]) / self.dt,
                k => (e[k + 1] - e[k - 1]) / (2.0 * self.dt),
            })
            .collect()
    }
}

pub(crate) fn fwhm_of(intensity: &[f64], dt: f64) -> f64 {
    let Some((kmax, &peak)) = intensity
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
    else {
        return 0.0;
    };
    if peak <= 0.0 {
        return 0.0;
    }
    let half = 0.5 * peak;
    let mut left = 0.0;
    let mut k = kmax;
    while k > 0 && intensity[k - 1] >= half {
        k -= 1;
    }
    if k > 0 {
        let (a, b) = (intensity[k - 1], intensity[k]);
        left = (k - 1) as f64 + (half - a) / (b - a);
    }
    let mut right = (intensity.len() - 1) as f64;
    let mut k = kmax;
    while k + 1 < intensity.len() && intensity[k + 1] >= half {
        k += 1;
    }
    if k + 1 < intensity.len() {
        let (a, b) = (intensity[k], intensity[k + 1]);
        right = k as f64 + (a - half) / (a - b);
    }
    (right - left) * dt
}

/// Real Gaussian envelope with intensity FWHM `fwhm`, centred in the record.
///
/// `Ω(t) = peak · exp(−2 ln2 · (t − t_c)² / fwhm²)`, so `|Ω|²` has FWHM
/// `fwhm` and the time-bandwidth product of the intensity profiles is
/// `2 ln2 / π`.
pub fn make_gaussian_pulse(fwhm: f64, peak: f64, grid: TimeGrid) -> Result<Pulse> {
    let site = Site::new(MODULE, "make_gaussian_pulse");
    if !(fwhm > 0.0) {
        return Err(Error::invalid(site, "pulse FWHM must be > 0"));
    }
    if grid.n < 2 || grid.duration() < 8.0 * fwhm * (1.0 - 1e-9) {
        return Err(Error::invalid(
            site,
            format!(
                "record of {:e} s is shorter than 8 x FWHM ({:e} s)",
                grid.duration(),
                8.0 * fwhm
            ),
        ));
    }
    if grid.dt > fwhm / 50.0 * (1.0 + 1e-9) {
        return Err(Error::StepTooCoarse {
            site,
            dt: grid.dt,
            required: fwhm / 50.0,
        });
    }
    if peak == 0.0 || !peak.is_finite() {
        return Err(Error::invalid(
            site,
            "zero-energy pulse: peak Rabi frequency must be non-zero",
        ));
    }
    let centre = grid.t0 + 0.5 * grid.duration();
    let a = 2.0 * std::f64::consts::LN_2 / (fwhm * fwhm);
    let env = (0..grid.n)
        .map(|k| {
            let t = grid.t0 + grid.dt * k as f64 - centre;
            C64::new(peak * (-a * t * t).exp(), 0.0)
        })
        .collect();
    Pulse::new(grid.t0, grid.dt, env)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig5_pulse() -> Pulse {
        make_gaussian_pulse(5.37e-6, 1.0, TimeGrid::centered(5.37e-6, 64, 8.0)).unwrap()
    }

    #[test]
    fn gaussian_integral_identity() {
        let p = make_gaussian_pulse(5.37e-6, 3.0, TimeGrid::centered(5.37e-6, 64, 10.0)).unwrap();
        let expected =
            9.0 * 5.37e-6 * (std::f64::consts::PI / (4.0 * std::f64::consts::LN_2)).sqrt();
        assert!((p.energy() / expected - 1.0).abs() < 1e-9);
        assert!((p.fwhm() / 5.37e-6 - 1.0).abs() < 1e-3);
        assert!(p.edge_ratio() < 1e-6);
        assert!(p.centroid().abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_requests() {
        let g = TimeGrid::centered(5.37e-6, 64, 8.0);
        assert!(make_gaussian_pulse(5.37e-6, 0.0, g).is_err());
        assert!(make_gaussian_pulse(5.37e-6, 1.0, TimeGrid::centered(5.37e-6, 64, 4.0)).is_err());
        assert!(matches!(
            make_gaussian_pulse(5.37e-6, 1.0, TimeGrid::centered(5.37e-6, 20, 8.0)),
            Err(Error::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn interpolation_and_delay() {
        let p = fig5_pulse();
        let q = p.delayed(2e-6);
        assert!((q.centroid() - 2e-6).abs() < 1e-9);
        assert_eq!(p.value_at(p.t0 - 1.0), C64::new(0.0, 0.0));
    }
}
