use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::class::LinearStep;
use super::grid::DetuningGrid;
use super::MODULE;
use crate::analysis::delay::peak_time;
use crate::error::{Error, Result, Site};
use crate::exec::Execution;
use crate::medium::Medium;
use crate::propagation::PropagationResult;
use crate::pulse::Pulse;
use crate::{C64, SPEED_OF_LIGHT};

/// Nodes handled by one work item. Fixed so that the reduction order, and
/// with it every result bit, is independent of the thread count.
const NODES_PER_CHUNK: usize = 32;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TdOptions {
    /// Number of `z` slices. `None` picks the smallest admissible count.
    pub z_steps: Option<usize>,
    /// Replaces the default resolution rule `z_steps ≥ 100·α₀L/(2π)` by
    /// `α₀·dz ≤ max_alpha_dz`. Useful at very large optical depth, where the
    /// pulse spectrum sits deep inside the hole and the default rule is far
    /// stricter than accuracy needs.
    pub max_alpha_dz: Option<f64>,
    /// Positions (m) at which the full time series is kept.
    pub stations: Vec<f64>,
    /// Laboratory times (s) at which the spatial profile is kept.
    pub snapshot_times: Vec<f64>,
    pub exec: Execution,
}

/// Field time series at one position.
#[derive(Debug, Clone, Serialize)]
pub struct Station {
    pub z: f64,
    pub field: Pulse,
}

/// Field and atomic energy density along the sample at one instant.
#[derive(Debug, Clone, Serialize)]
pub struct SpatialSnapshot {
    pub t: f64,
    pub z: Vec<f64>,
    pub field: Vec<C64>,
    /// `(2cα₀/π) Σ_j w_j σ₂₂,j`, in the units of `|Ω|²`.
    pub atomic_density: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TdRun {
    pub result: PropagationResult,
    pub input: Pulse,
    pub z_steps: usize,
    pub stations: Vec<Station>,
    pub snapshots: Vec<SpatialSnapshot>,
}

/// Smallest slice count allowed for `medium`.
pub fn minimum_z_steps(medium: &Medium, max_alpha_dz: Option<f64>) -> usize {
    let od = medium.alpha0 * medium.length;
    let n = match max_alpha_dz {
        Some(x) => (od / x).ceil(),
        None => (100.0 * od / TAU).ceil(),
    };
    (n as usize).max(16)
}

struct Polarizer<'a> {
    steps: Vec<LinearStep>,
    weights: &'a [f64],
    exec: Execution,
}

impl Polarizer<'_> {
    /// `Σ_j w_j σ_j(τ)` for the weak-field response to `omega`.
    fn apply(&self, omega: &[C64]) -> Vec<C64> {
        let n = omega.len();
        let chunks: Vec<(usize, usize)> = (0..self.steps.len())
            .step_by(NODES_PER_CHUNK)
            .map(|a| (a, (a + NODES_PER_CHUNK).min(self.steps.len())))
            .collect();
        let partial = self.exec.map(&chunks, |&(a, b)| {
            let mut acc = vec![C64::new(0.0, 0.0); n];
            for j in a..b {
                let (s, w) = (self.steps[j], self.weights[j]);
                if w == 0.0 {
                    continue;
                }
                let mut sigma = s.c1 * omega[0];
                acc[0] += w * sigma;
                for k in 1..n {
                    sigma = s.apply(sigma, omega[k - 1], omega[k]);
                    acc[k] += w * sigma;
                }
            }
            acc
        });
        let mut total = vec![C64::new(0.0, 0.0); n];
        for p in partial {
            for (t, x) in total.iter_mut().zip(p) {
                *t += x;
            }
        }
        total
    }
}

/// Linear interpolation on a uniform grid; `before` and `after` fill the
/// outside.
fn sample<T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>>(
    v: &[T],
    t0: f64,
    dt: f64,
    t: f64,
    before: T,
    after: T,
) -> T {
    let x = (t - t0) / dt;
    if x < 0.0 {
        return before;
    }
    let k = x.floor() as usize;
    if k + 1 >= v.len() {
        return if k + 1 == v.len() && x == k as f64 {
            v[k]
        } else {
            after
        };
    }
    let f = x - k as f64;
    v[k] * (1.0 - f) + v[k + 1] * f
}

/// Weak-probe Maxwell-Bloch propagation through `medium`.
///
/// In the frame `τ = t − z/c` the envelope obeys
/// `∂Ω/∂z = i(α₀/π) Σ_j w_j σ_j(z, τ)`, which reproduces an amplitude
/// exponent of `−α₀/2` outside the hole. Each slice is advanced with Heun's
/// method; the class responses inside a slice are computed in parallel.
pub fn propagate_time_domain(
    pulse: &Pulse,
    medium: &Medium,
    grid: &DetuningGrid,
    options: &TdOptions,
) -> Result<TdRun> {
    let site = Site::new(MODULE, "propagate_time_domain");
    if pulse.len() < 2 || pulse.energy() == 0.0 {
        return Err(Error::invalid(
            site,
            "need a non-zero pulse with at least two samples",
        ));
    }
    if pulse.edge_ratio() > 1e-3 {
        return Err(Error::invalid(
            site,
            "pulse must vanish at both ends of the record",
        ));
    }
    let fwhm = pulse.fwhm();
    let required = (fwhm * 1.001 / 50.0).min(medium.t2 / 10.0);
    if pulse.dt > required {
        return Err(Error::StepTooCoarse {
            site,
            dt: pulse.dt,
            required,
        });
    }
    if grid.hole != medium.hole {
        return Err(Error::invalid(
            site,
            "detuning grid was built for a different hole",
        ));
    }
    if let Some(x) = options.max_alpha_dz {
        if !(x > 0.0) {
            return Err(Error::invalid(site, "max_alpha_dz must be > 0"));
        }
    }
    let min_steps = minimum_z_steps(medium, options.max_alpha_dz);
    let z_steps = options.z_steps.unwrap_or(min_steps);
    if z_steps < min_steps {
        return Err(Error::grid(
            site,
            format!("{z_steps} z steps do not resolve the absorption length, at least {min_steps} are needed"),
        ));
    }
    let dz = medium.length / z_steps as f64;
    // Heun's amplification factor 1 + x + x²/2 reaches the edge of the unit
    // disc at x = −2 for fully absorbed components, x = −α₀dz/2; keep a
    // factor two of margin for the complex exponents near the hole edge
    if medium.alpha0 * dz > 2.0 {
        return Err(Error::grid(
            site,
            format!(
                "α₀·dz = {} exceeds the stability bound 2",
                medium.alpha0 * dz
            ),
        ));
    }

    let pol = Polarizer {
        steps: grid
            .nodes
            .iter()
            .map(|&d| LinearStep::new(d, medium.t2, pulse.dt))
            .collect(),
        weights: &grid.weights,
        exec: options.exec,
    };
    let coupling = C64::new(0.0, medium.alpha0 / PI);
    let atom_scale = 2.0 * SPEED_OF_LIGHT * medium.alpha0 / PI;
    let n = pulse.len();
    let (t0, dt) = (pulse.t0, pulse.dt);

    let station_slices: Vec<usize> = options
        .stations
        .iter()
        .map(|&z| ((z / dz).round().max(0.0) as usize).min(z_steps))
        .collect();
    let mut stations: Vec<Station> = Vec::new();
    let mut snapshots: Vec<SpatialSnapshot> = options
        .snapshot_times
        .iter()
        .map(|&t| SpatialSnapshot {
            t,
            z: Vec::with_capacity(z_steps + 1),
            field: Vec::with_capacity(z_steps + 1),
            atomic_density: Vec::with_capacity(z_steps + 1),
        })
        .collect();

    let mut omega = pulse.envelope.clone();
    let mut p = pol.apply(&omega);
    let mut density = vec![0.0; n];
    for slice in 0..=z_steps {
        let z = slice as f64 * dz;
        if !snapshots.is_empty() {
            density[0] = 0.0;
            let mut prev = atom_scale * (omega[0].conj() * p[0]).im;
            for k in 1..n {
                let cur = atom_scale * (omega[k].conj() * p[k]).im;
                density[k] = density[k - 1] + 0.5 * dt * (prev + cur);
                prev = cur;
            }
            for s in &mut snapshots {
                let tau = s.t - z / SPEED_OF_LIGHT;
                let zero = C64::new(0.0, 0.0);
                s.z.push(z);
                s.field.push(sample(&omega, t0, dt, tau, zero, zero));
                s.atomic_density
                    .push(sample(&density, t0, dt, tau, 0.0, density[n - 1]));
            }
        }
        for (i, _) in station_slices
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == slice)
        {
            stations.push(Station {
                z: options.stations[i],
                field: Pulse {
                    t0,
                    dt,
                    envelope: omega.clone(),
                },
            });
        }
        if slice == z_steps {
            break;
        }
        let predictor: Vec<C64> = omega
            .iter()
            .zip(&p)
            .map(|(o, q)| o + coupling * q * dz)
            .collect();
        let pp = pol.apply(&predictor);
        for ((o, q), r) in omega.iter_mut().zip(&p).zip(&pp) {
            *o += 0.5 * dz * coupling * (q + r);
        }
        if slice + 1 < z_steps || !snapshots.is_empty() {
            p = pol.apply(&omega);
        }
    }
    stations.sort_by(|a, b| a.z.total_cmp(&b.z));

    let transmitted = Pulse {
        t0,
        dt,
        envelope: omega,
    };
    let result = PropagationResult {
        delay_peak: peak_time(&transmitted) - peak_time(pulse),
        delay_centroid: transmitted.centroid() - pulse.centroid(),
        energy_transmission: transmitted.energy() / pulse.energy(),
        broadening: transmitted.fwhm() / fwhm,
        transmitted,
    };
    Ok(TdRun {
        result,
        input: pulse.clone(),
        z_steps,
        stations,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::super::grid::{build_detuning_grid, GridConfig};
    use super::*;
    use crate::medium::SpectralHole;
    use crate::pulse::{make_gaussian_pulse, TimeGrid};

    fn pulse() -> Pulse {
        make_gaussian_pulse(5.37e-6, 1.0, TimeGrid::centered(5.37e-6, 50, 12.0)).unwrap()
    }

    #[test]
    fn transparent_medium_is_identity() {
        let hole = SpectralHole::centered(TAU * 860e3).unwrap();
        let m = Medium::ideal(0.0, 5e-3, hole).unwrap();
        let g = build_detuning_grid(&hole, &GridConfig::coarse()).unwrap();
        let run = propagate_time_domain(&pulse(), &m, &g, &TdOptions::default()).unwrap();
        for (a, b) in run
            .result
            .transmitted
            .envelope
            .iter()
            .zip(&pulse().envelope)
        {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn under_resolved_slices_are_rejected() {
        let hole = SpectralHole::centered(TAU * 860e3).unwrap();
        let m = Medium::ideal(850.0, 5e-3, hole).unwrap();
        let g = build_detuning_grid(&hole, &GridConfig::coarse()).unwrap();
        let opts = TdOptions {
            z_steps: Some(10),
            ..Default::default()
        };
        assert!(matches!(
            propagate_time_domain(&pulse(), &m, &g, &opts),
            Err(Error::Grid { .. })
        ));
    }

    #[test]
    fn execution_modes_agree_bitwise() {
        let hole = SpectralHole::centered(TAU * 860e3).unwrap();
        let m = Medium::ideal(850.0, 2e-3, hole).unwrap();
        let g = build_detuning_grid(&hole, &GridConfig::coarse()).unwrap();
        let seq = TdOptions {
            exec: Execution::Sequential,
            ..Default::default()
        };
        let par = TdOptions {
            exec: Execution::Parallel,
            ..Default::default()
        };
        let a = propagate_time_domain(&pulse(), &m, &g, &seq).unwrap();
        let b = propagate_time_domain(&pulse(), &m, &g, &par).unwrap();
        assert_eq!(a.result.transmitted.envelope, b.result.transmitted.envelope);
    }
}
