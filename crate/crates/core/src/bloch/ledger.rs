use serde::Serialize;

use super::time_domain::{SpatialSnapshot, TdRun};
use super::MODULE;
use crate::error::{Error, Result, Site};
use crate::medium::Medium;
use crate::propagation::group_velocity;
use crate::pulse::Pulse;
use crate::SPEED_OF_LIGHT;

/// The pulse counts as inside the sample when at most this fraction of the
/// input energy is still outside.
pub const CONTAINMENT: f64 = 0.01;

/// Energy bookkeeping in units of `∫|Ω|² dz`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    /// Field energy inside the sample.
    pub w_em_in: Vec<f64>,
    /// Energy held by the atoms.
    pub w_at: Vec<f64>,
    /// Field energy that has left through the exit face.
    pub w_out: Vec<f64>,
    /// Field energy that has not reached the entrance face yet.
    pub w_pending: Vec<f64>,
    pub w_total: Vec<f64>,
    /// `c ∫ |Ω(0, τ)|² dτ`, the energy of the incoming pulse.
    pub input_energy: f64,
    /// Largest `|W_total − input|` over the run, relative to the input.
    pub drift: f64,
    /// Snapshot with the least energy outside the sample, when that is at
    /// most [`CONTAINMENT`] of the input.
    pub contained_at: Option<usize>,
    /// `W_at / ((c/v_g − 1) W_em_in) − 1` at the contained instant.
    pub partition_residual: Option<f64>,
    /// `(W_em_in / input) / (v_g/c) − 1` at the contained instant.
    pub compression_residual: Option<f64>,
    /// `(U_em + U_at) v_g / (U_em c) − 1` at the field maximum of the
    /// contained instant.
    pub flux_residual: Option<f64>,
}

fn trapz(y: impl Iterator<Item = f64>, z: &[f64]) -> f64 {
    let y: Vec<f64> = y.collect();
    (1..z.len())
        .map(|i| 0.5 * (z[i] - z[i - 1]) * (y[i] + y[i - 1]))
        .sum()
}

/// `c ∫_{τ ≤ t} |Ω|² dτ` for the uniform record `p`, with trapezoids and a
/// linear fraction of the last interval.
fn cumulative_flux(p: &Pulse, t: f64) -> f64 {
    let it = p.intensity();
    let x = (t - p.t0) / p.dt;
    if x <= 0.0 {
        return 0.0;
    }
    let full = (x.floor() as usize).min(it.len() - 1);
    let mut acc: f64 = (1..=full).map(|k| 0.5 * p.dt * (it[k - 1] + it[k])).sum();
    if full + 1 < it.len() {
        let f = x - full as f64;
        let mid = it[full] + f * (it[full + 1] - it[full]);
        acc += 0.5 * f * p.dt * (it[full] + mid);
    }
    SPEED_OF_LIGHT * acc
}

/// Books the pulse energy at every snapshot of a time-domain run.
pub fn energy_ledger(run: &TdRun, medium: &Medium) -> Result<EnergyLedger> {
    ledger_from_parts(&run.snapshots, &run.input, &run.result.transmitted, medium)
}

/// [`energy_ledger`] on explicit inputs: spatial snapshots, the field at the
/// entrance and the field at the exit face.
pub fn ledger_from_parts(
    snapshots: &[SpatialSnapshot],
    input: &Pulse,
    output: &Pulse,
    medium: &Medium,
) -> Result<EnergyLedger> {
    let site = Site::new(MODULE, "energy_ledger");
    if snapshots.is_empty() {
        return Err(Error::invalid(site, "no snapshots to book"));
    }
    let total_in = cumulative_flux(input, f64::INFINITY);
    if total_in == 0.0 {
        return Err(Error::invalid(site, "input pulse carries no energy"));
    }
    let exit_delay = medium.length / SPEED_OF_LIGHT;
    let mut l = EnergyLedger {
        times: Vec::new(),
        w_em_in: Vec::new(),
        w_at: Vec::new(),
        w_out: Vec::new(),
        w_pending: Vec::new(),
        w_total: Vec::new(),
        input_energy: total_in,
        drift: 0.0,
        contained_at: None,
        partition_residual: None,
        compression_residual: None,
        flux_residual: None,
    };
    for s in snapshots {
        let em = trapz(s.field.iter().map(|c| c.norm_sqr()), &s.z);
        let at = trapz(s.atomic_density.iter().cloned(), &s.z);
        let out = cumulative_flux(output, s.t - exit_delay);
        let pending = total_in - cumulative_flux(input, s.t);
        l.times.push(s.t);
        l.w_em_in.push(em);
        l.w_at.push(at);
        l.w_out.push(out);
        l.w_pending.push(pending);
        l.w_total.push(em + at + out + pending);
    }
    l.drift = l
        .w_total
        .iter()
        .map(|w| (w - total_in).abs() / total_in)
        .fold(0.0, f64::max);
    let outside = |k: usize| (l.w_out[k] + l.w_pending[k]) / total_in;
    let best = (0..l.times.len())
        .min_by(|&a, &b| outside(a).total_cmp(&outside(b)))
        .unwrap();
    if outside(best) <= CONTAINMENT && medium.alpha0 > 0.0 {
        l.contained_at = Some(best);
        let depth_alpha = medium.hole.depth * medium.alpha0;
        let vg = group_velocity(depth_alpha, medium.hole.width_fwhm)?;
        let slow = SPEED_OF_LIGHT / vg - 1.0;
        l.partition_residual = Some(l.w_at[best] / (slow * l.w_em_in[best]) - 1.0);
        l.compression_residual = Some(l.w_em_in[best] / total_in / (vg / SPEED_OF_LIGHT) - 1.0);
        let s = &snapshots[best];
        let (k, _) = s
            .field
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        let u_em = s.field[k].norm_sqr();
        l.flux_residual = Some((u_em + s.atomic_density[k]) * vg / (u_em * SPEED_OF_LIGHT) - 1.0);
    }
    Ok(l)
}
