use serde::{Deserialize, Serialize};

use super::{lorentzian, IonEnsemble, LevelSystem, MODULE};
use crate::error::{Error, Result, Site};
use crate::exec::Execution;

/// One laser setting on one channel: constant frequency when `span == 0`,
/// otherwise a linear sweep from `center − span/2` to `center + span/2`. A
/// negative span sweeps downwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSegment {
    pub channel: u32,
    /// Offset from ν₀ (rad/s).
    pub center: f64,
    /// Signed chirp span (rad/s).
    pub span: f64,
    pub duration: f64,
    /// Peak pump rate (1/s) on a resonant line.
    pub rate: f64,
    /// Explicit start time (s). Segments without one follow the previous
    /// segment on the same channel.
    pub start: Option<f64>,
}

impl PumpSegment {
    pub fn fixed(channel: u32, center: f64, duration: f64, rate: f64) -> Self {
        Self {
            channel,
            center,
            span: 0.0,
            duration,
            rate,
            start: None,
        }
    }

    pub fn chirp(channel: u32, center: f64, span: f64, duration: f64, rate: f64) -> Self {
        Self {
            channel,
            center,
            span,
            duration,
            rate,
            start: None,
        }
    }

    pub fn at(mut self, start: f64) -> Self {
        self.start = Some(start);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PumpSequence {
    pub segments: Vec<PumpSegment>,
}

impl PumpSequence {
    pub fn new(segments: Vec<PumpSegment>) -> Self {
        Self { segments }
    }

    pub fn push(&mut self, segment: PumpSegment) -> &mut Self {
        self.segments.push(segment);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpOptions {
    /// Longest dwell on one frequency step of a chirp (s). Must not exceed
    /// `t1_opt / 10`; defaults to that bound.
    pub max_dwell: Option<f64>,
    /// Burn kernels are cut off this many FWHM from line centre, where the
    /// unit-peak Lorentzian has fallen to about `1/(4·K²)`. Infinite by
    /// default: a hard cut leaves small steps in the spectrum that show up as
    /// spurious extrema. Finite values trade that for speed on long chirps.
    pub window_fwhms: f64,
    pub exec: Execution,
}

impl Default for PumpOptions {
    fn default() -> Self {
        Self {
            max_dwell: None,
            window_fwhms: f64::INFINITY,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    t0: f64,
    t1: f64,
    freq: f64,
    rate: f64,
    width: f64,
}

fn schedule(
    seq: &PumpSequence,
    levels: &LevelSystem,
    max_dwell: f64,
) -> Result<(Vec<Vec<Step>>, f64)> {
    let site = Site::new(MODULE, "simulate_pump_sequence");
    let mut channels: Vec<u32> = seq.segments.iter().map(|s| s.channel).collect();
    channels.sort_unstable();
    channels.dedup();
    let mut out = vec![Vec::new(); channels.len()];
    let mut cursor = vec![0.0f64; channels.len()];
    let mut end = 0.0f64;
    for (i, s) in seq.segments.iter().enumerate() {
        let ok = s.center.is_finite()
            && s.span.is_finite()
            && s.duration >= 0.0
            && s.duration.is_finite()
            && s.rate >= 0.0
            && s.rate.is_finite()
            && s.start.is_none_or(|t| t >= 0.0 && t.is_finite());
        if !ok {
            return Err(Error::invalid(
                site,
                format!("segment {i} has a negative or non-finite field"),
            ));
        }
        let c = channels.binary_search(&s.channel).unwrap();
        let t0 = s.start.unwrap_or(cursor[c]);
        if t0 < cursor[c] - 1e-12 * cursor[c].max(1e-9) {
            return Err(Error::invalid(
                site,
                format!(
                    "segment {i} starts at {t0} s while channel {} is busy until {} s",
                    s.channel, cursor[c]
                ),
            ));
        }
        cursor[c] = t0 + s.duration;
        end = end.max(cursor[c]);
        if s.duration == 0.0 || s.rate == 0.0 {
            continue;
        }
        let width = levels.burn_width(s.rate);
        let n = if s.span != 0.0 {
            let by_width = (s.span.abs() / (0.25 * width)).ceil();
            let by_time = (s.duration / max_dwell).ceil();
            by_width.max(by_time).max(1.0) as usize
        } else {
            1
        };
        let dwell = s.duration / n as f64;
        for j in 0..n {
            let freq = if n == 1 {
                s.center
            } else {
                s.center - 0.5 * s.span + (j as f64 + 0.5) * s.span / n as f64
            };
            let a = t0 + j as f64 * dwell;
            let b = if j + 1 == n {
                t0 + s.duration
            } else {
                a + dwell
            };
            out[c].push(Step {
                t0: a,
                t1: b,
                freq,
                rate: s.rate,
                width,
            });
        }
    }
    Ok((out, end))
}

#[inline]
fn relax(n1: f64, t: f64, hf: f64) -> f64 {
    if hf == 0.0 || t <= 0.0 {
        n1
    } else {
        0.5 + (n1 - 0.5) * (-hf * t).exp()
    }
}

/// Applies `seq` to `ensemble` and returns the pumped ensemble.
///
/// Between frequency changes every class obeys a linear two-state balance
/// `dn1/dt = −b·S₁·n1 + b·S₂·n2 − (n1 − 1/2)/T_hf`, where `S_g` sums the
/// Lorentzian-weighted pump rates on lines starting from sublevel `g`. The
/// balance is integrated exactly over each such interval, so the only
/// discretisation is the staircase approximation of chirps.
pub fn simulate_pump_sequence(
    seq: &PumpSequence,
    levels: &LevelSystem,
    ensemble: &IonEnsemble,
    options: PumpOptions,
) -> Result<IonEnsemble> {
    let site = Site::new(MODULE, "simulate_pump_sequence");
    levels.validate()?;
    let limit = levels.t1_opt / 10.0;
    let max_dwell = options.max_dwell.unwrap_or(limit);
    if !(max_dwell > 0.0) {
        return Err(Error::invalid(
            site,
            "the chirp dwell bound must be positive",
        ));
    }
    if max_dwell > limit {
        return Err(Error::StepTooCoarse {
            site,
            dt: max_dwell,
            required: limit,
        });
    }
    if !(options.window_fwhms >= 5.0) {
        return Err(Error::invalid(
            site,
            "burn kernels must extend at least 5 FWHM",
        ));
    }
    let (channels, end) = schedule(seq, levels, max_dwell)?;

    let mut out = ensemble.clone();
    let hf = levels.hyperfine_rate();
    let b = levels.branching;
    let offsets = levels.offsets();
    let mut last = vec![0.0f64; out.len()];

    let mut cuts: Vec<f64> = channels
        .iter()
        .flatten()
        .flat_map(|s| [s.t0, s.t1])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut cursor = vec![0usize; channels.len()];
    let mut active: Vec<Step> = Vec::with_capacity(channels.len());
    let mut ranges: Vec<std::ops::Range<usize>> = Vec::new();
    let mut indices: Vec<usize> = Vec::new();

    for w in cuts.windows(2) {
        let (a, bnd) = (w[0], w[1]);
        active.clear();
        for (c, steps) in channels.iter().enumerate() {
            while cursor[c] < steps.len() && steps[cursor[c]].t1 <= a {
                cursor[c] += 1;
            }
            if let Some(s) = steps.get(cursor[c]) {
                if s.t0 <= a && s.t1 >= bnd {
                    active.push(*s);
                }
            }
        }
        if active.is_empty() {
            continue;
        }
        ranges.clear();
        for s in &active {
            let reach = options.window_fwhms * s.width;
            for o in offsets {
                let centre = s.freq - o;
                ranges.push(out.index_range(centre - reach, centre + reach));
            }
        }
        ranges.sort_by_key(|r| r.start);
        indices.clear();
        let mut hi = 0usize;
        for r in &ranges {
            let from = r.start.max(hi);
            indices.extend(from..r.end.max(from));
            hi = hi.max(r.end);
        }
        let dt = bnd - a;
        let classes = &out.classes;
        let last_ref = &last;
        let active_ref = &active;
        let updated = options.exec.map(&indices, |&k| {
            let cls = &classes[k];
            let n1 = relax(cls.n1, a - last_ref[k], hf);
            let (mut s1, mut s2) = (0.0, 0.0);
            for s in active_ref {
                let reach = options.window_fwhms * s.width;
                for (j, o) in offsets.iter().enumerate() {
                    let x = s.freq - (cls.delta + o);
                    if x.abs() <= reach {
                        let r = s.rate * lorentzian(x, s.width);
                        if j < 2 {
                            s1 += r;
                        } else {
                            s2 += r;
                        }
                    }
                }
            }
            let k_tot = b * (s1 + s2) + hf;
            if k_tot == 0.0 {
                return n1;
            }
            let ss = (b * s2 + 0.5 * hf) / k_tot;
            (ss + (n1 - ss) * (-k_tot * dt).exp()).clamp(0.0, 1.0)
        });
        for (&k, n1) in indices.iter().zip(updated) {
            out.classes[k].n1 = n1;
            out.classes[k].n2 = 1.0 - n1;
            last[k] = bnd;
        }
    }
    for (c, t) in out.classes.iter_mut().zip(&last) {
        c.n1 = relax(c.n1, end - t, hf);
        c.n2 = 1.0 - c.n1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::tm_yag;
    use super::*;
    use crate::units::hz_to_rad;

    fn small_ensemble(levels: &LevelSystem) -> IonEnsemble {
        IonEnsemble::covering(levels, -hz_to_rad(0.5e6), hz_to_rad(0.5e6), 0.0).unwrap()
    }

    // keeps the far lines of a class out of the kernel, so only the resonant
    // line pumps and the two-state closed forms hold exactly
    fn single_line() -> PumpOptions {
        PumpOptions {
            window_fwhms: 50.0,
            ..Default::default()
        }
    }

    fn class_at(e: &IonEnsemble, delta: f64) -> usize {
        e.classes
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1.delta - delta)
                    .abs()
                    .total_cmp(&(b.1.delta - delta).abs())
            })
            .unwrap()
            .0
    }

    #[test]
    fn empty_and_zero_duration_sequences_are_identity() {
        let l = tm_yag();
        let e = small_ensemble(&l);
        let out = simulate_pump_sequence(&PumpSequence::default(), &l, &e, PumpOptions::default())
            .unwrap();
        assert_eq!(out, e);
        let seq = PumpSequence::new(vec![PumpSegment::fixed(0, 0.0, 0.0, 1e4)]);
        let out = simulate_pump_sequence(&seq, &l, &e, PumpOptions::default()).unwrap();
        assert_eq!(out, e);
    }

    #[test]
    fn long_burn_saturates_resonant_class() {
        let l = tm_yag();
        let e = small_ensemble(&l);
        let seq = PumpSequence::new(vec![PumpSegment::fixed(0, 0.0, 0.1, 1e4)]);
        let out = simulate_pump_sequence(&seq, &l, &e, single_line()).unwrap();
        let c = out.classes[class_at(&out, 0.0)];
        // closed-form balance: b·R·n1 = (n2 − n1)/(2·T_hf) at steady state
        let (b, r, hf) = (l.branching, 1e4, 1.0 / l.t_hyperfine);
        let ss = 0.5 * hf / (b * r + hf);
        assert!((c.n1 - ss).abs() < 1e-9, "{} vs {}", c.n1, ss);
        assert!((c.n1 + c.n2 - 1.0).abs() < 1e-15);
        // the g₂-resonant partner is pushed the other way
        let p = out.classes[class_at(&out, l.delta_g)];
        assert!(p.n1 > 0.99);
    }

    #[test]
    fn exact_balance_matches_closed_form_during_transient() {
        let l = tm_yag();
        let e = small_ensemble(&l);
        let (t, r) = (2e-4, 3e3);
        let seq = PumpSequence::new(vec![PumpSegment::fixed(0, 0.0, t, r)]);
        let out = simulate_pump_sequence(&seq, &l, &e, single_line()).unwrap();
        let k = l.branching * r + 1.0 / l.t_hyperfine;
        let ss = 0.5 / l.t_hyperfine / k;
        let want = ss + (0.5 - ss) * (-k * t).exp();
        assert!((out.classes[class_at(&out, 0.0)].n1 - want).abs() < 1e-12);
    }

    #[test]
    fn overlapping_segments_on_one_channel_are_rejected() {
        let l = tm_yag();
        let e = small_ensemble(&l);
        let seq = PumpSequence::new(vec![
            PumpSegment::fixed(0, 0.0, 1e-3, 1e3),
            PumpSegment::fixed(0, 1.0, 1e-3, 1e3).at(0.5e-3),
        ]);
        assert!(matches!(
            simulate_pump_sequence(&seq, &l, &e, PumpOptions::default()),
            Err(Error::InvalidInput { .. })
        ));
        // the same timing on two channels is fine
        let seq = PumpSequence::new(vec![
            PumpSegment::fixed(0, 0.0, 1e-3, 1e3),
            PumpSegment::fixed(1, 1.0, 1e-3, 1e3).at(0.5e-3),
        ]);
        assert!(simulate_pump_sequence(&seq, &l, &e, PumpOptions::default()).is_ok());
    }

    #[test]
    fn coarse_dwell_is_rejected() {
        let l = tm_yag();
        let e = small_ensemble(&l);
        let opts = PumpOptions {
            max_dwell: Some(l.t1_opt),
            ..Default::default()
        };
        assert!(matches!(
            simulate_pump_sequence(&PumpSequence::default(), &l, &e, opts),
            Err(Error::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn execution_modes_agree_bitwise() {
        let l = tm_yag();
        let e = small_ensemble(&l);
        let seq = PumpSequence::new(vec![
            PumpSegment::fixed(0, 0.0, 1e-3, 2e3),
            PumpSegment::chirp(1, l.delta_g, hz_to_rad(0.4e6), 1e-3, 2e3),
        ]);
        let a = simulate_pump_sequence(
            &seq,
            &l,
            &e,
            PumpOptions {
                exec: Execution::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        let b = simulate_pump_sequence(
            &seq,
            &l,
            &e,
            PumpOptions {
                exec: Execution::Parallel,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
