use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use slowlight::analysis::{delay_scan, distortion_metrics, Distortion};
use slowlight::bloch::{
    build_detuning_grid, energy_ledger, propagate_time_domain, GridConfig, TdOptions, TdRun,
};
use slowlight::holeburn::{
    absorption_spectrum, enhancement_gain, simulate_pump_sequence, spectral_features,
    AbsorptionSpectrum, BackgroundWindow, FeatureKind, IonEnsemble, LevelSystem, PumpOptions,
    PumpSegment, PumpSequence, PROBE_WINDOW_FWHMS,
};
use slowlight::propagation::{expected_delay, propagate_medium, PropagationResult};
use slowlight::pulse::{make_gaussian_pulse, TimeGrid};
use slowlight::units::rad_to_hz;
use slowlight::{io, Execution, Medium, Pulse, SpectralHole};

use crate::config::{section, GridChoice, ScenarioConfig};

/// Relative shape residual above which a transmitted pulse counts as
/// distorted.
pub const DISTORTION_RESIDUAL: f64 = 0.15;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(slowlight::Error),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(e) => write!(f, "numerical error in {e}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<slowlight::Error> for Failure {
    fn from(e: slowlight::Error) -> Self {
        match e {
            // bad parameter values come straight from the scenario file
            slowlight::Error::InvalidInput { .. } => Failure::Config(e.to_string()),
            slowlight::Error::Io(_) | slowlight::Error::Csv(_) => Failure::Io(e.to_string()),
            _ => Failure::Numerical(e),
        }
    }
}

impl From<String> for Failure {
    fn from(m: String) -> Self {
        Failure::Config(m)
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// Where results go and how chatty to be.
pub struct Sink {
    pub dir: PathBuf,
    pub quiet: bool,
}

impl Sink {
    pub fn new(dir: PathBuf, quiet: bool) -> Outcome<Self> {
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, quiet })
    }

    pub fn child(&self, name: &str) -> Outcome<Self> {
        Self::new(self.dir.join(name), self.quiet)
    }

    fn create(&self, name: &str) -> Outcome<BufWriter<File>> {
        let path = self.dir.join(name);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
    }

    fn write(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> slowlight::Result<()>,
    ) -> Outcome<()> {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush().map_err(|e| Failure::Io(format!("{name}: {e}")))
    }

    fn rows<T: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = T>) -> Outcome<()> {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        for r in rows {
            w.serialize(r)
                .map_err(|e| Failure::Io(format!("{name}: {e}")))?;
        }
        w.flush().map_err(|e| Failure::Io(format!("{name}: {e}")))
    }

    fn summary(&self, command: &str, cfg: &ScenarioConfig, headline: Value) -> Outcome<Value> {
        let mut resolved = cfg.clone();
        resolved.output = Default::default();
        let doc = json!({
            "command": command,
            "name": cfg.name,
            "version": env!("CARGO_PKG_VERSION"),
            "config_sha256": resolved.digest(),
            "config": resolved,
            "headline": headline,
        });
        let text = serde_json::to_string_pretty(&doc).expect("summary serialises");
        let mut w = self.create("summary.json")?;
        writeln!(w, "{text}")
            .and_then(|_| w.flush())
            .map_err(|e| Failure::Io(format!("summary.json: {e}")))?;
        Ok(doc["headline"].clone())
    }

    pub fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }
}

fn levels_of(cfg: &ScenarioConfig, command: &str) -> Outcome<LevelSystem> {
    let l = section(&cfg.levels, "levels", command)?;
    let levels = LevelSystem {
        delta_g: l.ground_splitting.rad(),
        delta_e: l.excited_splitting.rad(),
        gamma_hom: l.homogeneous_width.rad(),
        branching: l.branching,
        t1_opt: l.optical_lifetime_s,
        t_hyperfine: l.hyperfine_lifetime_s,
        saturation_per_rate: l.saturation_per_rate_s,
    };
    levels.validate()?;
    Ok(levels)
}

fn medium_of(cfg: &ScenarioConfig, command: &str) -> Outcome<Medium> {
    let m = section(&cfg.medium, "medium", command)?;
    let hole = SpectralHole::new(m.hole_center.rad(), m.hole_width.rad(), m.hole_depth)?;
    let ideal = Medium::ideal(m.alpha_per_m, m.length_m, hole)?;
    Ok(Medium::new(
        ideal.alpha0,
        ideal.length,
        hole,
        m.inhomogeneous_width.map_or(ideal.gamma_inh, |f| f.rad()),
        m.t2_s.unwrap_or(ideal.t2),
        m.t1_s.unwrap_or(ideal.t1),
    )?)
}

fn pulse_of(cfg: &ScenarioConfig, command: &str) -> Outcome<Pulse> {
    let p = section(&cfg.pulse, "pulse", command)?;
    if p.samples_per_fwhm == 0 || p.record_fwhms.is_nan() || p.record_fwhms <= 0.0 {
        return Err(Failure::Config(
            "key `pulse.samples_per_fwhm` and `pulse.record_fwhms` must be positive".into(),
        ));
    }
    Ok(make_gaussian_pulse(
        p.fwhm_s,
        p.peak_rabi.rad(),
        TimeGrid::centered(p.fwhm_s, p.samples_per_fwhm, p.record_fwhms),
    )?)
}

fn hz(w: f64) -> f64 {
    rad_to_hz(w)
}

#[derive(Serialize)]
struct FeatureRow {
    kind: &'static str,
    #[serde(rename = "frequency_Hz")]
    frequency_hz: f64,
    alpha_per_m: f64,
}

#[derive(Serialize)]
struct GainRow {
    repetition: usize,
    gain: f64,
}

pub fn spectrum(cfg: &ScenarioConfig, sink: &Sink) -> Outcome<Value> {
    const CMD: &str = "spectrum";
    let levels = levels_of(cfg, CMD)?;
    let probe = section(&cfg.probe, "probe", CMD)?;
    let pump = section(&cfg.pump, "pump", CMD)?;
    let (half, step) = (probe.half_span.rad(), probe.step.rad());
    if !(half > 0.0 && step > 0.0) {
        return Err(Failure::Config(
            "keys `probe.half_span` and `probe.step` must be positive".into(),
        ));
    }
    let n = (half / step).round() as i64;
    let grid: Vec<f64> = (-n..=n).map(|k| k as f64 * step).collect();
    let margin = (PROBE_WINDOW_FWHMS + 5.0) * levels.gamma_hom;
    let mut ens = IonEnsemble::covering(&levels, grid[0], grid[grid.len() - 1], margin)?;
    let alpha_th = probe.alpha_thermal_per_m;
    let thermal = absorption_spectrum(&ens, &levels, &grid, alpha_th)?;

    let seq = PumpSequence::new(
        pump.segments
            .iter()
            .map(|s| {
                let seg = PumpSegment {
                    channel: s.channel,
                    center: s.center.rad(),
                    span: s.span.rad(),
                    duration: s.duration_s,
                    rate: s.rate_per_s,
                    start: None,
                };
                s.start_s.map_or(seg, |t| seg.at(t))
            })
            .collect(),
    );
    let mut opts = PumpOptions {
        max_dwell: pump.max_dwell_s,
        ..Default::default()
    };
    if let Some(w) = pump.window_fwhms {
        opts.window_fwhms = w;
    }
    let window = cfg.enhancement.as_ref().map(|e| BackgroundWindow {
        inner: e.inner.rad(),
        outer: e.outer.rad(),
    });
    let mut gains = Vec::new();
    let mut spectrum: Option<AbsorptionSpectrum> = None;
    for rep in 0..pump.repeat.max(1) {
        ens = simulate_pump_sequence(&seq, &levels, &ens, opts)?;
        if let Some(w) = window {
            let s = absorption_spectrum(&ens, &levels, &grid, alpha_th)?;
            gains.push(enhancement_gain(&thermal, &s, w)?);
            sink.note(format!("repetition {}: gain {:.4}", rep + 1, gains[rep]));
            spectrum = Some(s);
        }
    }
    let spectrum = match spectrum {
        Some(s) => s,
        None => absorption_spectrum(&ens, &levels, &grid, alpha_th)?,
    };
    sink.write("spectrum.csv", |w| io::write_spectrum_csv(w, &spectrum))?;

    let features = spectral_features(&spectrum, probe.feature_threshold);
    sink.rows(
        "features.csv",
        features.iter().map(|f| FeatureRow {
            kind: match f.kind {
                FeatureKind::Hole => "hole",
                FeatureKind::AntiHole => "anti-hole",
            },
            frequency_hz: hz(f.detuning),
            alpha_per_m: f.alpha,
        }),
    )?;
    let at = |k: FeatureKind| -> Vec<f64> {
        features
            .iter()
            .filter(|f| f.kind == k)
            .map(|f| hz(f.detuning))
            .collect()
    };
    // anti-holes beyond the ±Δg lines come from classes whose other ground
    // sublevel was emptied through the upper excited level
    let outer: Vec<f64> = features
        .iter()
        .filter(|f| f.kind == FeatureKind::AntiHole && f.detuning.abs() > levels.delta_g + step)
        .map(|f| hz(f.detuning))
        .collect();
    let mut headline = json!({
        "alpha_thermal_per_m": alpha_th,
        "holes_Hz": at(FeatureKind::Hole),
        "anti_holes_Hz": at(FeatureKind::AntiHole),
        "outer_anti_holes_Hz": outer,
        "min_alpha_per_m": spectrum.alpha.iter().cloned().fold(f64::INFINITY, f64::min),
        "max_alpha_per_m": spectrum.alpha.iter().cloned().fold(0.0, f64::max),
    });
    if !outer.is_empty() {
        headline["note"] = json!(
            "outer anti-holes at ±(Δg+Δe) are predicted by the four-line model; \
             they lie outside the commonly plotted ±Δg range"
        );
    }
    if !gains.is_empty() {
        sink.rows(
            "enhancement.csv",
            gains.iter().enumerate().map(|(k, &gain)| GainRow {
                repetition: k + 1,
                gain,
            }),
        )?;
        headline["enhancement_gain"] = json!(gains[gains.len() - 1]);
        headline["enhanced_alpha_per_m"] = json!(gains[gains.len() - 1] * alpha_th);
        headline["gain_monotone"] = json!(gains.windows(2).all(|w| w[1] >= w[0]));
    }
    sink.summary(CMD, cfg, headline)
}

fn grid_config(cfg: &ScenarioConfig) -> GridConfig {
    match cfg.engine.grid {
        GridChoice::Default => GridConfig::default(),
        GridChoice::Coarse => GridConfig::coarse(),
    }
}

fn time_domain(
    cfg: &ScenarioConfig,
    pulse: &Pulse,
    medium: &Medium,
    snapshot_times: Vec<f64>,
) -> Outcome<TdRun> {
    let grid = build_detuning_grid(&medium.hole, &grid_config(cfg))?;
    let opts = TdOptions {
        z_steps: cfg.engine.z_steps,
        max_alpha_dz: cfg.engine.max_alpha_dz,
        stations: cfg.engine.stations_m.clone(),
        snapshot_times,
        exec: Execution::default(),
    };
    Ok(propagate_time_domain(pulse, medium, &grid, &opts)?)
}

fn pulse_report(input: &Pulse, r: &PropagationResult) -> Outcome<Value> {
    let d: Distortion = distortion_metrics(input, &r.transmitted, r.delay_peak)?;
    Ok(json!({
        "delay_peak_s": r.delay_peak,
        "delay_centroid_s": r.delay_centroid,
        "energy_transmission": r.energy_transmission,
        "broadening": r.broadening,
        "amplitude_ratio": d.amplitude_ratio,
        "rms_shape_residual": d.rms_shape_residual,
        "distorted": d.rms_shape_residual > DISTORTION_RESIDUAL,
    }))
}

pub fn propagate(cfg: &ScenarioConfig, sink: &Sink) -> Outcome<Value> {
    const CMD: &str = "propagate";
    let medium = medium_of(cfg, CMD)?;
    let pulse = pulse_of(cfg, CMD)?;
    let engine = cfg.engine.kind;
    sink.write("input.csv", |w| io::write_pulse_csv(w, &pulse))?;
    let mut headline = json!({
        "hole_width_Hz": hz(medium.hole.width_fwhm),
        "optical_depth": medium.optical_depth(),
        "expected_delay_s": expected_delay(&medium)?,
        "warnings": medium.validity().iter().map(|w| format!("{w:?}")).collect::<Vec<_>>(),
    });
    let mut fd = None;
    if engine.runs_fd() {
        let r = propagate_medium(&pulse, &medium)?;
        sink.write("output_fd.csv", |w| io::write_pulse_csv(w, &r.transmitted))?;
        headline["fd"] = pulse_report(&pulse, &r)?;
        headline["delay_s"] = json!(r.delay_peak);
        fd = Some(r);
    }
    if engine.runs_td() {
        sink.note("running the time-domain engine");
        let run = time_domain(cfg, &pulse, &medium, Vec::new())?;
        sink.write("output_td.csv", |w| {
            io::write_pulse_csv(w, &run.result.transmitted)
        })?;
        for (k, s) in run.stations.iter().enumerate() {
            sink.write(&format!("station_{}.csv", k + 1), |w| {
                io::write_pulse_csv(w, &s.field)
            })?;
        }
        let mut td = pulse_report(&pulse, &run.result)?;
        td["z_steps"] = json!(run.z_steps);
        if let Some(f) = &fd {
            let peak = f.transmitted.peak_amplitude();
            let dev = f
                .transmitted
                .envelope
                .iter()
                .zip(&run.result.transmitted.envelope)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            td["max_deviation_from_fd"] = json!(dev / peak);
        } else {
            headline["delay_s"] = json!(run.result.delay_peak);
        }
        headline["td"] = td;
    }
    sink.summary(CMD, cfg, headline)
}

pub fn delay_scan_cmd(cfg: &ScenarioConfig, sink: &Sink) -> Outcome<Value> {
    const CMD: &str = "delay-scan";
    let scan_cfg = section(&cfg.scan, "scan", CMD)?;
    let pulse = pulse_of(cfg, CMD)?;
    let scenarios = scan_cfg
        .scenarios
        .iter()
        .map(|s| {
            let hole = SpectralHole::centered(s.hole_width.rad())?;
            Medium::ideal(s.alpha_per_m, s.length_m.unwrap_or(scan_cfg.length_m), hole)
        })
        .collect::<slowlight::Result<Vec<_>>>()?;
    let scan = delay_scan(
        &scenarios,
        &pulse,
        scan_cfg.width_floor.rad(),
        Execution::default(),
    )?;
    sink.write("scan.csv", |w| io::write_scan_csv(w, &scan))?;
    let headline = json!({
        "slope": scan.fit.slope,
        "intercept_s": scan.fit.intercept,
        "scenarios_used": scan.rows.len(),
        "excluded": scan.excluded,
    });
    sink.summary(CMD, cfg, headline)
}

#[derive(Serialize)]
struct LedgerRow {
    time_s: f64,
    w_em_in: f64,
    w_at: f64,
    w_out: f64,
    w_pending: f64,
    w_total: f64,
}

pub fn bloch(cfg: &ScenarioConfig, sink: &Sink) -> Outcome<Value> {
    const CMD: &str = "bloch";
    let medium = medium_of(cfg, CMD)?;
    let pulse = pulse_of(cfg, CMD)?;
    let ledger_cfg = cfg.ledger.clone().unwrap_or_default();
    if ledger_cfg.intervals == 0 {
        return Err(Failure::Config(
            "key `ledger.intervals` must be positive".into(),
        ));
    }
    let span = pulse.dt * (pulse.len() - 1) as f64;
    let mut times: Vec<f64> = (0..=ledger_cfg.intervals)
        .map(|k| pulse.t0 + span * k as f64 / ledger_cfg.intervals as f64)
        .collect();
    if ledger_cfg.midpoint {
        times.push(pulse.t0 + 0.5 * span + 0.5 * expected_delay(&medium)?);
    }
    sink.note("running the time-domain engine");
    let run = time_domain(cfg, &pulse, &medium, times)?;
    let led = energy_ledger(&run, &medium)?;
    sink.write("output_td.csv", |w| {
        io::write_pulse_csv(w, &run.result.transmitted)
    })?;
    sink.rows(
        "ledger.csv",
        (0..led.times.len()).map(|k| LedgerRow {
            time_s: led.times[k],
            w_em_in: led.w_em_in[k],
            w_at: led.w_at[k],
            w_out: led.w_out[k],
            w_pending: led.w_pending[k],
            w_total: led.w_total[k],
        }),
    )?;
    if let Some(k) = led.contained_at {
        sink.write("snapshot_contained.csv", |w| {
            io::write_snapshot_csv(w, &run.snapshots[k])
        })?;
    }
    let headline = json!({
        "delay_s": run.result.delay_peak,
        "expected_delay_s": expected_delay(&medium)?,
        "z_steps": run.z_steps,
        "energy_drift": led.drift,
        "contained_at_s": led.contained_at.map(|k| led.times[k]),
        "energy_partition_residual": led.partition_residual,
        "compression_residual": led.compression_residual,
        "flux_residual": led.flux_residual,
    });
    sink.summary(CMD, cfg, headline)
}
