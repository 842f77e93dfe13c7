//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use slowlight::analysis::delay_scan;
use slowlight::bloch::{
    build_detuning_grid, energy_ledger, integrate_bloch_class, minimum_z_steps,
    propagate_time_domain, BlochMode, GridConfig, TdOptions, TdRun,
};
use slowlight::holeburn::{
    absorption_spectrum, enhancement_gain, simulate_pump_sequence, spectral_features,
    AbsorptionSpectrum, BackgroundWindow, FeatureKind, IonEnsemble, LevelSystem, PumpOptions,
    PumpSegment, PumpSequence, PROBE_WINDOW_FWHMS,
};
use slowlight::medium::{kramers_kronig, symmetric_grid};
use slowlight::propagation::{group_velocity, propagate_medium, PropagationResult};
use slowlight::pulse::{make_gaussian_pulse, TimeGrid};
use slowlight::units::hz_to_rad;
use slowlight::{Medium, Pulse, SpectralHole, C64, SPEED_OF_LIGHT};

const PULSE_FWHM: f64 = 5.37e-6;
const LENGTH: f64 = 5e-3;
const ALPHA0: f64 = 850.0;
const HOLES_KHZ: [f64; 3] = [206.0, 420.0, 860.0];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn fig5_pulse(samples_per_fwhm: usize) -> Pulse {
    make_gaussian_pulse(
        PULSE_FWHM,
        1.0,
        TimeGrid::centered(PULSE_FWHM, samples_per_fwhm, 12.0),
    )
    .unwrap()
}

fn fig5_medium(width_khz: f64) -> Medium {
    let hole = SpectralHole::centered(hz_to_rad(width_khz * 1e3)).unwrap();
    Medium::ideal(ALPHA0, LENGTH, hole).unwrap()
}

fn tm_yag(saturation: f64) -> LevelSystem {
    LevelSystem {
        delta_g: hz_to_rad(18e6),
        delta_e: hz_to_rad(7.5e6),
        gamma_hom: hz_to_rad(10e3),
        branching: 0.5,
        t1_opt: 800e-6,
        t_hyperfine: 10.0,
        saturation_per_rate: saturation,
    }
}

fn probe(half_hz: f64, step_hz: f64) -> Vec<f64> {
    let n = (half_hz / step_hz).round() as i64;
    (-n..=n).map(|k| hz_to_rad(k as f64 * step_hz)).collect()
}

fn ensemble_for(levels: &LevelSystem, grid: &[f64]) -> IonEnsemble {
    let margin = (PROBE_WINDOW_FWHMS + 5.0) * levels.gamma_hom;
    IonEnsemble::covering(levels, grid[0], grid[grid.len() - 1], margin).unwrap()
}

fn group_velocity_bracket() -> Outcome {
    let v = group_velocity(1e3, TAU * 100e3).unwrap() / SPEED_OF_LIGHT;
    Outcome::new((2.0e-6..=3.5e-6).contains(&v), format!("v_g/c = {v:.3e}"))
}

fn unit_slope() -> Outcome {
    let pulse = fig5_pulse(50);
    let widths_mhz = [1.5, 1.75, 2.0];
    let scenarios: Vec<Medium> = (0..8)
        .map(|k| {
            let od = 0.5 + 3.75 * k as f64 / 7.0;
            let hole = SpectralHole::centered(hz_to_rad(widths_mhz[k % 3] * 1e6)).unwrap();
            Medium::ideal(od / LENGTH, LENGTH, hole).unwrap()
        })
        .collect();
    let scan = delay_scan(&scenarios, &pulse, hz_to_rad(600e3), Default::default()).unwrap();
    let f = scan.fit;
    let pass =
        scan.rows.len() == 8 && (f.slope - 1.0).abs() <= 0.03 && f.intercept.abs() <= 0.02e-6;
    Outcome::new(
        pass,
        format!(
            "slope {:.4}, intercept {:.2e} s over {} scenarios",
            f.slope,
            f.intercept,
            scan.rows.len()
        ),
    )
}

struct CrossRuns {
    fd: Vec<PropagationResult>,
    td: Vec<TdRun>,
}

fn time_domain(
    width_khz: f64,
    samples_per_fwhm: usize,
    z_steps: usize,
    stations: Vec<f64>,
) -> TdRun {
    let m = fig5_medium(width_khz);
    let grid = build_detuning_grid(&m.hole, &GridConfig::default()).unwrap();
    let opts = TdOptions {
        z_steps: Some(z_steps),
        stations,
        ..Default::default()
    };
    propagate_time_domain(&fig5_pulse(samples_per_fwhm), &m, &grid, &opts).unwrap()
}

fn cross_runs() -> CrossRuns {
    let pulse = fig5_pulse(50);
    let fd = HOLES_KHZ
        .iter()
        .map(|&w| propagate_medium(&pulse, &fig5_medium(w)).unwrap())
        .collect();
    let z = minimum_z_steps(&fig5_medium(HOLES_KHZ[0]), None);
    let stations = vec![0.25 * LENGTH, 0.5 * LENGTH, 0.75 * LENGTH];
    let td = HOLES_KHZ
        .iter()
        .map(|&w| time_domain(w, 50, z, stations.clone()))
        .collect();
    CrossRuns { fd, td }
}

fn cross_engine(runs: &CrossRuns) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for ((w, fd), td) in HOLES_KHZ.iter().zip(&runs.fd).zip(&runs.td) {
        let dr = td.result.delay_peak / fd.delay_peak - 1.0;
        let er = td.result.energy_transmission / fd.energy_transmission - 1.0;
        worst = worst.max(dr.abs()).max(er.abs());
        parts.push(format!("{w} kHz delay {dr:+.2e} energy {er:+.2e}"));
    }
    Outcome::new(worst <= 0.02, parts.join("; "))
}

fn energy_partition() -> Outcome {
    let delta0 = TAU * 10e6;
    let alpha0 = 99_999.0 * delta0 / SPEED_OF_LIGHT;
    let od = 1e4;
    let m = Medium::ideal(alpha0, od / alpha0, SpectralHole::centered(delta0).unwrap()).unwrap();
    let tau_d = od / delta0;
    let fwhm = tau_d / 2.5;
    let pulse = make_gaussian_pulse(fwhm, 1.0, TimeGrid::centered(fwhm, 100, 14.0)).unwrap();
    let span = pulse.dt * (pulse.len() - 1) as f64;
    let mid = pulse.t0 + 0.5 * span + 0.5 * tau_d;
    let times = (0..=40)
        .map(|k| pulse.t0 + span * k as f64 / 40.0)
        .chain([mid])
        .collect();
    let grid = build_detuning_grid(&m.hole, &GridConfig::coarse()).unwrap();
    let opts = TdOptions {
        max_alpha_dz: Some(2.0),
        snapshot_times: times,
        ..Default::default()
    };
    let run = propagate_time_domain(&pulse, &m, &grid, &opts).unwrap();
    let led = energy_ledger(&run, &m).unwrap();
    match led.partition_residual {
        Some(r) => Outcome::new(
            r.abs() <= 0.01 && led.drift <= 1e-3,
            format!(
                "W_at/((c/v_g-1)W_em) - 1 = {r:+.2e}, drift {:.2e}",
                led.drift
            ),
        ),
        None => Outcome::new(false, "pulse never contained"),
    }
}

fn adiabatic_following() -> Outcome {
    let delta0 = hz_to_rad(860e3);
    let fwhm = PULSE_FWHM;
    let bandwidth = 4.0 * 2f64.ln() / fwhm;
    let floor = 20.0 * delta0.max(bandwidth).max(1.0);
    let mut worst: f64 = 0.0;
    for mult in [1.0, 2.0, 5.0] {
        let delta = floor * mult;
        let spf = (10.0 * delta * fwhm).ceil() as usize;
        let peak = 0.02 * floor;
        let p = make_gaussian_pulse(fwhm, peak, TimeGrid::centered(fwhm, spf, 12.0)).unwrap();
        for d in [delta, -delta] {
            let tr = integrate_bloch_class(&p, d, 10.0, 1.0, BlochMode::Full).unwrap();
            for (o, s22) in p.envelope.iter().zip(&tr.excited) {
                if o.norm() >= 0.1 * peak {
                    let want = o.norm_sqr() / (4.0 * d * d);
                    worst = worst.max((s22 / want - 1.0).abs());
                }
            }
        }
    }
    Outcome::new(worst <= 0.01, format!("max relative deviation {worst:.2e}"))
}

fn travelling_wave(runs: &CrossRuns) -> Outcome {
    // only the widest hole satisfies bandwidth ≤ Δ₀/8 for this pulse
    let m = fig5_medium(860.0);
    let td = &runs.td[2];
    let bandwidth = 4.0 * 2f64.ln() / PULSE_FWHM;
    let mut worst: f64 = 1.0;
    for st in &td.stations {
        let shift = st.z * m.alpha0 / m.hole.width_fwhm;
        let reference = td.input.delayed(shift);
        let (mut ab, mut aa, mut bb) = (C64::new(0.0, 0.0), 0.0, 0.0);
        for (a, b) in reference.envelope.iter().zip(&st.field.envelope) {
            ab += a.conj() * b;
            aa += a.norm_sqr();
            bb += b.norm_sqr();
        }
        worst = worst.min(ab.norm() / (aa * bb).sqrt());
    }
    let pass = bandwidth <= m.hole.width_fwhm / 8.0 && td.stations.len() == 3 && worst >= 0.999;
    Outcome::new(
        pass,
        format!(
            "lowest correlation {worst:.6} over {} stations",
            td.stations.len()
        ),
    )
}

fn burnt(levels: &LevelSystem, grid: &[f64], duration: f64) -> AbsorptionSpectrum {
    let ens = ensemble_for(levels, grid);
    let seq = PumpSequence::new(vec![PumpSegment::fixed(0, 0.0, duration, 1e4)]);
    let out = simulate_pump_sequence(&seq, levels, &ens, PumpOptions::default()).unwrap();
    absorption_spectrum(&out, levels, grid, 500.0).unwrap()
}

fn hole_pattern() -> Outcome {
    let levels = tm_yag(0.01);
    let grid = probe(30e6, 25e3);
    let s = burnt(&levels, &grid, 2e-3);
    let mhz = |k: FeatureKind| -> Vec<f64> {
        spectral_features(&s, 1e-3)
            .into_iter()
            .filter(|f| f.kind == k)
            .map(|f| (f.detuning / TAU / 1e3).round() / 1e3)
            .collect()
    };
    let (holes, anti) = (mhz(FeatureKind::Hole), mhz(FeatureKind::AntiHole));
    let pattern = holes == [-7.5, 0.0, 7.5] && anti == [-25.5, -18.0, -10.5, 10.5, 18.0, 25.5];

    let weak = burn_depth_ratio(&levels, &grid);
    let pass = pattern && (weak / 2.0 - 1.0).abs() <= 0.1;
    Outcome::new(
        pass,
        format!("holes {holes:?} MHz, anti-holes {anti:?} MHz, weak-burn depth ratio {weak:.3}"),
    )
}

fn burn_depth_ratio(levels: &LevelSystem, grid: &[f64]) -> f64 {
    let s = burnt(levels, grid, 20e-6);
    let at = |hz: f64| {
        let k = grid
            .iter()
            .position(|&g| (g - hz_to_rad(hz)).abs() < 1.0)
            .unwrap();
        s.alpha_thermal - s.alpha[k]
    };
    2.0 * at(0.0) / (at(7.5e6) + at(-7.5e6))
}

fn enhancement() -> Outcome {
    let levels = tm_yag(0.01);
    let grid = probe(5e6, 25e3);
    let mut ens = ensemble_for(&levels, &grid);
    let before = absorption_spectrum(&ens, &levels, &grid, 500.0).unwrap();
    let window = BackgroundWindow {
        inner: hz_to_rad(1.5e6),
        outer: hz_to_rad(3e6),
    };
    let opts = PumpOptions {
        window_fwhms: 20.0,
        ..Default::default()
    };
    let d = 2e-3;
    let (dg, span) = (levels.delta_g, hz_to_rad(8e6));
    let mut gains = Vec::new();
    for _ in 0..12 {
        let seq = PumpSequence::new(vec![
            PumpSegment::fixed(1, 0.0, 2.0 * d, 1e4),
            PumpSegment::chirp(0, dg, span, d, 1e4),
            PumpSegment::chirp(0, -dg, span, d, 1e4),
        ]);
        ens = simulate_pump_sequence(&seq, &levels, &ens, opts).unwrap();
        let after = absorption_spectrum(&ens, &levels, &grid, 500.0).unwrap();
        gains.push(enhancement_gain(&before, &after, window).unwrap());
    }
    let monotone = gains.windows(2).all(|w| w[1] >= w[0]);
    let top = gains.iter().cloned().fold(0.0, f64::max);
    let pass = monotone && (1.7..=2.0).contains(&top);
    let shown: Vec<String> = gains.iter().map(|g| format!("{g:.3}")).collect();
    Outcome::new(pass, format!("gain per repetition [{}]", shown.join(", ")))
}

fn kk_oracle() -> Outcome {
    let m = Medium::ideal(
        850.0,
        LENGTH,
        SpectralHole::centered(hz_to_rad(420e3)).unwrap(),
    )
    .unwrap();
    let gamma = m.hole.half_width();
    let n = 1 << 14;
    let nu = symmetric_grid(0.05 * gamma * (n / 2) as f64, n + 1);
    let alpha: Vec<f64> = nu.iter().map(|&x| m.absorption_coefficient(x)).collect();
    let kk = kramers_kronig(&nu, &alpha).unwrap();
    let analytic: Vec<f64> = nu.iter().map(|&x| m.exponent(x).im).collect();
    let (a, b) = (nu.len() / 4, 3 * nu.len() / 4);
    let peak = analytic[a..b].iter().fold(0.0_f64, |p, v| p.max(v.abs()));
    let err = (a..b)
        .map(|i| (kk.phase_per_meter[i] - analytic[i]).abs())
        .fold(0.0, f64::max)
        / peak;
    Outcome::new(
        err <= 1e-3,
        format!("max error {err:.2e} of the peak dispersion"),
    )
}

fn convergence(runs: &CrossRuns) -> Outcome {
    let z = 2 * runs.td[0].z_steps;
    let mut worst: f64 = 0.0;
    for (w, coarse) in HOLES_KHZ.iter().zip(&runs.td) {
        let fine = time_domain(*w, 100, z, Vec::new());
        worst = worst.max((fine.result.delay_peak / coarse.result.delay_peak - 1.0).abs());
    }
    Outcome::new(worst <= 5e-3, format!("largest delay change {worst:.2e}"))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {n:>2} {name}: {} ({:.1} s)",
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    };
    report(1, "group velocity", &mut group_velocity_bracket);
    report(2, "unit slope", &mut unit_slope);
    let t = Instant::now();
    let runs = cross_runs();
    let setup = t.elapsed().as_secs_f64();
    report(3, "cross-engine equivalence", &mut || {
        let mut o = cross_engine(&runs);
        o.detail += &format!("; engines ran {setup:.1} s");
        o
    });
    report(4, "energy partition", &mut energy_partition);
    report(5, "adiabatic following", &mut adiabatic_following);
    report(6, "travelling wave", &mut || travelling_wave(&runs));
    report(7, "hole and anti-hole pattern", &mut hole_pattern);
    report(8, "enhancement", &mut enhancement);
    report(9, "Kramers-Kronig", &mut kk_oracle);
    report(10, "convergence", &mut || convergence(&runs));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
