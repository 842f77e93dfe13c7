use proptest::prelude::*;
use slowlight::propagation::{expected_delay, propagate_medium};
use slowlight::pulse::{make_gaussian_pulse, TimeGrid};
use slowlight::units::hz_to_rad;
use slowlight::{Medium, Pulse, SpectralHole, C64};

const FWHM: f64 = 5.37e-6;

fn pulse(record_fwhms: f64) -> Pulse {
    make_gaussian_pulse(FWHM, 1.0, TimeGrid::centered(FWHM, 50, record_fwhms)).unwrap()
}

fn medium(od: f64, width_khz: f64, depth: f64) -> Medium {
    let hole = SpectralHole::new(0.0, hz_to_rad(width_khz * 1e3), depth).unwrap();
    Medium::ideal(od / 5e-3, 5e-3, hole).unwrap()
}

fn rel_diff(a: &Pulse, b: &Pulse) -> f64 {
    let num: f64 = a
        .envelope
        .iter()
        .zip(&b.envelope)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let den: f64 = a.envelope.iter().map(|x| x.norm_sqr()).sum();
    (num / den).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_is_linear(
        od in 0.0..6.0f64,
        width_khz in 300.0..3000.0f64,
        depth in 0.0..=1.0f64,
        re in -3.0..3.0f64,
        im in -3.0..3.0f64,
    ) {
        prop_assume!(re.hypot(im) > 1e-3);
        let a = C64::new(re, im);
        let p = pulse(12.0);
        let m = medium(od, width_khz, depth);
        let once = propagate_medium(&p, &m).unwrap().transmitted;
        let scaled = propagate_medium(&p.scaled(a), &m).unwrap().transmitted;
        prop_assert!(rel_diff(&once.scaled(a), &scaled) <= 1e-12);
    }

    #[test]
    fn two_halves_make_the_whole(
        od in 0.0..6.0f64,
        width_khz in 500.0..3000.0f64,
        depth in 0.5..=1.0f64,
    ) {
        let p = pulse(20.0);
        let m = medium(od, width_khz, depth);
        let whole = propagate_medium(&p, &m).unwrap().transmitted;
        let half = m.with_length(0.5 * m.length);
        let first = propagate_medium(&p, &half).unwrap().transmitted;
        let second = propagate_medium(&first, &half).unwrap().transmitted;
        prop_assert!(rel_diff(&whole, &second) <= 1e-10, "{}", rel_diff(&whole, &second));
    }

    #[test]
    fn no_gain(od in 0.0..8.0f64, width_khz in 150.0..5000.0f64, depth in 0.0..=1.0f64) {
        let r = propagate_medium(&pulse(16.0), &medium(od, width_khz, depth)).unwrap();
        prop_assert!(r.energy_transmission <= 1.0 + 1e-12);
    }

    // the bandwidth bound keeps the finite-bandwidth correction, about
    // 3.9·r² for r = bandwidth/Δ₀, below the tolerance
    #[test]
    fn narrowband_delay_matches_closed_form(od in 0.5..6.0f64, r in 0.02..(1.0 / 16.0)) {
        let bandwidth = 4.0 * 2f64.ln() / FWHM;
        let width_khz = bandwidth / r / std::f64::consts::TAU / 1e3;
        let m = medium(od, width_khz, 1.0);
        let got = propagate_medium(&pulse(16.0), &m).unwrap().delay_peak;
        let want = expected_delay(&m).unwrap();
        prop_assert!((got / want - 1.0).abs() <= 0.02, "{got} vs {want}");
    }
}
