//! CSV exchange formats: a header row, comma separators, `.` decimals and
//! shortest round-trip floats, so identical data always gives identical
//! bytes.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::DelayScan;
use crate::bloch::SpatialSnapshot;
use crate::error::{Error, Result, Site};
use crate::holeburn::AbsorptionSpectrum;
use crate::pulse::Pulse;
use crate::units::{hz_to_rad, rad_to_hz};
use crate::C64;

#[derive(Serialize, Deserialize)]
struct PulseRow {
    time_s: f64,
    re_omega: f64,
    im_omega: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRow {
    #[serde(rename = "frequency_Hz")]
    frequency_hz: f64,
    alpha_per_m: f64,
}

#[derive(Serialize)]
struct ScanCsvRow {
    #[serde(rename = "alphaL_over_gamma_s")]
    alpha_l_over_gamma_s: f64,
    delay_s: f64,
    broadening: f64,
    transmission: f64,
}

#[derive(Serialize)]
struct SnapshotRow {
    z_m: f64,
    re_omega: f64,
    im_omega: f64,
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_pulse_csv<W: Write>(w: W, pulse: &Pulse) -> Result<()> {
    write_rows(
        w,
        pulse.envelope.iter().enumerate().map(|(k, c)| PulseRow {
            time_s: pulse.time(k),
            re_omega: c.re,
            im_omega: c.im,
        }),
    )
}

pub fn read_pulse_csv<R: Read>(r: R) -> Result<Pulse> {
    let site = Site::new("io", "read_pulse_csv");
    let rows: Vec<PulseRow> = csv::Reader::from_reader(r)
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    if rows.len() < 2 {
        return Err(Error::invalid(site, "a pulse needs at least two rows"));
    }
    let dt = rows[1].time_s - rows[0].time_s;
    let uniform = rows
        .windows(2)
        .all(|w| ((w[1].time_s - w[0].time_s) / dt - 1.0).abs() < 1e-6);
    if !(dt > 0.0) || !uniform {
        return Err(Error::grid(
            site,
            "time column must be uniformly increasing",
        ));
    }
    Pulse::new(
        rows[0].time_s,
        dt,
        rows.iter()
            .map(|r| C64::new(r.re_omega, r.im_omega))
            .collect(),
    )
}

/// Frequencies are written in Hz.
pub fn write_spectrum_csv<W: Write>(w: W, spectrum: &AbsorptionSpectrum) -> Result<()> {
    write_rows(
        w,
        spectrum
            .detunings
            .iter()
            .zip(&spectrum.alpha)
            .map(|(&d, &a)| SpectrumRow {
                frequency_hz: rad_to_hz(d),
                alpha_per_m: a,
            }),
    )
}

/// Reads `(frequency_Hz, alpha_per_m)` rows back into angular units.
/// `alpha_thermal` is not stored and is taken as the largest `α` at the two
/// grid ends.
pub fn read_spectrum_csv<R: Read>(r: R) -> Result<AbsorptionSpectrum> {
    let rows: Vec<SpectrumRow> = csv::Reader::from_reader(r)
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(Error::invalid(
            Site::new("io", "read_spectrum_csv"),
            "empty spectrum",
        ));
    }
    let alpha_thermal = rows[0].alpha_per_m.max(rows[rows.len() - 1].alpha_per_m);
    Ok(AbsorptionSpectrum {
        detunings: rows.iter().map(|r| hz_to_rad(r.frequency_hz)).collect(),
        alpha: rows.iter().map(|r| r.alpha_per_m).collect(),
        alpha_thermal,
    })
}

pub fn write_scan_csv<W: Write>(w: W, scan: &DelayScan) -> Result<()> {
    write_rows(
        w,
        scan.rows.iter().map(|r| ScanCsvRow {
            alpha_l_over_gamma_s: r.alpha_l_over_gamma,
            delay_s: r.delay,
            broadening: r.broadening,
            transmission: r.transmission,
        }),
    )
}

pub fn write_snapshot_csv<W: Write>(w: W, snapshot: &SpatialSnapshot) -> Result<()> {
    write_rows(
        w,
        snapshot
            .z
            .iter()
            .zip(&snapshot.field)
            .map(|(&z, c)| SnapshotRow {
                z_m: z,
                re_omega: c.re,
                im_omega: c.im,
            }),
    )
}
