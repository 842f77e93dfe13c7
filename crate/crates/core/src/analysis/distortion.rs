use serde::Serialize;

use super::MODULE;
use crate::error::{Error, Result, Site};
use crate::pulse::Pulse;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distortion {
    /// Output over input intensity FWHM.
    pub broadening: f64,
    /// Output over input peak amplitude.
    pub amplitude_ratio: f64,
    /// Relative L2 distance between the amplitude profiles after undoing the
    /// delay and rescaling both to unit peak.
    pub rms_shape_residual: f64,
}

pub fn distortion_metrics(
    reference: &Pulse,
    transmitted: &Pulse,
    delay: f64,
) -> Result<Distortion> {
    let site = Site::new(MODULE, "distortion_metrics");
    if !reference.same_grid(transmitted) {
        return Err(Error::invalid(
            site,
            "reference and transmitted pulses are on different time grids",
        ));
    }
    let (pr, pt) = (reference.peak_amplitude(), transmitted.peak_amplitude());
    if pr == 0.0 || pt == 0.0 {
        return Err(Error::invalid(site, "zero pulse"));
    }
    let shifted = reference.delayed(delay);
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in shifted.envelope.iter().zip(&transmitted.envelope) {
        let (a, b) = (a.norm() / pr, b.norm() / pt);
        num += (a - b) * (a - b);
        den += a * a;
    }
    Ok(Distortion {
        broadening: transmitted.fwhm() / reference.fwhm(),
        amplitude_ratio: pt / pr,
        rms_shape_residual: (num / den).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{make_gaussian_pulse, TimeGrid};

    #[test]
    fn identical_pulses() {
        let p = make_gaussian_pulse(5.37e-6, 2.0, TimeGrid::centered(5.37e-6, 64, 8.0)).unwrap();
        let d = distortion_metrics(&p, &p, 0.0).unwrap();
        assert_eq!((d.broadening, d.amplitude_ratio), (1.0, 1.0));
        assert!(d.rms_shape_residual < 1e-12);
    }
}
