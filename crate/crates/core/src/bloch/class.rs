use serde::{Deserialize, Serialize};

use super::MODULE;
use crate::error::{Error, Result, Site};
use crate::pulse::Pulse;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlochMode {
    /// Linear response with the inversion pinned at `w = 1`.
    #[default]
    Weak,
    /// Coherence and inversion together.
    Full,
}

/// Response of one detuning class sampled on the pulse grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTrace {
    pub sigma: Vec<C64>,
    pub w: Vec<f64>,
    /// Excited-state population. In weak mode this is the work done on the
    /// class, `∫ Im(Ω* σ) dt`, which is what `(1 − w)/2` reduces to at
    /// second order in the field.
    pub excited: Vec<f64>,
}

/// Exact one-step propagator of `dσ/dt = (i/2)Ω − a σ` for `Ω` linear over
/// the step: `σ₁ = e^{−ah}σ₀ + c₀Ω₀ + c₁Ω₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LinearStep {
    pub decay: C64,
    pub c0: C64,
    pub c1: C64,
}

impl LinearStep {
    pub fn new(delta: f64, t2: f64, h: f64) -> Self {
        let a = C64::new(1.0 / t2, delta);
        let x = a * h;
        // φ = (1 − e^{−x})/a and ψ = φ − (1 − e^{−x}(1 + x))/(a²h), written
        // as h·Σ(−x)^k/(k+1)! and h·Σ(−x)^k/(k+2)! near x = 0
        let (phi, psi) = if x.norm() < 0.2 {
            let (mut p1, mut p2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            let mut term = C64::new(1.0, 0.0);
            let mut fact1 = 1.0;
            for k in 0..12 {
                fact1 *= (k + 1) as f64;
                let fact2 = fact1 * (k + 2) as f64;
                p1 += term / fact1;
                p2 += term / fact2;
                term *= -x;
            }
            (p1 * h, p2 * h)
        } else {
            let e = (-x).exp();
            let phi = (1.0 - e) / a;
            (phi, phi - (1.0 - e * (1.0 + x)) / (a * a * h))
        };
        let half_i = C64::new(0.0, 0.5);
        Self {
            decay: (-x).exp(),
            c0: half_i * (phi - psi),
            c1: half_i * psi,
        }
    }

    #[inline]
    pub fn apply(&self, sigma: C64, o0: C64, o1: C64) -> C64 {
        self.decay * sigma + self.c0 * o0 + self.c1 * o1
    }
}

/// Integrates one class driven by `omega` (rad/s), starting from the ground
/// state before the first sample.
///
/// Weak mode uses [`LinearStep`], which is exact for a piecewise-linear
/// field and has no stability limit. Full mode uses Strang splitting: exact
/// free precession and relaxation for half steps around an exact rotation
/// by the mid-step field.
pub fn integrate_bloch_class(
    omega: &Pulse,
    delta: f64,
    t1: f64,
    t2: f64,
    mode: BlochMode,
) -> Result<ClassTrace> {
    let site = Site::new(MODULE, "integrate_bloch_class");
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::invalid(site, "relaxation times must be > 0"));
    }
    if omega.len() < 2 {
        return Err(Error::invalid(site, "field needs at least two samples"));
    }
    let dt = omega.dt;
    let mut required = t2 / 10.0;
    if omega.peak_amplitude() > 0.0 {
        let fwhm = omega.fwhm();
        if fwhm > 0.0 {
            // the measured FWHM is interpolated, so allow it 0.1% slack
            required = required.min(fwhm * 1.001 / 50.0);
        }
    }
    if mode == BlochMode::Full && delta != 0.0 {
        required = required.min(1.0 / (10.0 * delta.abs()));
    }
    if dt > required * (1.0 + 1e-9) {
        return Err(Error::StepTooCoarse { site, dt, required });
    }
    let n = omega.len();
    let om = &omega.envelope;
    let mut sigma = vec![C64::new(0.0, 0.0); n];
    let mut w = vec![1.0; n];
    let mut excited = vec![0.0; n];
    match mode {
        BlochMode::Weak => {
            let step = LinearStep::new(delta, t2, dt);
            // the field is taken to switch on linearly from zero over the
            // step before the record
            sigma[0] = step.c1 * om[0];
            for k in 1..n {
                sigma[k] = step.apply(sigma[k - 1], om[k - 1], om[k]);
                let p0 = (om[k - 1].conj() * sigma[k - 1]).im;
                let p1 = (om[k].conj() * sigma[k]).im;
                excited[k] = excited[k - 1] + 0.5 * dt * (p0 + p1);
            }
        }
        BlochMode::Full => {
            let half = (-C64::new(1.0 / t2, delta) * (0.5 * dt)).exp();
            let relax = (-0.5 * dt / t1).exp();
            let free = |s: C64, w: f64| (s * half, 1.0 + (w - 1.0) * relax);
            let (mut s, mut ww) = (C64::new(0.0, 0.0), 1.0);
            for k in 0..n {
                let (o_prev, o_next) = if k == 0 {
                    (C64::new(0.0, 0.0), om[0])
                } else {
                    (om[k - 1], om[k])
                };
                (s, ww) = free(s, ww);
                let mid = 0.5 * (o_prev + o_next);
                let amp = mid.norm();
                if amp > 0.0 {
                    let phase = mid / amp;
                    let rot = s * phase.conj();
                    let (u, v) = (2.0 * rot.im, rot.re);
                    let (c, sn) = ((amp * dt).cos(), (amp * dt).sin());
                    let u2 = u * c + ww * sn;
                    ww = ww * c - u * sn;
                    s = C64::new(v, 0.5 * u2) * phase;
                }
                (s, ww) = free(s, ww);
                sigma[k] = s;
                w[k] = ww;
                excited[k] = 0.5 * (1.0 - ww);
            }
        }
    }
    Ok(ClassTrace { sigma, w, excited })
}
