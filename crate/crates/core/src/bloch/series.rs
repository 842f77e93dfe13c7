//! Asymptotic expansion of the driven coherence in powers of `1/(iΔ + 1/T₂)`.

use super::MODULE;
use crate::error::{Error, Result, Site};
use crate::pulse::Pulse;
use crate::C64;

/// `σ ≈ (i/2) Σ_{n ≤ order} (−1)ⁿ Ω⁽ⁿ⁾(t) / (iΔ + 1/T₂)ⁿ⁺¹`, with the time
/// derivatives taken by central differences. `order = 1` keeps the real
/// `Ω/(2Δ)` term and the first dispersive correction `i Ω̇/(2Δ²)`.
pub fn series_coherence(omega: &Pulse, delta: f64, t2: f64, order: usize) -> Result<Vec<C64>> {
    let site = Site::new(MODULE, "series_coherence");
    if delta == 0.0 && t2.is_infinite() {
        return Err(Error::domain(
            site,
            "the expansion needs a non-zero detuning or finite T2",
        ));
    }
    let a = C64::new(1.0 / t2, delta);
    let mut deriv = omega.envelope.clone();
    let mut out = vec![C64::new(0.0, 0.0); omega.len()];
    let mut factor = C64::new(0.0, 0.5) / a;
    for n in 0..=order {
        if n > 0 {
            deriv = Pulse {
                envelope: deriv,
                ..omega.clone()
            }
            .derivative();
            factor *= -1.0 / a;
        }
        for (o, d) in out.iter_mut().zip(&deriv) {
            *o += factor * d;
        }
    }
    Ok(out)
}
