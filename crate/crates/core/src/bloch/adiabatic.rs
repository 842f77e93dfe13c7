use super::MODULE;
use crate::error::{Error, Result, Site};

/// Excited population of a far-detuned atom following the field
/// adiabatically, `Ω²/(4Δ²)`.
pub fn adiabatic_population(omega: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::domain(
            Site::new(MODULE, "adiabatic_population"),
            "undefined on resonance",
        ));
    }
    Ok(omega * omega / (4.0 * delta * delta))
}

/// Ground and excited amplitudes `(c₊, c₋)` of the adiabatic dressed state.
pub fn adiabatic_state_coefficients(omega: f64, delta: f64) -> Result<(f64, f64)> {
    if omega == 0.0 && delta == 0.0 {
        return Err(Error::domain(
            Site::new(MODULE, "adiabatic_state_coefficients"),
            "dressed state undefined for zero field on resonance",
        ));
    }
    let r = omega.hypot(delta);
    Ok((
        ((r + delta) / (2.0 * r)).sqrt(),
        ((r - delta) / (2.0 * r)).sqrt(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_examples() {
        assert_eq!(adiabatic_population(0.0, 3.0).unwrap(), 0.0);
        assert!((adiabatic_population(0.1, 1.0).unwrap() - 2.5e-3).abs() < 1e-18);
        assert!(adiabatic_population(1.0, 0.0).is_err());
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(adiabatic_state_coefficients(0.0, 2.0).unwrap(), (1.0, 0.0));
        let (_, cm) = adiabatic_state_coefficients(1.0, 1.0).unwrap();
        let want = (2f64.sqrt() - 1.0) / (2.0 * 2f64.sqrt());
        assert!((cm * cm - want).abs() < 1e-15);
        assert!(adiabatic_state_coefficients(0.0, 0.0).is_err());
    }

    #[test]
    fn second_order_agreement() {
        let (_, cm) = adiabatic_state_coefficients(0.1, 1.0).unwrap();
        let p = adiabatic_population(0.1, 1.0).unwrap();
        assert!((cm * cm / p - 1.0).abs() <= 0.01);
    }
}
