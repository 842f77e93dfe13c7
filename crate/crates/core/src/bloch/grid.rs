use serde::{Deserialize, Serialize};

use super::MODULE;
use crate::error::{Error, Result, Site};
use crate::medium::{hole_profile, SpectralHole};

/// Shape of the detuning grid, in units of the hole width Δ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Uniform spacing in the core, as a fraction of Δ₀.
    pub inner_spacing: f64,
    /// Half-extent of the uniform core.
    pub inner_extent: f64,
    /// Outermost node.
    pub wing_extent: f64,
    /// Log-spaced nodes on each wing.
    pub wing_nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            inner_spacing: 0.01,
            inner_extent: 3.0,
            wing_extent: 500.0,
            wing_nodes: 220,
        }
    }
}

impl GridConfig {
    /// A lighter grid for pulses whose spectrum is far narrower than the
    /// hole.
    pub fn coarse() -> Self {
        Self {
            inner_spacing: 0.05,
            inner_extent: 3.0,
            wing_extent: 400.0,
            wing_nodes: 100,
        }
    }
}

/// Quadrature nodes over the inhomogeneous line. `weights[j]` carries
/// `G′(Δ_j) dΔ_j / G` in rad/s, so that `Σ w_j f(Δ_j) ≈ ∫ (1 − hole) f dΔ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetuningGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub hole: SpectralHole,
}

impl DetuningGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_j f(Δ_j)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&d, &w)| w * f(d))
            .sum()
    }

    /// Trapezoid weights for `nodes` without the hole factor: the grid as a
    /// plain quadrature over Δ.
    pub fn bare_weights(&self) -> Vec<f64> {
        trapezoid(&self.nodes)
    }
}

/// Trapezoid weights on an increasing grid. The outermost weights also
/// absorb the tails `∫_{|Δ|>Δ_N} dΔ/Δ²` by adding `|Δ_N|`, which is exact for
/// the `1/Δ²` fall-off of every integrand the engine needs.
fn trapezoid(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (nodes[i + 1] - nodes[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w[0] += nodes[0].abs();
    w[n - 1] += nodes[n - 1].abs();
    w
}

/// Symmetric grid: uniform core `|Δ| < inner_extent·Δ₀` plus geometric wings
/// out to `wing_extent·Δ₀`, weighted by `1 − hole(Δ)`.
pub fn build_detuning_grid(hole: &SpectralHole, config: &GridConfig) -> Result<DetuningGrid> {
    let site = Site::new(MODULE, "build_detuning_grid");
    let d0 = hole.width_fwhm;
    let c = config;
    if !(c.inner_spacing > 0.0 && c.inner_spacing <= 0.1) {
        return Err(Error::grid(
            site,
            format!(
                "inner spacing must lie in (0, 0.1]·Δ₀, got {}",
                c.inner_spacing
            ),
        ));
    }
    if !(c.inner_extent >= 3.0) {
        return Err(Error::grid(
            site,
            format!(
                "uniform core must reach at least 3·Δ₀, got {}",
                c.inner_extent
            ),
        ));
    }
    if !(c.wing_extent >= 50.0) {
        return Err(Error::grid(
            site,
            format!("wing extent {}·Δ₀ is below 50·Δ₀; the truncated tail would bias the delay by more than 2%", c.wing_extent),
        ));
    }
    if c.wing_extent <= c.inner_extent || c.wing_nodes == 0 {
        return Err(Error::grid(
            site,
            "wings must extend beyond the core and carry at least one node",
        ));
    }
    // core nodes sit at half-integer multiples of the spacing, so no node
    // falls on the hole centre where (1 − hole)/Δ² must be taken as a limit
    let m = (c.inner_extent / c.inner_spacing).round() as i64;
    let h = c.inner_extent * d0 / m as f64;
    let core: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) * h).collect();
    let last = core[core.len() - 1];
    let ratio = (c.wing_extent * d0 / last).powf(1.0 / c.wing_nodes as f64);
    let positive: Vec<f64> = core
        .iter()
        .cloned()
        .chain((1..=c.wing_nodes).map(|k| last * ratio.powi(k as i32)))
        .collect();
    let mut nodes: Vec<f64> = positive.iter().rev().map(|x| -x).collect();
    nodes.extend(positive.iter().cloned());
    let weights = trapezoid(&nodes)
        .into_iter()
        .zip(&nodes)
        .map(|(w, &d)| w * (1.0 - hole_profile(d, hole)))
        .collect();
    Ok(DetuningGrid {
        nodes,
        weights,
        hole: *hole,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn hole(depth: f64) -> SpectralHole {
        SpectralHole::new(0.0, TAU * 860e3, depth).unwrap()
    }

    #[test]
    fn default_grid_invariants() {
        let g = build_detuning_grid(&hole(1.0), &GridConfig::default()).unwrap();
        let n = g.len();
        let d0 = TAU * 860e3;
        for k in 0..n {
            assert_eq!(g.nodes[k], -g.nodes[n - 1 - k]);
        }
        assert!(g.nodes[n - 1] >= 200.0 * d0);
        for w in g.nodes.windows(2) {
            if w[1].abs() <= 3.0 * d0 && w[0].abs() <= 3.0 * d0 {
                assert!(w[1] - w[0] <= d0 / 10.0 + 1e-9);
            }
        }
    }

    #[test]
    fn hole_integrand_quadrature() {
        let d0 = TAU * 860e3;
        let g = build_detuning_grid(&hole(1.0), &GridConfig::default()).unwrap();
        // ∫ (1/Δ²)(1 − hole) dΔ = ∫ dΔ/(Δ² + Δ₀²/4) = 2π/Δ₀
        let q = g.integrate(|d| 1.0 / (d * d));
        let exact = TAU / d0;
        assert!((q / exact - 1.0).abs() < 1e-3, "{}", q / exact);
    }

    #[test]
    fn zero_depth_wing_coverage() {
        let d0 = TAU * 860e3;
        let g = build_detuning_grid(&hole(0.0), &GridConfig::default()).unwrap();
        let q = g.integrate(|d| 1.0 / (d * d + d0 * d0));
        assert!((q / (PI / d0) - 1.0).abs() < 1e-3);
        let g = build_detuning_grid(&hole(0.0), &GridConfig::coarse()).unwrap();
        let half = 0.5 * d0;
        let q = g.integrate(|d| 1.0 / (d * d + half * half));
        assert!((q / (PI / half) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn odd_integrands_cancel() {
        let g = build_detuning_grid(&hole(1.0), &GridConfig::default()).unwrap();
        let even = g.integrate(|d| 1.0 / (1.0 + d.abs()));
        let odd = g.integrate(|d| d / (1.0 + d * d));
        assert!(odd.abs() < 1e-12 * even);
    }

    #[test]
    fn short_wings_are_refused() {
        let c = GridConfig {
            wing_extent: 40.0,
            ..Default::default()
        };
        assert!(matches!(
            build_detuning_grid(&hole(1.0), &c),
            Err(Error::Grid { .. })
        ));
    }
}
