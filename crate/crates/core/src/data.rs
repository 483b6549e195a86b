//! Divergence-free initial data with prescribed algebraic decay.
//!
//! Both kinds are curls of a radial potential `psi` with `psi ~ |x|^{-(β-1)}`,
//! so `|u_0| ~ |x|^{-β}`. Differentiation is spectral, which makes the
//! discrete divergence vanish to round-off.
//!
//! The potential is blended to a constant between `0.55 L` and `0.95 L`,
//! which keeps `u_0` smooth across the periodic boundary. Inside `0.55 L` the
//! profile is untouched.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::special::{expint_e1, heat_regularized_power};
use crate::spectral::curl_of_potential;

pub const TAPER_START: f64 = 0.55;
pub const TAPER_END: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataKind {
    /// `psi = (1 + (r/core)^2)^{-(β-1)/2}`; `core = 1` is the classic vortex.
    Vortex { core: f64 },
    /// `psi = core^{β-1} e^{(core^2/4)Δ} |x|^{-(β-1)}`, the heat-smoothed power.
    /// Its linear flow stays exactly self-similar in `t + core^2/4`.
    CurlPotential { core: f64 },
}

impl DataKind {
    pub fn core(&self) -> f64 {
        match *self {
            DataKind::Vortex { core } | DataKind::CurlPotential { core } => core,
        }
    }
}

/// Radial profile of the unit-amplitude potential.
pub fn potential_profile(kind: DataKind, d: usize, beta: f64, r: f64) -> f64 {
    let b = beta - 1.0;
    let core = kind.core();
    let rho = r / core;
    match kind {
        DataKind::Vortex { .. } => {
            if b == 0.0 {
                -0.5 * (1.0 + rho * rho).ln()
            } else {
                (1.0 + rho * rho).powf(-b / 2.0)
            }
        }
        DataKind::CurlPotential { .. } => {
            if b == 0.0 {
                if d == 2 {
                    // e^{sΔ} log|x| in the plane, s = core^2/4
                    let z = rho * rho;
                    if z == 0.0 {
                        0.5 * 0.577_215_664_901_532_9
                    } else {
                        -0.5 * (z.ln() + expint_e1(z))
                    }
                } else {
                    -0.5 * (1.0 + rho * rho).ln()
                }
            } else {
                core.powf(b) * heat_regularized_power(d, b, core * core / 4.0, r)
            }
        }
    }
}

fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Unit-amplitude tapered potential centred at `center`.
pub fn potential(kind: DataKind, beta: f64, grid: GridSpec, center: &[f64]) -> Result<ScalarField> {
    let d = grid.dim();
    if !(1.0..(d as f64)).contains(&beta) {
        return Err(param(format!("decay exponent beta = {beta} outside [1, {d})")));
    }
    let core = kind.core();
    if !(core >= 2.0 * grid.spacing() * (1.0 - 1e-12)) {
        return Err(param(format!(
            "envelope unresolvable: decay scale {core} below 2h = {}",
            2.0 * grid.spacing()
        )));
    }
    if center.len() != d {
        return Err(param("centre dimension does not match grid"));
    }
    let l = grid.half_width();
    let (r1, r2) = (TAPER_START * l, TAPER_END * l);
    let outer = potential_profile(kind, d, beta, r2);
    Ok(ScalarField::from_fn(grid, |x| {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rc: f64 = x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
        let chi = smoothstep((r2 - r) / (r2 - r1));
        if chi == 0.0 {
            outer
        } else {
            chi * potential_profile(kind, d, beta, rc) + (1.0 - chi) * outer
        }
    }))
}

/// `u_0 = A curl(psi)`, centred at the origin.
pub fn make_divfree_data(kind: DataKind, beta: f64, amplitude: f64, grid: GridSpec) -> Result<VectorField> {
    make_divfree_data_at(kind, beta, amplitude, grid, &vec![0.0; grid.dim()])
}

pub fn make_divfree_data_at(
    kind: DataKind,
    beta: f64,
    amplitude: f64,
    grid: GridSpec,
    center: &[f64],
) -> Result<VectorField> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(param("amplitude must be finite and nonnegative"));
    }
    let psi = potential(kind, beta, grid, center)?;
    if amplitude == 0.0 {
        return Ok(VectorField::zeros(grid));
    }
    Ok(curl_of_potential(&psi.scaled(amplitude)))
}

/// `Σ a_i curl(psi(· - c_i))`; amplitudes may have either sign.
pub fn make_divfree_cluster(
    kind: DataKind,
    beta: f64,
    grid: GridSpec,
    centers: &[Vec<f64>],
    amplitudes: &[f64],
) -> Result<VectorField> {
    if centers.is_empty() || centers.len() != amplitudes.len() {
        return Err(param("need one amplitude per centre"));
    }
    let mut u = VectorField::zeros(grid);
    for (c, &a) in centers.iter().zip(amplitudes) {
        let v = make_divfree_data_at(kind, beta, a.abs(), grid, c)?;
        u = u.axpy(a.signum(), &v)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::fit_decay_exponent;
    use crate::spectral::divergence;
    use crate::weighted::ring_maxima;

    #[test]
    fn zero_amplitude() {
        let g = GridSpec::new(2, 8.0, 64).unwrap();
        let u = make_divfree_data(DataKind::Vortex { core: 1.0 }, 1.5, 0.0, g).unwrap();
        assert_eq!(u.max_abs(), 0.0);
    }

    fn weighted_tail(kind: DataKind, g: GridSpec, lo: f64) -> Vec<(f64, f64)> {
        let u = make_divfree_data(kind, 1.5, 1.0, g).unwrap();
        assert!(divergence(&u).max_abs() <= 1e-10 * u.max_abs());
        let hi = g.half_width() / 2.0;
        let radii: Vec<f64> = (0..10).map(|i| lo * (hi / lo).powf(i as f64 / 9.0)).collect();
        let w: Vec<f64> = u.magnitude().iter().zip(g.radii()).map(|(m, r)| m * r.powf(1.5)).collect();
        ring_maxima(&g, &w, &radii)
    }

    #[test]
    fn curl_potential_has_flat_weighted_tail() {
        let g = GridSpec::new(2, 24.0, 256).unwrap();
        let prof = weighted_tail(DataKind::CurlPotential { core: 2.0 * g.spacing() }, g, 1.0);
        let s = fit_decay_exponent(&prof, (1.0, g.half_width() / 2.0)).unwrap();
        assert!(s.slope.abs() < 0.1, "slope {}", s.slope);
    }

    #[test]
    fn classic_vortex_tail_is_bounded_and_flattening() {
        // |x|^1.5 |u| -> 1/2 like 1 - O(|x|^-2), so only the outer octave is flat
        let g = GridSpec::new(2, 24.0, 256).unwrap();
        let prof = weighted_tail(DataKind::Vortex { core: 1.0 }, g, g.half_width() / 4.0);
        assert!(prof.iter().all(|p| p.1 <= 0.5));
        let s = fit_decay_exponent(&prof, (g.half_width() / 4.0, g.half_width() / 2.0)).unwrap();
        assert!(s.slope.abs() < 0.1, "slope {}", s.slope);
    }

    #[test]
    fn unresolvable_and_out_of_range() {
        let g = GridSpec::new(2, 8.0, 64).unwrap();
        assert!(make_divfree_data(DataKind::CurlPotential { core: 0.2 }, 1.5, 1.0, g).is_err());
        assert!(make_divfree_data(DataKind::Vortex { core: 1.0 }, 2.0, 1.0, g).is_err());
        assert!(make_divfree_data(DataKind::Vortex { core: 1.0 }, 0.5, 1.0, g).is_err());
    }

    #[test]
    fn log_potential_gives_lamb_oseen() {
        let core: f64 = 0.5;
        let r: f64 = 1.3;
        let dr = 1e-5;
        let k = DataKind::CurlPotential { core };
        let slope = (potential_profile(k, 2, 1.0, r + dr) - potential_profile(k, 2, 1.0, r - dr)) / (2.0 * dr);
        let exact = -(1.0 - (-(r * r) / (core * core)).exp()) / r;
        assert!((slope - exact).abs() < 1e-8);
    }
}
