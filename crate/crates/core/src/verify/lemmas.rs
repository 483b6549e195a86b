//! Checks of the linear estimates: weighted Young, heat and Oseen bounds,
//! and the initial-data estimate.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::field::{ScalarField, TensorField, VectorField};
use crate::fit::{log_window, Criterion, DecayReport};
use crate::grid::GridSpec;
use crate::kernels::{heat_apply, oseen_apply, oseen_decay_profile};
use crate::quadrature::GaussRule;
use crate::special::{beta, gamma};
use crate::spectral::convolution;
use crate::verify::beta::power_endpoint;
use crate::verify::envelope::compensated_power;
use crate::weighted::{ring_maxima, weighted_sup_norm, WeightParams};

pub const LINEAR_TOL: f64 = 0.05;
pub const FLAT_TOL: f64 = 0.15;
/// Fit window for the linear estimates, as log-fractions of the time range:
/// late enough to clear the regularisation scale, early enough to avoid the box.
pub const LINEAR_WINDOW: (f64, f64) = (0.5, 0.9);

fn linear_window(samples: &[(f64, f64)]) -> (f64, f64) {
    log_window(samples[0].0, samples[samples.len() - 1].0, LINEAR_WINDOW.0, LINEAR_WINDOW.1)
}

/// `∫_{R^d \ [-1,1]^d} |y|^{-s} dy` for `s > d`, by tensor Gauss–Legendre over one face.
pub fn exterior_power_mass(d: usize, s: f64) -> Result<f64> {
    if !(s > d as f64) {
        return Err(param("exterior mass needs s > d"));
    }
    let rule = GaussRule::new(64)?;
    let face = match d {
        2 => rule.integrate(-1.0, 1.0, |a| (1.0 + a * a).powf(-s / 2.0)),
        3 => rule.integrate(-1.0, 1.0, |a| rule.integrate(-1.0, 1.0, |b| (1.0 + a * a + b * b).powf(-s / 2.0))),
        _ => return Err(param("dimension must be 2 or 3")),
    };
    Ok(2.0 * d as f64 * face / (s - d as f64))
}

/// `(|·|^{-a} * |·|^{-b})(x) = C |x|^{1-a-b}` on the line, from three Beta values.
pub fn young_constant_1d(a: f64, b: f64) -> Result<f64> {
    if !(0.0 < a && a < 1.0 && 0.0 < b && b < 1.0 && a + b > 1.0) {
        return Err(param("need 0 < a, b < 1 < a + b"));
    }
    Ok(beta(1.0 - b, a + b - 1.0) + beta(1.0 - a, 1.0 - b) + beta(1.0 - a, a + b - 1.0))
}

/// The same constant as `∫_R |1-s|^{-a} |s|^{-b} ds`, by substituted adaptive quadrature.
pub fn young_constant_1d_quadrature(a: f64, b: f64) -> Result<f64> {
    young_constant_1d(a, b)?;
    let q = a + b - 1.0;
    let neg_near = power_endpoint(1.0 - b, 1.0, |w| (1.0 + w).powf(-a))?;
    let neg_far = power_endpoint(q, 1.0, |v| (1.0 + v).powf(-a))?;
    let left = power_endpoint(1.0 - b, 0.5, |s| (1.0 - s).powf(-a))?;
    let right = power_endpoint(1.0 - a, 0.5, |u| (1.0 - u).powf(-b))?;
    let above = power_endpoint(1.0 - a, 1.0, |u| (1.0 + u).powf(-b))?;
    let far = power_endpoint(q, 1.0, |v| (1.0 + v).powf(-b))?;
    Ok(neg_near + neg_far + left + right + above + far)
}

/// Composition constant of two Riesz potentials in `R^d`:
/// `|x|^{-a} * |x|^{-b} = C |x|^{d-a-b}`.
pub fn riesz_composition_constant(d: usize, a: f64, b: f64) -> f64 {
    let df = d as f64;
    std::f64::consts::PI.powf(df / 2.0) * gamma((df - a) / 2.0) * gamma((df - b) / 2.0) * gamma((a + b - df) / 2.0)
        / (gamma(a / 2.0) * gamma(b / 2.0) * gamma(df - (a + b) / 2.0))
}

/// Dyadic radii `2^{j/per_octave}` in `[2^-3, 2^3] ∩ [2h, L/2]`.
pub fn dyadic_radii(grid: &GridSpec, per_octave: usize) -> Vec<f64> {
    let lo = 2.0 * grid.spacing();
    let hi = grid.half_width() / 2.0;
    let p = per_octave.max(1) as i32;
    (-3 * p..=3 * p)
        .map(|j| 2f64.powf(j as f64 / p as f64))
        .filter(|&r| r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12))
        .collect()
}

/// Spectral `f * g` plus the exterior contribution of the common tail
/// `|y|^{-(α+β)}` beyond the box, for power-like test pairs.
pub fn completed_convolution(f: &ScalarField, g: &ScalarField, alpha: f64, beta: f64) -> Result<ScalarField> {
    let grid = *f.grid();
    let d = grid.dim();
    let s = alpha + beta;
    let c = convolution(f, g)?;
    let tail = grid.half_width().powf(d as f64 - s) * exterior_power_mass(d, s)?;
    Ok(ScalarField::from_vec_unchecked(grid, c.samples().iter().map(|v| v + tail).collect()))
}

/// Ring-maximum ratio `|x|^{α+β-d} |f*g| / (‖f‖_α ‖g‖_β)` at dyadic radii;
/// passes iff the log-log trend is flat within 0.15.
pub fn verify_weighted_young(alpha: f64, beta: f64, grid: GridSpec, per_octave: usize) -> Result<DecayReport> {
    let d = grid.dim() as f64;
    if !(0.0 < alpha && alpha < d && 0.0 < beta && beta < d && alpha + beta > d) {
        return Err(param(format!("inadmissible pair ({alpha}, {beta})")));
    }
    let radii = dyadic_radii(&grid, per_octave);
    if radii.len() < 5 {
        return Err(param("dyadic window holds fewer than 5 radii at this resolution"));
    }
    let eps = 2.0 * grid.spacing();
    let f = compensated_power(grid, alpha, eps);
    let g = compensated_power(grid, beta, eps);
    young_report(&f, &g, alpha, beta, &radii)
}

pub(crate) fn young_report(f: &ScalarField, g: &ScalarField, alpha: f64, beta: f64, radii: &[f64]) -> Result<DecayReport> {
    let grid = *f.grid();
    let d = grid.dim() as f64;
    let name = format!("weighted-young a={alpha} b={beta}");
    let window = (radii[0], radii[radii.len() - 1]);
    let nf = weighted_sup_norm(f, alpha)?;
    let ng = weighted_sup_norm(g, beta)?;
    if nf == 0.0 || ng == 0.0 {
        let samples = radii.iter().map(|&r| (r, 0.0)).collect();
        return DecayReport::from_fit(name, Criterion::Flat { tol: FLAT_TOL }, 0.0, samples, window);
    }
    let w = completed_convolution(f, g, alpha, beta)?;
    let e = alpha + beta - d;
    let vals: Vec<f64> = w.samples().iter().zip(grid.radii()).map(|(v, r)| r.powf(e) * v.abs() / (nf * ng)).collect();
    let samples = ring_maxima(&grid, &vals, radii);
    DecayReport::from_fit(name, Criterion::Flat { tol: FLAT_TOL }, 0.0, samples, window)
}

/// Ring maxima of `|f*g|` itself, whose slope should be `-(α+β-d)`.
pub fn young_convolution_slope(alpha: f64, beta: f64, grid: GridSpec, per_octave: usize) -> Result<DecayReport> {
    let d = grid.dim() as f64;
    let radii = dyadic_radii(&grid, per_octave);
    let eps = 2.0 * grid.spacing();
    let f = compensated_power(grid, alpha, eps);
    let g = compensated_power(grid, beta, eps);
    let w = completed_convolution(&f, &g, alpha, beta)?;
    let vals: Vec<f64> = w.samples().iter().map(|v| v.abs()).collect();
    let samples = ring_maxima(&grid, &vals, &radii);
    let window = (radii[0], radii[radii.len() - 1]);
    DecayReport::from_fit(
        format!("convolution-exponent a={alpha} b={beta}"),
        Criterion::Slope { tol: 0.1 },
        -(alpha + beta - d),
        samples,
        window,
    )
}

fn check_linear_window(gamma: f64, beta: f64, grid: &GridSpec, times: &[f64]) -> Result<()> {
    if !(0.0 <= gamma && gamma <= beta && beta < grid.dim() as f64) {
        return Err(param("need 0 <= gamma <= beta < d"));
    }
    let slack = 1e-9;
    if times.len() < 5
        || times.iter().any(|&t| {
            t < grid.min_resolvable_time() * (1.0 - slack) || t > grid.max_resolvable_time() * (1.0 + slack)
        })
    {
        return Err(param("need at least 5 times inside [h^2, (L/6)^2]"));
    }
    Ok(())
}

/// Slope of `log ‖e^{tΔ} f‖_{L∞(|x|^γ)}` against `log t`; passes iff it is at
/// most `-(β-γ)/2 + 0.05`.
pub fn verify_heat_estimate(gamma: f64, beta: f64, grid: GridSpec, times: &[f64]) -> Result<DecayReport> {
    check_linear_window(gamma, beta, &grid, times)?;
    let f = compensated_power(grid, beta, 2.0 * grid.spacing());
    heat_report(&f, gamma, beta, times)
}

pub(crate) fn heat_report(f: &ScalarField, gamma: f64, beta: f64, times: &[f64]) -> Result<DecayReport> {
    let samples = times
        .iter()
        .map(|&t| Ok((t, weighted_sup_norm(&heat_apply(f, t)?, gamma)?)))
        .collect::<Result<Vec<_>>>()?;
    let window = linear_window(&samples);
    DecayReport::from_fit(
        format!("heat g={gamma} b={beta}"),
        Criterion::SlopeAtMost { tol: LINEAR_TOL },
        -(beta - gamma) / 2.0,
        samples,
        window,
    )
}

/// Same pipeline for `e^{tΔ} P ∇·F` with `F_{11} = f`, target `-(β+1-γ)/2`.
pub fn verify_oseen_estimate(gamma: f64, beta: f64, grid: GridSpec, times: &[f64]) -> Result<DecayReport> {
    check_linear_window(gamma, beta, &grid, times)?;
    let f = compensated_power(grid, beta, 2.0 * grid.spacing());
    oseen_report(&TensorField::single(f, 0, 0), gamma, beta, times)
}

pub(crate) fn oseen_report(f: &TensorField, gamma: f64, beta: f64, times: &[f64]) -> Result<DecayReport> {
    let samples = times
        .iter()
        .map(|&t| Ok((t, weighted_sup_norm(&oseen_apply(f, t)?, gamma)?)))
        .collect::<Result<Vec<_>>>()?;
    let window = linear_window(&samples);
    DecayReport::from_fit(
        format!("oseen g={gamma} b={beta}"),
        Criterion::SlopeAtMost { tol: LINEAR_TOL },
        -(beta + 1.0 - gamma) / 2.0,
        samples,
        window,
    )
}

/// Sup over probe times of the three-term weighted heat flow of `f`, divided by
/// `‖f‖_{L∞(|x|^γ)} + ‖f‖_{L∞(|x|^β)}`; passes iff flat within 0.15 over the
/// whole probe range.
pub fn verify_initial_estimate(f: &VectorField, params: &WeightParams, times: &[f64]) -> Result<DecayReport> {
    params.validate_initial()?;
    if times.len() < 5 {
        return Err(param("need at least 5 probe times"));
    }
    let rhs = weighted_sup_norm(f, params.gamma)? + weighted_sup_norm(f, params.beta)?;
    let radii = f.grid().radii();
    let samples = times
        .iter()
        .map(|&t| {
            if rhs == 0.0 {
                return Ok((t, 0.0));
            }
            let flow = heat_apply(f, t)?;
            let s = flow
                .magnitude()
                .iter()
                .zip(&radii)
                .fold(0.0f64, |m, (v, &r)| m.max(params.smallness_weight(r, t) * v));
            Ok((t, s / rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    let window = (times[0], times[times.len() - 1]);
    DecayReport::from_fit("initial-estimate", Criterion::Flat { tol: FLAT_TOL }, 0.0, samples, window)
}

/// Flatness of the `(1+|y|)^{d+1}`-weighted Oseen profile.
pub fn verify_oseen_decay(grid: GridSpec, t: f64, n_radii: usize) -> Result<DecayReport> {
    let samples = oseen_decay_profile(grid, t, n_radii)?;
    let window = (samples[0].0, samples[samples.len() - 1].0);
    DecayReport::from_fit(format!("oseen-profile t={t:.6}"), Criterion::Flat { tol: FLAT_TOL }, 0.0, samples, window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCrossCheck {
    pub name: String,
    pub value: f64,
    pub oracle: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// The line case `a = b = 3/4` of the weighted Young constant, closed form
/// against quadrature.
pub fn young_cross_check_1d(a: f64, b: f64) -> Result<ScalarCrossCheck> {
    let value = young_constant_1d(a, b)?;
    let oracle = young_constant_1d_quadrature(a, b)?;
    let rel_error = (value - oracle).abs() / oracle.abs();
    Ok(ScalarCrossCheck { name: format!("young-1d a={a} b={b}"), value, oracle, rel_error, tolerance: 1e-6, pass: rel_error <= 1e-6 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_mass_of_disc_complement_is_bracketed() {
        // Between the complements of the inscribed and circumscribed discs.
        let s = 2.5;
        let m = exterior_power_mass(2, s).unwrap();
        let disc = |r: f64| 2.0 * std::f64::consts::PI * r.powf(2.0 - s) / (s - 2.0);
        assert!(m < disc(1.0) && m > disc(2f64.sqrt()));
    }

    #[test]
    fn dyadic_window() {
        let g = GridSpec::new(2, 16.0, 128).unwrap();
        assert_eq!(dyadic_radii(&g, 1), vec![0.5, 1.0, 2.0, 4.0, 8.0]);
    }
}
