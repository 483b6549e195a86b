//! `∫ (t-τ)^{-γ} τ^{-θ} dτ` over `(0, t/2)`, `(t/2, t)` and `(0, t)`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::quadrature::adaptive_integrate;
use crate::special::{beta, incomplete_beta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaPart {
    FirstHalf,
    SecondHalf,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCheck {
    pub gamma: f64,
    pub theta: f64,
    pub t: f64,
    pub part: BetaPart,
    pub numeric: f64,
    pub closed_form: f64,
    pub rel_error: f64,
}

const QUAD_REL_TOL: f64 = 1e-14;

/// `∫_0^c x^{p-1} g(x) dx` through `x = c u^{1/p}`, which removes the power
/// singularity at 0. Needs `p > 0`.
pub(crate) fn power_endpoint(p: f64, c: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let pref = c.powf(p) / p;
    let (v, _) = adaptive_integrate(|u| if u == 0.0 { g(0.0) } else { g(c * u.powf(1.0 / p)) }, 0.0, 1.0, QUAD_REL_TOL, 0.0)?;
    Ok(pref * v)
}

fn first_half(gamma: f64, theta: f64, t: f64) -> Result<f64> {
    power_endpoint(1.0 - theta, t / 2.0, |tau| (t - tau).powf(-gamma))
}

fn second_half(gamma: f64, theta: f64, t: f64) -> Result<f64> {
    power_endpoint(1.0 - gamma, t / 2.0, |s| (t - s).powf(-theta))
}

/// Numeric value by substituted adaptive quadrature, and the closed form
/// `C t^{1-γ-θ}` with `C` a complete or half-range incomplete Beta.
pub fn beta_time_integral(gamma: f64, theta: f64, t: f64, part: BetaPart) -> Result<BetaCheck> {
    if !(t > 0.0) {
        return Err(param("t must be positive"));
    }
    let need_theta = matches!(part, BetaPart::FirstHalf | BetaPart::Full);
    let need_gamma = matches!(part, BetaPart::SecondHalf | BetaPart::Full);
    if need_theta && !(theta < 1.0) {
        return Err(param(format!("theta = {theta} must be below 1")));
    }
    if need_gamma && !(gamma < 1.0) {
        return Err(param(format!("gamma = {gamma} must be below 1")));
    }
    let scale = t.powf(1.0 - gamma - theta);
    let (numeric, c) = match part {
        BetaPart::FirstHalf => (first_half(gamma, theta, t)?, incomplete_beta(0.5, 1.0 - theta, 1.0 - gamma)),
        BetaPart::SecondHalf => (second_half(gamma, theta, t)?, incomplete_beta(0.5, 1.0 - gamma, 1.0 - theta)),
        BetaPart::Full => (
            first_half(gamma, theta, t)? + second_half(gamma, theta, t)?,
            beta(1.0 - gamma, 1.0 - theta),
        ),
    };
    let closed_form = c * scale;
    Ok(BetaCheck {
        gamma,
        theta,
        t,
        part,
        numeric,
        closed_form,
        rel_error: (numeric - closed_form).abs() / closed_form.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn elementary_values() {
        let c = beta_time_integral(0.0, 0.0, 2.0, BetaPart::Full).unwrap();
        assert!((c.closed_form - 2.0).abs() < 1e-14 && (c.numeric - 2.0).abs() < 1e-12);
        let c = beta_time_integral(0.5, 0.0, 4.0, BetaPart::Full).unwrap();
        assert!((c.closed_form - 4.0).abs() < 1e-13 && (c.numeric - 4.0).abs() < 1e-10);
        let c = beta_time_integral(0.5, 0.5, 1.0, BetaPart::Full).unwrap();
        assert!((c.closed_form - PI).abs() < 1e-13 && c.rel_error < 1e-8);
    }

    #[test]
    fn half_ranges_allow_large_exponents() {
        let c = beta_time_integral(1.7, 0.3, 0.5, BetaPart::FirstHalf).unwrap();
        assert!(c.rel_error < 1e-10, "{c:?}");
        let c = beta_time_integral(-0.8, 1.9, 7.0, BetaPart::SecondHalf).unwrap();
        assert!(c.rel_error < 1e-10, "{c:?}");
    }

    #[test]
    fn preconditions() {
        assert!(beta_time_integral(0.0, 1.0, 1.0, BetaPart::FirstHalf).is_err());
        assert!(beta_time_integral(1.0, 0.0, 1.0, BetaPart::SecondHalf).is_err());
        assert!(beta_time_integral(0.0, 1.5, 1.0, BetaPart::SecondHalf).is_ok());
        assert!(beta_time_integral(0.2, 0.2, 0.0, BetaPart::Full).is_err());
    }
}
