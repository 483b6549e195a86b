//! Weighted sup norms, the space-time norms `K^β_{α,T}` and the combined
//! weights used by the decay estimates.
//!
//! Every `esssup` is a max over sampled nodes. Each norm has a `_capped`
//! variant restricted to `|x| <= r_cap`, which the probe-stability checks use.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;

/// Exponent tuple `(γ, γ̃, α, β, β̃, β̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub gamma: f64,
    pub tilde_gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tilde_beta: f64,
    pub hat_beta: Option<f64>,
}

impl WeightParams {
    /// Existence-theorem ranges, plus the bilinear-estimate ranges when `β̂` is set.
    pub fn validate(&self, d: usize) -> Result<()> {
        let df = d as f64;
        let Self { gamma: g, tilde_gamma: tg, alpha: a, beta: b, tilde_beta: tb, hat_beta } = *self;
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(param(what.to_string())) };
        check(0.0 <= g && g <= 1.0 && 1.0 <= b && b < df, "need 0 <= gamma <= 1 <= beta < d")?;
        check(0.0 <= tg && tg <= g, "need 0 <= tilde_gamma <= gamma")?;
        check(tb >= 0.0 && b - 2.0 < tb && tb <= b, "need tilde_beta >= 0 and beta - 2 < tilde_beta <= beta")?;
        check(0.0 < a && a < 1.0, "need 0 < alpha < 1")?;
        check(b - tb - 1.0 < a && a < df - tb, "need beta - tilde_beta - 1 < alpha < d - tilde_beta")?;
        if let Some(hb) = hat_beta {
            check(0.0 <= hb && hb <= b, "need 0 <= hat_beta <= beta")?;
            check(a + tb - 1.0 < hb && hb <= a + tb, "need alpha + tilde_beta - 1 < hat_beta <= alpha + tilde_beta")?;
        }
        Ok(())
    }

    /// Looser ranges of the initial-data estimate.
    pub fn validate_initial(&self) -> Result<()> {
        let Self { gamma: g, tilde_gamma: tg, alpha: a, beta: b, tilde_beta: tb, .. } = *self;
        if !(0.0 <= tg && tg <= g && 0.0 <= a && a <= 1.0 && 0.0 <= tb && tb <= b && g <= b) {
            return Err(param("need 0 <= tilde_gamma <= gamma <= beta, 0 <= alpha <= 1, 0 <= tilde_beta <= beta"));
        }
        Ok(())
    }

    /// The three-term weight of the smallness condition at `(|x|, t)`.
    pub fn smallness_weight(&self, r: f64, t: f64) -> f64 {
        r.powf(self.tilde_gamma) * t.powf((self.gamma - self.tilde_gamma) / 2.0)
            + r.powf(self.alpha) * t.powf((1.0 - self.alpha) / 2.0)
            + r.powf(self.tilde_beta) * t.powf((self.beta - self.tilde_beta) / 2.0)
    }
}

/// Fields with a pointwise magnitude.
pub trait Magnitude {
    fn grid(&self) -> &GridSpec;
    fn abs_values(&self) -> Vec<f64>;
}

impl Magnitude for ScalarField {
    fn grid(&self) -> &GridSpec {
        ScalarField::grid(self)
    }
    fn abs_values(&self) -> Vec<f64> {
        self.samples().iter().map(|v| v.abs()).collect()
    }
}

impl Magnitude for VectorField {
    fn grid(&self) -> &GridSpec {
        VectorField::grid(self)
    }
    fn abs_values(&self) -> Vec<f64> {
        self.magnitude()
    }
}

/// `max |x|^β |f(x)|` over nodes.
pub fn weighted_sup_norm<F: Magnitude>(f: &F, beta: f64) -> Result<f64> {
    weighted_sup_norm_capped(f, beta, f64::INFINITY)
}

pub fn weighted_sup_norm_capped<F: Magnitude>(f: &F, beta: f64, r_cap: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(param("weight exponent must be nonnegative"));
    }
    let radii = f.grid().radii();
    Ok(f.abs_values()
        .iter()
        .zip(&radii)
        .filter(|(_, &r)| r <= r_cap)
        .fold(0.0, |m, (v, r)| m.max(r.powf(beta) * v)))
}

/// Geometric sequence of times with one velocity slice per time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    times: Vec<f64>,
    slices: Vec<VectorField>,
}

impl SpaceTimeField {
    pub fn new(times: Vec<f64>, slices: Vec<VectorField>) -> Result<Self> {
        if times.is_empty() || times.len() != slices.len() {
            return Err(param("need one slice per time and at least one time"));
        }
        if times[0] <= 0.0 {
            return Err(param("times must be positive"));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(param("times must be strictly increasing"));
            }
        }
        if times.len() > 2 {
            let r0 = times[1] / times[0];
            if times.windows(2).any(|w| ((w[1] / w[0]) / r0 - 1.0).abs() > 1e-12) {
                return Err(param("times must form a geometric progression"));
            }
        }
        let g = *slices[0].grid();
        if slices.iter().any(|s| *s.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, slices })
    }

    pub fn grid(&self) -> &GridSpec {
        self.slices[0].grid()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[VectorField] {
        &self.slices
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { times: self.times.clone(), slices: self.slices.iter().map(|s| s.scaled(c)).collect() }
    }

    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        if self.times != other.times {
            return Err(param("time grids differ"));
        }
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a.axpy(c, b)).collect::<Result<_>>()?;
        Ok(Self { times: self.times.clone(), slices })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().fold(0.0, |m, s| m.max(s.max_abs()))
    }

    /// Index of the median slice, `(M - 1) / 2`.
    pub fn median_index(&self) -> usize {
        (self.len() - 1) / 2
    }
}

/// `t_min, .., t_max` with `m` geometric steps.
pub fn geometric_times(t_min: f64, t_max: f64, m: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) || m < 2 {
        return Err(param("need 0 < t_min < t_max and at least two times"));
    }
    let step = (t_max / t_min).ln() / (m - 1) as f64;
    Ok((0..m).map(|i| if i == m - 1 { t_max } else { t_min * (step * i as f64).exp() }).collect())
}

fn space_time_max(
    u: &SpaceTimeField,
    t_cap: f64,
    r_cap: f64,
    weight: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let radii = u.grid().radii();
    let mut best = 0.0f64;
    let mut any = false;
    for (t, s) in u.times.iter().zip(&u.slices) {
        if *t > t_cap * (1.0 + 1e-12) {
            break;
        }
        any = true;
        for (v, &r) in s.magnitude().iter().zip(&radii) {
            if r <= r_cap {
                best = best.max(weight(r, *t) * v);
            }
        }
    }
    if !any {
        return Err(param("empty time window"));
    }
    Ok(best)
}

/// `max |x|^α t^{(β-α)/2} |u(x,t)|` over slices with `t <= T`.
pub fn k_norm(u: &SpaceTimeField, alpha: f64, beta: f64, t_cap: f64) -> Result<f64> {
    k_norm_capped(u, alpha, beta, t_cap, f64::INFINITY)
}

pub fn k_norm_capped(u: &SpaceTimeField, alpha: f64, beta: f64, t_cap: f64, r_cap: f64) -> Result<f64> {
    if !(0.0 <= alpha && alpha <= beta) {
        return Err(param(format!("need 0 <= alpha <= beta, got ({alpha}, {beta})")));
    }
    let e = (beta - alpha) / 2.0;
    space_time_max(u, t_cap, r_cap, |r, t| r.powf(alpha) * t.powf(e))
}

/// `max (|x|^γ + t^{γ/2} + |x|^β + t^{β/2}) |u|` over all slices.
pub fn combined_weight_sup(u: &SpaceTimeField, gamma: f64, beta: f64) -> Result<f64> {
    combined_weight_sup_capped(u, gamma, beta, f64::INFINITY)
}

pub fn combined_weight_sup_capped(u: &SpaceTimeField, gamma: f64, beta: f64, r_cap: f64) -> Result<f64> {
    if !(0.0 <= gamma && gamma <= beta) {
        return Err(param("need 0 <= gamma <= beta"));
    }
    space_time_max(u, f64::INFINITY, r_cap, |r, t| {
        r.powf(gamma) + t.powf(gamma / 2.0) + r.powf(beta) + t.powf(beta / 2.0)
    })
}

/// The smallness three-term sup over all slices of a (linear) flow.
pub fn smallness_sup(flow: &SpaceTimeField, params: &WeightParams) -> Result<f64> {
    space_time_max(flow, f64::INFINITY, f64::INFINITY, |r, t| params.smallness_weight(r, t))
}

/// Max of `values` over each ring `| |x| - r | <= h/2`, for every radius.
/// Rings without nodes are dropped.
pub fn ring_maxima(grid: &GridSpec, values: &[f64], radii: &[f64]) -> Vec<(f64, f64)> {
    let half = grid.spacing() / 2.0;
    let node_r = grid.radii();
    let mut best = vec![f64::NEG_INFINITY; radii.len()];
    for (v, &r) in values.iter().zip(&node_r) {
        for (b, &rr) in best.iter_mut().zip(radii) {
            if (r - rr).abs() <= half {
                *b = b.max(*v);
            }
        }
    }
    radii.iter().copied().zip(best).filter(|(_, b)| b.is_finite()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(2, 6.0, 64).unwrap()
    }

    #[test]
    fn clipped_power_has_unit_norm() {
        let g = grid();
        let b = 1.5;
        let f = ScalarField::from_fn(g, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            1f64.min(r.powf(-b))
        });
        let n = weighted_sup_norm(&f, b).unwrap();
        assert!((n - 1.0).abs() <= g.spacing());
    }

    #[test]
    fn gaussian_stationary_point() {
        let g = GridSpec::new(2, 4.0, 256).unwrap();
        let f = ScalarField::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        let n = weighted_sup_norm(&f, 1.0).unwrap();
        let exact = (-0.5f64).exp() / 2f64.sqrt();
        assert!((n - exact).abs() < 1e-3);
    }

    #[test]
    fn k_norm_cancels_exact_power() {
        let g = grid();
        let beta = 1.5;
        let times = geometric_times(0.1, 1.0, 8).unwrap();
        let slices = times
            .iter()
            .map(|t| VectorField::from_fn(g, |_| [t.powf(-beta / 2.0), 0.0, 0.0]))
            .collect();
        let u = SpaceTimeField::new(times, slices).unwrap();
        assert!((k_norm(&u, 0.0, beta, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(k_norm(&u, 0.0, beta, 0.01).is_err());
    }

    #[test]
    fn rejects_non_geometric_times() {
        let g = grid();
        let s = vec![VectorField::zeros(g); 3];
        assert!(SpaceTimeField::new(vec![1.0, 2.0, 3.0], s).is_err());
    }

    #[test]
    fn default_acceptance_params_are_admissible() {
        let p = WeightParams { gamma: 0.5, tilde_gamma: 0.25, alpha: 0.5, beta: 1.5, tilde_beta: 1.0, hat_beta: Some(1.0) };
        p.validate(2).unwrap();
        let bad = WeightParams { alpha: 1.0, ..p };
        assert!(bad.validate(2).is_err());
    }
}
