//! The Duhamel bilinear operator and the Picard construction of mild solutions
//!
//! ```text
//! u(t) = e^{tΔ} u_0 - B(u, u)(t),   B(u, v)(t) = ∫_0^t e^{(t-τ)Δ} P ∇·(u ⊗ v)(τ) dτ
//! ```
//!
//! # Time quadrature
//!
//! `B` is evaluated at the stored slice times. The interval is split at `t/2`.
//! The lower half uses `s = sqrt(τ)` and the upper half `s = sqrt(t - τ)`.
//! Each half is further cut at every stored slice time it contains, and
//! every piece gets a `q`-point Gauss–Legendre rule in `s`. Between slices the
//! fields are linear in `τ`; aligning panels with slices keeps the integrand
//! smooth on each panel. Below `t_1` the first slice is held.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{make_divfree_data_at, DataKind};
use crate::error::{param, Error, Result};
use crate::field::VectorField;
use crate::grid::GridSpec;
use crate::kernels::{heat_spectral, oseen_accumulate};
use crate::quadrature::GaussRule;
use crate::spectral::{divergence, fft_nd, vector_to_spectral, SpectralField, WaveTable};
use crate::weighted::{geometric_times, k_norm, smallness_sup, SpaceTimeField, WeightParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub t_min: f64,
    pub t_max: f64,
    pub slices: usize,
    /// Gauss–Legendre nodes per panel.
    pub quad_order: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub delta: f64,
    pub params: WeightParams,
    /// Calibrated bilinear constant; required unless `override_smallness`.
    pub eta_hat: Option<f64>,
    pub override_smallness: bool,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let slack = 1.0 + 1e-12;
        if self.t_min * slack < g.min_resolvable_time() {
            return Err(param(format!("t_min = {} below h^2 = {}", self.t_min, g.min_resolvable_time())));
        }
        if self.t_max > g.max_resolvable_time() * slack {
            return Err(param(format!("t_max = {} above (L/6)^2 = {}", self.t_max, g.max_resolvable_time())));
        }
        if !(self.t_max > self.t_min) || self.slices < 2 {
            return Err(param("need t_max > t_min and at least two slices"));
        }
        if self.quad_order < 8 {
            return Err(param("quadrature order must be at least 8"));
        }
        if !(self.tol > 0.0) || !(self.delta > 0.0) {
            return Err(param("tolerance and smallness must be positive"));
        }
        if self.max_iter == 0 {
            return Err(param("need at least one Picard iteration"));
        }
        self.params.validate(g.dim())
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        geometric_times(self.t_min, self.t_max, self.slices)
    }
}

/// `(τ, weight)` pairs approximating `∫_0^t g(τ) dτ` for `t = times[m]`.
pub fn duhamel_nodes(times: &[f64], m: usize, rule: &GaussRule) -> Vec<(f64, f64)> {
    let t = times[m];
    let half = 0.5 * t;
    let mut out = Vec::new();
    let mut lower = vec![0.0];
    lower.extend(times.iter().copied().filter(|&ti| ti < half));
    lower.push(half);
    for w in lower.windows(2) {
        for (s, wt) in rule.on(w[0].sqrt(), w[1].sqrt()) {
            out.push((s * s, 2.0 * s * wt));
        }
    }
    let mut upper = vec![half];
    upper.extend(times.iter().copied().filter(|&ti| ti > half && ti < t));
    upper.push(t);
    for w in upper.windows(2) {
        for (s, wt) in rule.on((t - w[1]).sqrt(), (t - w[0]).sqrt()) {
            out.push((t - s * s, 2.0 * s * wt));
        }
    }
    out
}

/// Linear interpolation weights `(i, j, w_i, w_j)`; the first slice is held below `t_1`.
fn interp(times: &[f64], tau: f64) -> Result<(usize, usize, f64, f64)> {
    if tau <= times[0] {
        return Ok((0, 0, 1.0, 0.0));
    }
    let last = times.len() - 1;
    if tau > times[last] * (1.0 + 1e-12) {
        return Err(param(format!("τ = {tau} beyond the last stored slice")));
    }
    let k = times.partition_point(|&ti| ti < tau).min(last).max(1) - 1;
    let lam = ((tau - times[k]) / (times[k + 1] - times[k])).clamp(0.0, 1.0);
    Ok((k, k + 1, 1.0 - lam, lam))
}

fn field_at(u: &SpaceTimeField, w: (usize, usize, f64, f64)) -> Vec<Vec<f64>> {
    let (i, j, wi, wj) = w;
    let a = &u.slices()[i];
    let b = &u.slices()[j];
    (0..a.grid().dim())
        .map(|c| {
            a.component(c)
                .samples()
                .iter()
                .zip(b.component(c).samples())
                .map(|(x, y)| wi * x + wj * y)
                .collect()
        })
        .collect()
}

fn duhamel_slice(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    m: usize,
    rule: &GaussRule,
    table: &WaveTable,
    symmetric: bool,
) -> Result<VectorField> {
    let grid = *u.grid();
    let d = grid.dim();
    let n = grid.len();
    let t = u.times()[m];
    let scale = 1.0 / n as f64;
    let mut acc = vec![vec![Complex64::default(); n]; d];
    let mut w = vec![vec![Complex64::default(); n]; d * d];
    for (tau, weight) in duhamel_nodes(u.times(), m, rule) {
        let iw = interp(u.times(), tau)?;
        let uu = field_at(u, iw);
        let vv = if symmetric { uu.clone() } else { field_at(v, iw) };
        for a in 0..d {
            for b in 0..d {
                if symmetric && b < a {
                    continue;
                }
                let buf = &mut w[a * d + b];
                for ((z, x), y) in buf.iter_mut().zip(&uu[a]).zip(&vv[b]) {
                    *z = Complex64::new(x * y * scale, 0.0);
                }
                fft_nd(&grid, buf, false);
            }
        }
        if symmetric {
            for a in 0..d {
                for b in 0..a {
                    let (lo, hi) = w.split_at_mut(a * d + b);
                    hi[0].copy_from_slice(&lo[b * d + a]);
                }
            }
        }
        oseen_accumulate(table, &w, t - tau, weight, &mut acc);
    }
    let comps = acc
        .into_iter()
        .map(|mut c| {
            fft_nd(&grid, &mut c, true);
            crate::field::ScalarField::from_vec_unchecked(grid, c.into_iter().map(|z| z.re).collect())
        })
        .collect();
    VectorField::new(comps)
}

/// A bilinear space-time operator evaluated on every slice.
pub trait Bilinear: Sync {
    fn apply(&self, u: &SpaceTimeField, v: &SpaceTimeField, quad_order: usize) -> Result<SpaceTimeField>;
}

/// The Duhamel operator `B`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Duhamel;

impl Bilinear for Duhamel {
    fn apply(&self, u: &SpaceTimeField, v: &SpaceTimeField, quad_order: usize) -> Result<SpaceTimeField> {
        check_pair(u, v)?;
        let rule = GaussRule::new(quad_order)?;
        let table = WaveTable::new(u.grid());
        let symmetric = std::ptr::eq(u, v);
        let slices = (0..u.len())
            .into_par_iter()
            .map(|m| duhamel_slice(u, v, m, &rule, &table, symmetric))
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(u.times().to_vec(), slices)
    }
}

/// Test hook: `B ≡ 0`, so Picard returns the linear heat flow.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroBilinear;

impl Bilinear for ZeroBilinear {
    fn apply(&self, u: &SpaceTimeField, v: &SpaceTimeField, _: usize) -> Result<SpaceTimeField> {
        check_pair(u, v)?;
        let g = *u.grid();
        SpaceTimeField::new(u.times().to_vec(), vec![VectorField::zeros(g); u.len()])
    }
}

fn check_pair(u: &SpaceTimeField, v: &SpaceTimeField) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    if u.times() != v.times() {
        return Err(param("u and v must share time nodes"));
    }
    Ok(())
}

/// `B(u, v)(t)` at one stored slice time.
pub fn duhamel_bilinear(u: &SpaceTimeField, v: &SpaceTimeField, t: f64, quad_order: usize) -> Result<VectorField> {
    check_pair(u, v)?;
    let m = u
        .times()
        .iter()
        .position(|&ti| (ti / t - 1.0).abs() <= 1e-12)
        .ok_or_else(|| param(format!("t = {t} is not a slice time")))?;
    let rule = GaussRule::new(quad_order)?;
    let table = WaveTable::new(u.grid());
    duhamel_slice(u, v, m, &rule, &table, std::ptr::eq(u, v))
}

/// `e^{tΔ} u_0` on every time.
pub fn linear_flow(u0: &VectorField, times: &[f64]) -> Result<SpaceTimeField> {
    let table = WaveTable::new(u0.grid());
    let hat: Vec<SpectralField> = vector_to_spectral(u0);
    let slices = times.par_iter().map(|&t| heat_spectral(&hat, &table, t)).collect();
    SpaceTimeField::new(times.to_vec(), slices)
}

/// Scales `u_0` so the probed smallness sup of its heat flow is `δ (1 - 1e-6)`.
pub fn scale_to_smallness(
    u0: &VectorField,
    params: &WeightParams,
    delta: f64,
    probe_times: &[f64],
) -> Result<(VectorField, f64)> {
    if !(delta > 0.0) {
        return Err(param("target smallness must be positive"));
    }
    let g = u0.grid();
    let slack = 1e-12;
    if probe_times.iter().any(|&t| {
        t < g.min_resolvable_time() * (1.0 - slack) || t > g.max_resolvable_time() * (1.0 + slack)
    }) {
        return Err(param("probe times outside [h^2, (L/6)^2]"));
    }
    if u0.max_abs() == 0.0 {
        return Err(param("cannot scale zero data"));
    }
    let flow = linear_flow(u0, probe_times)?;
    let s = smallness_sup(&flow, params)?;
    let c = delta * (1.0 - 1e-6) / s;
    let scaled = u0.scaled(c);
    let achieved = smallness_sup(&flow.scaled(c), params)?;
    Ok((scaled, achieved))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PicardDiagnostics {
    /// `K^1_α` norm of each iterate `u^(n)`, `n >= 1`.
    pub iterate_norms: Vec<f64>,
    /// `K^1_α` norm of `u^(n) - u^(n-1)`.
    pub difference_norms: Vec<f64>,
    /// `difference_norms[n] / difference_norms[n-1]`, from the second iteration on.
    pub contraction_ratios: Vec<f64>,
    /// `K^1_α` norm of `u - (e^{tΔ}u_0 - B(u,u))` at termination.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Probed smallness sup of the linear flow.
    pub smallness_sup: f64,
    pub delta: f64,
    pub eta_hat: Option<f64>,
}

pub fn picard_solve(u0: &VectorField, cfg: &SolverConfig) -> Result<(SpaceTimeField, PicardDiagnostics)> {
    picard_solve_with(u0, cfg, &Duhamel)
}

/// Picard iteration with any bilinear operator.
pub fn picard_solve_with(
    u0: &VectorField,
    cfg: &SolverConfig,
    op: &dyn Bilinear,
) -> Result<(SpaceTimeField, PicardDiagnostics)> {
    cfg.validate()?;
    if *u0.grid() != cfg.grid {
        return Err(Error::GridMismatch);
    }
    let peak = u0.max_abs();
    if divergence(u0).max_abs() > 1e-8 * peak {
        return Err(param("initial data is not divergence-free"));
    }
    let times = cfg.times()?;
    let t_cap = cfg.t_max;
    let alpha = cfg.params.alpha;
    let lin = linear_flow(u0, &times)?;
    let small = smallness_sup(&lin, &cfg.params)?;
    let mut diag = PicardDiagnostics { smallness_sup: small, delta: cfg.delta, eta_hat: cfg.eta_hat, ..Default::default() };
    if !cfg.override_smallness {
        let eta = cfg.eta_hat.ok_or_else(|| {
            Error::Smallness("no calibrated bilinear constant; estimate one or set the override".into())
        })?;
        if cfg.delta > 1.0 / (4.0 * eta) * (1.0 + 1e-12) {
            return Err(Error::Smallness(format!(
                "delta = {} exceeds 1/(4 eta_hat) = {}",
                cfg.delta,
                1.0 / (4.0 * eta)
            )));
        }
        if small > cfg.delta * (1.0 + 1e-9) {
            return Err(Error::Smallness(format!(
                "probed sup of the linear flow {small} exceeds delta = {}",
                cfg.delta
            )));
        }
    }
    let mut u = lin.clone();
    let mut strikes = 0;
    for it in 1..=cfg.max_iter {
        let b = op.apply(&u, &u, cfg.quad_order)?;
        let next = lin.sub(&b)?;
        let diff = k_norm(&next.sub(&u)?, alpha, 1.0, t_cap)?;
        let norm = k_norm(&next, alpha, 1.0, t_cap)?;
        diag.iterations = it;
        if let Some(&prev) = diag.difference_norms.last() {
            let ratio = if prev > 0.0 { diff / prev } else { 0.0 };
            diag.contraction_ratios.push(ratio);
            strikes = if ratio >= 1.0 { strikes + 1 } else { 0 };
        }
        diag.iterate_norms.push(norm);
        diag.difference_norms.push(diff);
        u = next;
        if !diff.is_finite() || !norm.is_finite() {
            return Err(Error::Divergence { reason: "iterate is not finite".into(), diagnostics: Box::new(diag) });
        }
        if strikes >= 2 {
            return Err(Error::Divergence {
                reason: "contraction ratio >= 1 on two consecutive iterations".into(),
                diagnostics: Box::new(diag),
            });
        }
        if diff < cfg.tol {
            diag.converged = true;
            break;
        }
    }
    let b = op.apply(&u, &u, cfg.quad_order)?;
    diag.residual = k_norm(&u.sub(&lin.sub(&b)?)?, alpha, 1.0, t_cap)?;
    Ok((u, diag))
}

/// Bilinear-estimate ratio `‖B(u,v)‖_{K^β_{β̂}} / (‖u‖_{K^1_α} ‖v‖_{K^β_{β̃}})` of one pair.
pub fn bilinear_ratio(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    params: &WeightParams,
    quad_order: usize,
) -> Result<f64> {
    let hb = params.hat_beta.ok_or_else(|| param("hat_beta is required for the bilinear estimate"))?;
    let t_cap = *u.times().last().expect("nonempty");
    let b = Duhamel.apply(u, v, quad_order)?;
    let num = k_norm(&b, hb, params.beta, t_cap)?;
    let den = k_norm(u, params.alpha, 1.0, t_cap)? * k_norm(v, params.tilde_beta, params.beta, t_cap)?;
    if den == 0.0 {
        return Err(param("sample pair has a zero norm"));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearEstimate {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub safety_factor: f64,
    /// `safety_factor * max_ratio`.
    pub eta_hat: f64,
}

pub const ETA_SAFETY_FACTOR: f64 = 2.0;

/// Random divergence-free data: one to three smoothed vortices with tail
/// exponent `β`, centres in `[-L/8, L/8]^d`, cores in `[2h, 4h]`.
pub fn random_divfree_data(grid: GridSpec, beta: f64, rng: &mut ChaCha8Rng) -> Result<VectorField> {
    let d = grid.dim();
    let h = grid.spacing();
    let l = grid.half_width();
    let count = rng.gen_range(1..=3);
    let mut u = VectorField::zeros(grid);
    for _ in 0..count {
        let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-l / 8.0..=l / 8.0)).collect();
        let core = rng.gen_range(2.0 * h..=4.0 * h);
        let amp: f64 = rng.gen_range(0.5..1.5);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let v = make_divfree_data_at(DataKind::CurlPotential { core }, beta, amp, grid, &center)?;
        u = u.axpy(sign, &v)?;
    }
    Ok(u)
}

/// Empirical lower bound on the bilinear constant over seeded random pairs
/// of linear flows, inflated by [`ETA_SAFETY_FACTOR`].
pub fn estimate_bilinear_constant(
    params: &WeightParams,
    cfg: &SolverConfig,
    n_samples: usize,
    seed: u64,
) -> Result<BilinearEstimate> {
    if n_samples == 0 {
        return Err(param("at least one sample is required"));
    }
    let d = cfg.grid.dim();
    params.validate(d)?;
    if params.hat_beta.is_none() {
        return Err(param("hat_beta is required for the bilinear estimate"));
    }
    let times = cfg.times()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let u0 = random_divfree_data(cfg.grid, params.beta, &mut rng)?;
        let v0 = random_divfree_data(cfg.grid, params.beta, &mut rng)?;
        let u = linear_flow(&u0, &times)?;
        let v = linear_flow(&v0, &times)?;
        ratios.push(bilinear_ratio(&u, &v, params, cfg.quad_order)?);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(BilinearEstimate { ratios, max_ratio, safety_factor: ETA_SAFETY_FACTOR, eta_hat: ETA_SAFETY_FACTOR * max_ratio })
}

/// A solve whose smallness level comes from a measured bilinear constant.
#[derive(Debug, Clone)]
pub struct CalibratedRun {
    /// The data after scaling to the smallness level.
    pub u0: VectorField,
    pub solution: SpaceTimeField,
    pub diagnostics: PicardDiagnostics,
    pub estimate: Option<BilinearEstimate>,
    pub delta: f64,
}

/// Estimates `η̂` unless the config carries one, takes `δ = 1/(4 η̂)` unless
/// `delta` is given, scales `u_0` to that level and runs Picard.
///
/// An explicit `delta` above `1/(4 η̂)` is refused by [`picard_solve`] unless
/// the smallness override is set.
pub fn calibrated_solve(
    u0: &VectorField,
    cfg: &SolverConfig,
    delta: Option<f64>,
    eta_samples: usize,
    seed: u64,
) -> Result<CalibratedRun> {
    let mut cfg = cfg.clone();
    let mut estimate = None;
    if cfg.eta_hat.is_none() && !(cfg.override_smallness && delta.is_some()) {
        let est = estimate_bilinear_constant(&cfg.params, &cfg, eta_samples, seed)?;
        cfg.eta_hat = Some(est.eta_hat);
        estimate = Some(est);
    }
    let delta = match (delta, cfg.eta_hat) {
        (Some(d), _) => d,
        (None, Some(eta)) => 1.0 / (4.0 * eta),
        (None, None) => return Err(param("no smallness level: give delta or a bilinear constant")),
    };
    cfg.delta = delta;
    cfg.validate()?;
    let (scaled, _) = scale_to_smallness(u0, &cfg.params, delta, &cfg.times()?)?;
    let (solution, diagnostics) = picard_solve(&scaled, &cfg)?;
    Ok(CalibratedRun { u0: scaled, solution, diagnostics, estimate, delta })
}
