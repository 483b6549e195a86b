//! The linear verification suite: every check that needs no Picard solve.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{make_divfree_data, DataKind};
use crate::error::{param, Result};
use crate::field::{ScalarField, VectorField};
use crate::fit::DecayReport;
use crate::grid::GridSpec;
use crate::kernels::{
    audit_kernel_bound, heat_apply, leray_project, oseen_self_similarity, KernelBoundAudit, KernelKind, SelfSimilarity,
};
use crate::spectral::{divergence, from_spectral, SpectralField};
use crate::verify::beta::{beta_time_integral, BetaCheck, BetaPart};
use crate::verify::lemmas::{
    verify_heat_estimate, verify_initial_estimate, verify_oseen_decay, verify_oseen_estimate, verify_weighted_young,
    young_convolution_slope, young_cross_check_1d, ScalarCrossCheck,
};
use crate::weighted::{geometric_times, WeightParams};

pub const BETA_TOL: f64 = 1e-8;
pub const LERAY_TOL: f64 = 1e-10;
pub const HEAT_CLOSED_FORM_TOL: f64 = 1e-8;
pub const SEMIGROUP_TOL: f64 = 1e-10;
pub const SELF_SIMILARITY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Grid for the heat, Oseen and initial-data estimates.
    pub lemma_grid: GridSpec,
    pub young_grid: GridSpec,
    pub oseen_grid: GridSpec,
    pub t_min: f64,
    pub t_max: f64,
    pub n_times: usize,
    /// `(β, γ)` pairs for the heat and Oseen estimates.
    pub linear_pairs: Vec<(f64, f64)>,
    /// `(α, β)` pairs for the weighted Young check.
    pub young_pairs: Vec<(f64, f64)>,
    pub young_per_octave: usize,
    pub beta_draws: usize,
    pub beta_times: Vec<f64>,
    pub leray_fields: usize,
    pub oseen_radii: usize,
    pub initial: WeightParams,
    pub initial_data: DataKind,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            lemma_grid: GridSpec::new(2, 20.0, 128).expect("valid"),
            young_grid: GridSpec::new(2, 16.0, 128).expect("valid"),
            oseen_grid: GridSpec::new(2, 16.0, 256).expect("valid"),
            t_min: 0.1,
            t_max: 10.0,
            n_times: 16,
            linear_pairs: vec![(1.5, 0.0), (1.5, 0.5), (1.5, 1.5)],
            young_pairs: vec![(1.25, 1.25), (1.5, 1.0)],
            young_per_octave: 1,
            beta_draws: 20,
            beta_times: vec![0.5, 1.0, 7.0],
            leray_fields: 50,
            oseen_radii: 12,
            initial: WeightParams {
                gamma: 0.5,
                tilde_gamma: 0.25,
                alpha: 0.5,
                beta: 1.5,
                tilde_beta: 1.0,
                hat_beta: None,
            },
            initial_data: DataKind::Vortex { core: 1.0 },
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        for g in [&self.lemma_grid, &self.young_grid, &self.oseen_grid] {
            if g.dim() != self.lemma_grid.dim() {
                return Err(param("all verification grids must share one dimension"));
            }
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min) || self.n_times < 5 {
            return Err(param("time range must be increasing with at least 5 samples"));
        }
        if self.beta_times.iter().any(|&t| !(t > 0.0)) {
            return Err(param("Beta-integral times must be positive"));
        }
        if self.young_per_octave == 0 || self.oseen_radii < 5 {
            return Err(param("too few probe radii"));
        }
        self.initial.validate_initial()
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        geometric_times(self.t_min, self.t_max, self.n_times)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactnessCheck {
    pub name: String,
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ExactnessCheck {
    pub fn new(name: impl Into<String>, error: f64, tol: f64) -> Self {
        Self { name: name.into(), error, tol, pass: error <= tol }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfSimilarityCheck {
    pub result: SelfSimilarity,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationSuiteResult {
    pub reports: Vec<DecayReport>,
    pub audits: Vec<KernelBoundAudit>,
    pub beta_checks: Vec<BetaCheck>,
    pub beta_tol: f64,
    pub exactness: Vec<ExactnessCheck>,
    pub self_similarity: Vec<SelfSimilarityCheck>,
    pub cross_checks: Vec<ScalarCrossCheck>,
    pub verdict: bool,
}

impl VerificationSuiteResult {
    pub fn report(&self, name: &str) -> Option<&DecayReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn reports_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a DecayReport> + 'a {
        self.reports.iter().filter(move |r| r.name.starts_with(prefix))
    }

    pub fn beta_pass(&self) -> bool {
        self.beta_checks.iter().all(|c| c.rel_error <= self.beta_tol)
    }

    fn overall(&self) -> bool {
        self.reports.iter().all(|r| r.verdict)
            && self.audits.iter().all(|a| a.max_ratio.is_finite())
            && self.beta_pass()
            && self.exactness.iter().all(|c| c.pass)
            && self.self_similarity.iter().all(|c| c.pass)
            && self.cross_checks.iter().all(|c| c.pass)
    }
}

/// Seeded `(γ, θ)` draws in the admissible region of each part, at every time.
pub fn beta_checks(draws: usize, times: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<BetaCheck>> {
    let mut out = Vec::new();
    for part in [BetaPart::FirstHalf, BetaPart::SecondHalf, BetaPart::Full] {
        for _ in 0..draws {
            let below: f64 = rng.gen_range(-1.0..0.95);
            let free: f64 = rng.gen_range(-1.0..2.0);
            let (gamma, theta) = match part {
                BetaPart::FirstHalf => (free, below),
                BetaPart::SecondHalf => (below, free),
                BetaPart::Full => (rng.gen_range(-1.0..0.95), below),
            };
            for &t in times {
                out.push(beta_time_integral(gamma, theta, t, part)?);
            }
        }
    }
    Ok(out)
}

/// A real field with random Fourier content on `|mode| <= N/4` in each axis.
pub fn random_band_limited(grid: GridSpec, rng: &mut ChaCha8Rng) -> ScalarField {
    let d = grid.dim();
    let n = grid.points_per_axis();
    let band = (n / 4) as i64;
    let mut hat = SpectralField::zeros(grid);
    for flat in 0..grid.len() {
        let idx = grid.unravel(flat);
        if (0..d).all(|a| grid.mode(idx[a]).abs() <= band) {
            hat.coeffs_mut()[flat] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    from_spectral(&hat)
}

/// Divergence and idempotence defects of the Leray projection, relative to
/// `‖u‖∞`, maximised over random fields.
pub fn leray_checks(grid: GridSpec, fields: usize, rng: &mut ChaCha8Rng) -> Result<[ExactnessCheck; 2]> {
    let (mut div, mut idem) = (0.0f64, 0.0f64);
    for _ in 0..fields {
        let comps = (0..grid.dim()).map(|_| random_band_limited(grid, rng)).collect();
        let u = VectorField::new(comps)?;
        let scale = u.max_abs();
        let p = leray_project(&u);
        div = div.max(divergence(&p).max_abs() / scale);
        idem = idem.max(leray_project(&p).sub(&p)?.max_abs() / scale);
    }
    Ok([
        ExactnessCheck::new("leray-divergence", div, LERAY_TOL),
        ExactnessCheck::new("leray-idempotence", idem, LERAY_TOL),
    ])
}

/// Heat flow of the unit-variance Gaussian against its closed form inside
/// `0.9 L`, and the semigroup law `e^{sΔ} e^{tΔ} = e^{(s+t)Δ}`.
pub fn heat_checks(grid: GridSpec) -> Result<[ExactnessCheck; 2]> {
    let d = grid.dim() as f64;
    let t = 0.5;
    let f = ScalarField::from_fn(grid, |x| (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp());
    let out = heat_apply(&f, t)?;
    let var = 1.0 + 2.0 * t;
    let inner = 0.9 * grid.half_width();
    let mut err = 0.0f64;
    for (flat, v) in out.samples().iter().enumerate() {
        let x = grid.node(flat);
        if x[..grid.dim()].iter().all(|c| c.abs() <= inner) {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            let exact = var.powf(-d / 2.0) * (-r2 / (2.0 * var)).exp();
            err = err.max((v - exact).abs());
        }
    }
    let closed = err / f.max_abs();
    let (s, u) = (0.3, 0.7);
    let two = heat_apply(&heat_apply(&f, s)?, u)?;
    let one = heat_apply(&f, s + u)?;
    let semigroup = two.axpy(-1.0, &one)?.max_abs() / f.max_abs();
    Ok([
        ExactnessCheck::new("heat-closed-form", closed, HEAT_CLOSED_FORM_TOL),
        ExactnessCheck::new("heat-semigroup", semigroup, SEMIGROUP_TOL),
    ])
}

/// Probes along a fixed direction at dyadic radii from `2h`, times `4^k h^2`.
pub fn kernel_probes(grid: &GridSpec) -> Vec<(Vec<f64>, f64)> {
    let h = grid.spacing();
    let d = grid.dim();
    let dir: Vec<f64> = {
        let raw = [0.8, 0.6, 0.3];
        let n = raw[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        raw[..d].iter().map(|v| v / n).collect()
    };
    let mut out = Vec::new();
    let mut t = grid.min_resolvable_time();
    while t <= grid.max_resolvable_time() {
        let mut r = 2.0 * h;
        while r <= grid.half_width() / 3.0 {
            out.push((dir.iter().map(|c| c * r).collect(), t));
            r *= 2.0;
        }
        t *= 4.0;
    }
    out
}

pub fn run_suite(cfg: &VerifyConfig, seed: u64) -> Result<VerificationSuiteResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times = cfg.times()?;
    let d = cfg.lemma_grid.dim();

    let beta = beta_checks(cfg.beta_draws, &cfg.beta_times, &mut rng)?;

    let mut exactness = Vec::new();
    let leray_grid = GridSpec::new(d, std::f64::consts::PI, 32)?;
    exactness.extend(leray_checks(leray_grid, cfg.leray_fields, &mut rng)?);
    exactness.extend(heat_checks(cfg.lemma_grid)?);

    let mut reports = Vec::new();
    for &(b, g) in &cfg.linear_pairs {
        reports.push(verify_heat_estimate(g, b, cfg.lemma_grid, &times)?);
    }
    for &(b, g) in &cfg.linear_pairs {
        reports.push(verify_oseen_estimate(g, b, cfg.lemma_grid, &times)?);
    }
    for &(a, b) in &cfg.young_pairs {
        reports.push(verify_weighted_young(a, b, cfg.young_grid, cfg.young_per_octave)?);
        reports.push(young_convolution_slope(a, b, cfg.young_grid, cfg.young_per_octave)?);
    }
    let f = make_divfree_data(cfg.initial_data, cfg.initial.beta, 1.0, cfg.lemma_grid)?;
    reports.push(verify_initial_estimate(&f, &cfg.initial, &times)?);

    let og = cfg.oseen_grid;
    let t0 = og.min_resolvable_time();
    let similarity = oseen_self_similarity(og, t0)?;
    let self_similarity = vec![SelfSimilarityCheck {
        pass: similarity.rel_error <= SELF_SIMILARITY_TOL,
        result: similarity,
        tol: SELF_SIMILARITY_TOL,
    }];
    reports.push(verify_oseen_decay(og, t0, cfg.oseen_radii)?);

    let probes = kernel_probes(&og);
    let df = d as f64;
    let mut audits = Vec::new();
    for alpha in [0.0, df / 2.0, df] {
        audits.push(audit_kernel_bound(og, KernelKind::Heat, alpha, &probes)?);
    }
    for alpha in [0.0, (df + 1.0) / 2.0, df + 1.0] {
        audits.push(audit_kernel_bound(og, KernelKind::Oseen, alpha, &probes)?);
    }

    let cross_checks = vec![young_cross_check_1d(0.75, 0.75)?];

    let mut result = VerificationSuiteResult {
        reports,
        audits,
        beta_checks: beta,
        beta_tol: BETA_TOL,
        exactness,
        self_similarity,
        cross_checks,
        verdict: false,
    };
    result.verdict = result.overall();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_limited_fields_are_real_and_nonzero() {
        let g = GridSpec::new(2, 3.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_band_limited(g, &mut rng);
        assert!(f.max_abs() > 0.0);
    }

    #[test]
    fn probes_stay_in_the_resolvable_window() {
        let g = GridSpec::new(2, 16.0, 256).unwrap();
        let p = kernel_probes(&g);
        assert!(!p.is_empty());
        for (x, t) in p {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r >= 2.0 * g.spacing() - 1e-12 && t <= g.max_resolvable_time());
        }
    }
}
