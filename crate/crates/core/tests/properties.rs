use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mild_ns::config::{RunConfig, SCHEMA};
use mild_ns::fit::{fit_decay_exponent, Criterion};
use mild_ns::kernels::leray_project;
use mild_ns::solver::{
    bilinear_ratio, estimate_bilinear_constant, linear_flow, random_divfree_data, scale_to_smallness, Bilinear,
    Duhamel,
};
use mild_ns::spectral::divergence;
use mild_ns::verify::suite::random_band_limited;
use mild_ns::verify::{beta_time_integral, BetaPart};
use mild_ns::weighted::geometric_times;
use mild_ns::{DecayReport, Error, GridSpec, SolverConfig, SpaceTimeField, VectorField, WeightParams};

fn params() -> WeightParams {
    WeightParams { gamma: 0.5, tilde_gamma: 0.25, alpha: 0.5, beta: 1.5, tilde_beta: 1.0, hat_beta: Some(1.0) }
}

fn grid() -> GridSpec {
    GridSpec::new(2, 6.0, 32).unwrap()
}

fn config() -> SolverConfig {
    let g = grid();
    SolverConfig {
        grid: g,
        t_min: g.spacing().powi(2),
        t_max: g.max_resolvable_time(),
        slices: 8,
        quad_order: 8,
        max_iter: 10,
        tol: 1e-8,
        delta: 1.0,
        params: params(),
        eta_hat: None,
        override_smallness: true,
    }
}

fn flow(seed: u64) -> SpaceTimeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = random_divfree_data(grid(), 1.5, &mut rng).unwrap();
    linear_flow(&u0, &config().times().unwrap()).unwrap()
}

fn rel(a: &SpaceTimeField, b: &SpaceTimeField) -> f64 {
    a.sub(b).unwrap().max_abs() / b.max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn leray_projection_is_idempotent_and_solenoidal(seed in any::<u64>()) {
        let g = GridSpec::new(2, std::f64::consts::PI, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = VectorField::new(vec![random_band_limited(g, &mut rng), random_band_limited(g, &mut rng)]).unwrap();
        let p = leray_project(&u);
        let scale = u.max_abs();
        prop_assert!(divergence(&p).max_abs() <= 1e-10 * scale);
        prop_assert!(leray_project(&p).sub(&p).unwrap().max_abs() <= 1e-10 * scale);
    }

    #[test]
    fn power_laws_are_fitted_exactly(p in -3.0f64..3.0, c in 0.01f64..100.0, lo in 0.01f64..1.0, span in 1.0f64..4.0) {
        let hi = lo * 10f64.powf(span);
        let samples: Vec<(f64, f64)> = geometric_times(lo, hi, 12).unwrap().into_iter().map(|s| (s, c * s.powf(p))).collect();
        let fit = fit_decay_exponent(&samples, (lo, hi)).unwrap();
        prop_assert!((fit.slope - p).abs() <= 1e-10);
        prop_assert!(fit.r_squared >= 1.0 - 1e-10 || p.abs() < 1e-6);
    }

    #[test]
    fn verdicts_are_recomputable_from_stored_samples(
        p in -2.0f64..1.0,
        noise in prop::collection::vec(-0.2f64..0.2, 10),
        target in -2.0f64..1.0,
        kind in 0usize..3,
    ) {
        let samples: Vec<(f64, f64)> = geometric_times(0.1, 10.0, 10)
            .unwrap()
            .into_iter()
            .zip(&noise)
            .map(|(s, e)| (s, s.powf(p) * e.exp()))
            .collect();
        let criterion = [Criterion::Slope { tol: 0.1 }, Criterion::SlopeAtMost { tol: 0.05 }, Criterion::Flat { tol: 0.15 }][kind];
        let r = DecayReport::from_fit("probe", criterion, target, samples, (0.2, 5.0)).unwrap();
        // Round trip through JSON as a report file would.
        let back: DecayReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back.recompute_verdict().unwrap(), r.verdict);
        prop_assert_eq!(&back, &r);
    }

    #[test]
    fn beta_integrals_match_closed_forms(g in -1.0f64..0.95, th in -1.0f64..0.95, t in 0.1f64..10.0, part in 0usize..3) {
        let part = [BetaPart::FirstHalf, BetaPart::SecondHalf, BetaPart::Full][part];
        let c = beta_time_integral(g, th, t, part).unwrap();
        prop_assert!(c.rel_error <= 1e-8, "{:?}", c);
    }

    #[test]
    fn unknown_keys_are_rejected(key in "[a-z_]{1,12}", section in 0usize..5) {
        let sec = ["grid", "solver", "weights", "verify", "output"][section];
        prop_assume!(!SCHEMA.iter().any(|(s, k, _)| *s == sec && *k == key));
        match RunConfig::from_str(&format!("[{sec}]\n{key} = 1\n")) {
            Err(Error::Config { path, .. }) => prop_assert_eq!(path, format!("{sec}.{key}")),
            other => prop_assert!(false, "accepted unknown key: {:?}", other.map(|c| c.hash)),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn duhamel_form_is_bilinear(s1 in 0u64..1000, s2 in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        prop_assume!(a.abs() > 0.05 && b.abs() > 0.05);
        let (u, v) = (flow(s1), flow(s2 + 1000));
        let base = Duhamel.apply(&u, &v, 8).unwrap();
        let scaled = Duhamel.apply(&u.scaled(a), &v.scaled(b), 8).unwrap();
        prop_assert!(rel(&scaled, &base.scaled(a * b)) <= 1e-12);

        // Additivity in the first slot.
        let w = flow(s1 + 2000);
        let sum = Duhamel.apply(&u.axpy(1.0, &w).unwrap(), &v, 8).unwrap();
        let parts = base.axpy(1.0, &Duhamel.apply(&w, &v, 8).unwrap()).unwrap();
        prop_assert!(rel(&sum, &parts) <= 1e-12);
    }

    #[test]
    fn sample_ratio_ignores_rescaling(s1 in 0u64..1000, s2 in 0u64..1000, a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let (u, v) = (flow(s1), flow(s2 + 1000));
        let r0 = bilinear_ratio(&u, &v, &params(), 8).unwrap();
        let r1 = bilinear_ratio(&u.scaled(a), &v.scaled(-b), &params(), 8).unwrap();
        prop_assert!((r1 / r0 - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn smallness_scaling_is_linear(seed in any::<u64>(), delta in 0.01f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = random_divfree_data(grid(), 1.5, &mut rng).unwrap();
        let times = config().times().unwrap();
        let (one, s1) = scale_to_smallness(&u0, &params(), delta, &times).unwrap();
        let (two, s2) = scale_to_smallness(&u0, &params(), 2.0 * delta, &times).unwrap();
        prop_assert!(two.sub(&one.scaled(2.0)).unwrap().max_abs() <= 1e-14 * two.max_abs());
        prop_assert!((s1 / (delta * (1.0 - 1e-6)) - 1.0).abs() <= 1e-12);
        prop_assert!(s1 <= delta && s2 <= 2.0 * delta);
    }
}

fn twenty_sample_estimate() -> &'static mild_ns::solver::BilinearEstimate {
    static EST: OnceLock<mild_ns::solver::BilinearEstimate> = OnceLock::new();
    EST.get_or_init(|| estimate_bilinear_constant(&params(), &config(), 20, 3).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn estimate_dominates_every_subset(mask in prop::collection::vec(any::<bool>(), 20)) {
        let est = twenty_sample_estimate();
        let sub: Vec<f64> = est.ratios.iter().zip(&mask).filter(|(_, &m)| m).map(|(r, _)| *r).collect();
        let sub_max = sub.iter().copied().fold(0.0, f64::max);
        prop_assert!(est.max_ratio >= sub_max);
        prop_assert_eq!(est.eta_hat, est.safety_factor * est.max_ratio);
    }
}

#[test]
fn seeded_prefix_estimate_is_dominated() {
    let full = twenty_sample_estimate();
    let half = estimate_bilinear_constant(&params(), &config(), 10, 3).unwrap();
    assert_eq!(half.ratios[..], full.ratios[..10]);
    assert!(half.eta_hat <= full.eta_hat);
}
