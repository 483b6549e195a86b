use mild_ns::data::{make_divfree_cluster, DataKind};
use mild_ns::field::tensor_product;
use mild_ns::kernels::{heat_apply, leray_project};
use mild_ns::solver::{
    calibrated_solve, duhamel_bilinear, estimate_bilinear_constant, linear_flow, picard_solve_with, scale_to_smallness,
    Bilinear, Duhamel, ZeroBilinear,
};
use mild_ns::spectral::{divergence, tensor_divergence};
use mild_ns::weighted::k_norm;
use mild_ns::{picard_solve, Error, GridSpec, SolverConfig, SpaceTimeField, VectorField, WeightParams};

fn params() -> WeightParams {
    WeightParams { gamma: 0.5, tilde_gamma: 0.25, alpha: 0.5, beta: 1.5, tilde_beta: 1.0, hat_beta: Some(1.0) }
}

fn config(grid: GridSpec) -> SolverConfig {
    let h = grid.spacing();
    SolverConfig {
        grid,
        t_min: h * h,
        t_max: grid.max_resolvable_time(),
        slices: 12,
        quad_order: 8,
        max_iter: 40,
        tol: 1e-8,
        delta: 1.0,
        params: params(),
        eta_hat: None,
        override_smallness: true,
    }
}

fn small_grid() -> GridSpec {
    GridSpec::new(2, 6.0, 32).unwrap()
}

fn pair_data(grid: GridSpec) -> VectorField {
    let core = 2.0 * grid.spacing();
    make_divfree_cluster(
        DataKind::CurlPotential { core },
        1.5,
        grid,
        &[vec![-0.1, 0.05], vec![0.12, -0.08]],
        &[1.0, 0.6],
    )
    .unwrap()
}

fn rel_diff(a: &VectorField, b: &VectorField) -> f64 {
    a.sub(b).unwrap().max_abs() / b.max_abs()
}

#[test]
fn constant_single_mode_matches_dense_oracle() {
    // u = (sin y, sin 2x) held constant in time: every mode of P∇·(u⊗u)
    // has |k|^2 = 5, so B(u,u)(t) = (1 - e^{-5t})/5 · P∇·(u⊗u).
    let grid = GridSpec::new(2, std::f64::consts::PI, 32).unwrap();
    let mut cfg = config(grid);
    cfg.slices = 8;
    let times = cfg.times().unwrap();
    let u0 = VectorField::from_fn(grid, |x| [x[1].sin(), (2.0 * x[0]).sin(), 0.0]);
    let u = SpaceTimeField::new(times.clone(), vec![u0.clone(); times.len()]).unwrap();
    let w = leray_project(&tensor_divergence(&tensor_product(&u0, &u0).unwrap()));
    assert!(w.max_abs() > 0.1, "forcing must be nontrivial");

    for &t in [times[0], times[3], times[7]].iter() {
        let got = duhamel_bilinear(&u, &u, t, 8).unwrap();

        // Dense trapezoid in s = sqrt(t - τ) on 10^4 nodes.
        let n = 10_000;
        let top = t.sqrt();
        let ds = top / n as f64;
        let mut dense = VectorField::zeros(grid);
        for i in 0..=n {
            let s = i as f64 * ds;
            let wt = if i == 0 || i == n { 0.5 } else { 1.0 } * 2.0 * s * ds;
            dense = dense.axpy(wt, &heat_apply(&w, s * s).unwrap()).unwrap();
        }
        assert!(rel_diff(&got, &dense) <= 1e-6, "t = {t}: dense oracle off by {}", rel_diff(&got, &dense));

        let closed = w.scaled((1.0 - (-5.0 * t).exp()) / 5.0);
        assert!(rel_diff(&got, &closed) <= 1e-6, "t = {t}: closed form off by {}", rel_diff(&got, &closed));
    }
}

#[test]
fn zero_data_is_a_fixed_point() {
    let grid = small_grid();
    let mut cfg = config(grid);
    cfg.override_smallness = false;
    cfg.eta_hat = Some(1.0);
    cfg.delta = 0.25;
    let (u, diag) = picard_solve(&VectorField::zeros(grid), &cfg).unwrap();
    assert!(diag.converged);
    assert_eq!(diag.iterations, 1);
    assert_eq!(diag.residual, 0.0);
    assert_eq!(u.max_abs(), 0.0);
}

#[test]
fn zero_hook_returns_the_heat_flow() {
    let grid = small_grid();
    let cfg = config(grid);
    let u0 = pair_data(grid);
    let (u, diag) = picard_solve_with(&u0, &cfg, &ZeroBilinear).unwrap();
    let lin = linear_flow(&u0, &cfg.times().unwrap()).unwrap();
    assert!(diag.converged);
    assert!(diag.residual <= 1e-12);
    assert_eq!(u, lin);
}

#[test]
fn bilinear_form_vanishes_on_zero_argument() {
    let grid = small_grid();
    let cfg = config(grid);
    let u = linear_flow(&pair_data(grid), &cfg.times().unwrap()).unwrap();
    let zero = u.scaled(0.0);
    let b = Duhamel.apply(&u, &zero, 8).unwrap();
    assert_eq!(b.max_abs(), 0.0);
}

#[test]
fn symmetrized_form_is_symmetric() {
    let grid = small_grid();
    let cfg = config(grid);
    let times = cfg.times().unwrap();
    let u = linear_flow(&pair_data(grid), &times).unwrap();
    let v0 = VectorField::from_fn(grid, |x| {
        let e = (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp();
        [-x[1] * e, x[0] * e, 0.0]
    });
    let v = linear_flow(&leray_project(&v0), &times).unwrap();
    let uv = Duhamel.apply(&u, &v, 8).unwrap();
    let vu = Duhamel.apply(&v, &u, 8).unwrap();
    let s1 = uv.axpy(1.0, &vu).unwrap();
    let s2 = vu.axpy(1.0, &uv).unwrap();
    assert!(uv.sub(&vu).unwrap().max_abs() > 0.0, "the unsymmetrized form should not be symmetric here");
    assert!(s1.sub(&s2).unwrap().max_abs() <= 1e-12 * s1.max_abs());
}

#[test]
fn estimate_needs_samples() {
    let cfg = config(small_grid());
    assert!(estimate_bilinear_constant(&params(), &cfg, 0, 1).is_err());
}

#[test]
fn smallness_is_enforced_without_override() {
    let grid = small_grid();
    let mut cfg = config(grid);
    cfg.override_smallness = false;
    cfg.eta_hat = Some(0.2);
    let u0 = pair_data(grid);
    cfg.delta = 10.0;
    assert!(matches!(picard_solve(&u0, &cfg), Err(Error::Smallness(_))));
    cfg.eta_hat = None;
    cfg.delta = 1.0;
    assert!(matches!(picard_solve(&u0, &cfg), Err(Error::Smallness(_))));
}

#[test]
fn scaling_rejects_bad_targets() {
    let grid = small_grid();
    let times = config(grid).times().unwrap();
    assert!(scale_to_smallness(&pair_data(grid), &params(), 0.0, &times).is_err());
    assert!(scale_to_smallness(&VectorField::zeros(grid), &params(), 1.0, &times).is_err());
}

#[test]
fn large_data_is_reported_as_divergent() {
    let grid = small_grid();
    let cfg = config(grid);
    let (u0, _) = scale_to_smallness(&pair_data(grid), &params(), 400.0, &cfg.times().unwrap()).unwrap();
    match picard_solve(&u0, &cfg) {
        Err(Error::Divergence { diagnostics, .. }) => {
            assert!(!diagnostics.converged);
            assert!(!diagnostics.contraction_ratios.is_empty());
        }
        other => panic!("expected a divergence report, got {other:?}"),
    }
}

#[test]
fn calibrated_solve_converges_and_refines() {
    let grid = GridSpec::new(2, 8.0, 64).unwrap();
    let mut cfg = config(grid);
    cfg.override_smallness = false;
    cfg.t_max = 1.0;
    let run = calibrated_solve(&pair_data(grid), &cfg, None, 2, 5).unwrap();
    let eta = run.estimate.as_ref().unwrap().eta_hat;
    let diag = &run.diagnostics;
    assert!((run.delta - 1.0 / (4.0 * eta)).abs() <= 1e-12 * run.delta);
    assert!(diag.converged);
    assert!(diag.contraction_ratios.iter().all(|&r| r <= 0.5), "{:?}", diag.contraction_ratios);
    assert!(diag.residual <= 10.0 * cfg.tol);
    let t_cap = cfg.t_max;
    assert!(k_norm(&run.solution, cfg.params.alpha, 1.0, t_cap).unwrap() <= 1.1 / (2.0 * eta));

    // Every slice stays divergence-free.
    for s in run.solution.slices() {
        assert!(divergence(s).max_abs() <= 1e-9 * s.max_abs());
    }

    // Doubling the quadrature order barely moves B(u, u).
    let u = &run.solution;
    let b8 = Duhamel.apply(u, u, 8).unwrap();
    let b16 = Duhamel.apply(u, u, 16).unwrap();
    let change = b16.sub(&b8).unwrap().max_abs() / b16.max_abs();
    assert!(change <= 1e-6, "q doubling changed B by {change}");
}
