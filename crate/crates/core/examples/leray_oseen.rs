//! Leray projection and the Oseen operator e^{tΔ}P∇·.

use mild_ns::kernels::{leray_project, oseen_self_similarity};
use mild_ns::spectral::divergence;
use mild_ns::verify::{verify_oseen_decay, verify_oseen_estimate};
use mild_ns::weighted::geometric_times;
use mild_ns::{GridSpec, VectorField};

fn main() -> mild_ns::Result<()> {
    let grid = GridSpec::new(2, std::f64::consts::PI, 32)?;
    let u = VectorField::from_fn(grid, |x| [(x[0] + 2.0 * x[1]).sin(), (3.0 * x[0]).cos() * x[1].sin(), 0.0]);
    let p = leray_project(&u);
    println!("div(Pu)       {:.3e}", divergence(&p).max_abs());
    println!("P(Pu) - Pu    {:.3e}", leray_project(&p).sub(&p)?.max_abs());

    let grid = GridSpec::new(2, 16.0, 256)?;
    let t0 = grid.spacing().powi(2);
    let s = oseen_self_similarity(grid, t0)?;
    println!("self-similarity at t={t0:.4}: rel error {:.3e} over {} offsets", s.rel_error, s.n_points);
    let profile = verify_oseen_decay(grid, t0, 12)?;
    println!("weighted kernel profile slope {:+.4}", profile.fitted_slope);

    let lemma = GridSpec::new(2, 20.0, 128)?;
    let times = geometric_times(0.1, 10.0, 16)?;
    for (beta, gamma) in [(1.5, 0.0), (1.5, 0.5), (1.5, 1.5)] {
        let r = verify_oseen_estimate(gamma, beta, lemma, &times)?;
        println!("{:<18} slope {:+.4} target {:+.4}", r.name, r.fitted_slope, r.target_slope);
    }
    Ok(())
}
