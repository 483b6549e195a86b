//! Heat flow of a Gaussian and the weighted decay of a power envelope.

use mild_ns::kernels::heat_apply;
use mild_ns::verify::verify_heat_estimate;
use mild_ns::weighted::geometric_times;
use mild_ns::{GridSpec, ScalarField};

fn main() -> mild_ns::Result<()> {
    let grid = GridSpec::new(2, 20.0, 128)?;
    let gauss = |s: f64| move |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1]) / (4.0 * s)).exp() / s;

    // e^{tΔ} of a variance-2s Gaussian is the variance-2(s+t) Gaussian.
    let f = ScalarField::from_fn(grid, gauss(0.5));
    let out = heat_apply(&f, 0.7)?;
    let exact = ScalarField::from_fn(grid, gauss(1.2));
    println!("gaussian error     {:.3e}", out.axpy(-1.0, &exact)?.max_abs());

    let split = heat_apply(&heat_apply(&f, 0.3)?, 0.4)?;
    println!("semigroup error    {:.3e}", split.axpy(-1.0, &out)?.max_abs());

    let times = geometric_times(0.1, 10.0, 16)?;
    for (beta, gamma) in [(1.5, 0.0), (1.5, 0.5), (1.5, 1.5)] {
        let r = verify_heat_estimate(gamma, beta, grid, &times)?;
        println!(
            "{:<18} slope {:+.4} target {:+.4} {}",
            r.name,
            r.fitted_slope,
            r.target_slope,
            if r.verdict { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}
