//! Spectral derivatives and divergence-free data on the periodic box.

use mild_ns::data::{make_divfree_data, DataKind};
use mild_ns::spectral::{derivative, divergence, from_spectral, laplacian, to_spectral};
use mild_ns::{GridSpec, ScalarField};

fn main() -> mild_ns::Result<()> {
    let grid = GridSpec::new(2, std::f64::consts::PI, 64)?;
    let f = ScalarField::from_fn(grid, |x| (2.0 * x[0]).sin() * x[1].cos());

    // d/dx sin(2x)cos(y) = 2cos(2x)cos(y), exact for a resolved mode.
    let dx = from_spectral(&derivative(&to_spectral(&f), 0));
    let exact = ScalarField::from_fn(grid, |x| 2.0 * (2.0 * x[0]).cos() * x[1].cos());
    println!("derivative error  {:.3e}", dx.axpy(-1.0, &exact)?.max_abs());

    let lap = laplacian(&f);
    println!("laplacian error   {:.3e}", lap.axpy(5.0, &f)?.max_abs());

    let wide = GridSpec::new(2, 8.0, 128)?;
    let u = make_divfree_data(DataKind::CurlPotential { core: 2.0 * wide.spacing() }, 1.5, 1.0, wide)?;
    println!("vortex sup        {:.4}", u.max_abs());
    println!("divergence        {:.3e}", divergence(&u).max_abs());
    Ok(())
}
