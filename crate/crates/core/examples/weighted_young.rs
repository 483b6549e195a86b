//! Convolution of two power envelopes and the weighted Young ratio.

use mild_ns::verify::lemmas::{young_convolution_slope, young_cross_check_1d};
use mild_ns::verify::verify_weighted_young;
use mild_ns::GridSpec;

fn main() -> mild_ns::Result<()> {
    let grid = GridSpec::new(2, 16.0, 128)?;
    for (a, b) in [(1.25, 1.25), (1.5, 1.0)] {
        let ratio = verify_weighted_young(a, b, grid, 1)?;
        let conv = young_convolution_slope(a, b, grid, 1)?;
        println!("alpha={a} beta={b}");
        for (r, v) in &ratio.samples {
            println!("  |x| = {r:<6} ratio {v:.4}");
        }
        println!("  ratio trend {:+.4}, convolution exponent {:+.4} (target {:+.4})", ratio.fitted_slope, conv.fitted_slope, conv.target_slope);
    }

    let c = young_cross_check_1d(0.75, 0.75)?;
    println!("1-d constant {:.12} vs quadrature {:.12}", c.value, c.oracle);
    Ok(())
}
