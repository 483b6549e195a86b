//! Calibrated Picard solve for a pair of vortices, then decay and bootstrap checks.
//!
//! Takes a minute or so in release mode.

use mild_ns::config::RunConfig;
use mild_ns::data::make_divfree_cluster;
use mild_ns::solver::calibrated_solve;
use mild_ns::verify::solution::verify_picard;
use mild_ns::verify::{verify_bootstrap, verify_solution_decay};

fn main() -> mild_ns::Result<()> {
    let cfg = RunConfig::from_str("[solver]\neta_samples = 2\n")?;
    let s = &cfg.solve;
    let params = s.solver.params;
    let u0 = make_divfree_cluster(s.data, params.beta, s.solver.grid, &s.centers, &s.amplitudes)?;

    let run = calibrated_solve(&u0, &s.solver, s.delta, s.eta_samples, cfg.seed)?;
    let diag = &run.diagnostics;
    println!("eta_hat {:.4}  delta {:.4}", diag.eta_hat.unwrap_or(f64::NAN), run.delta);
    for (i, d) in diag.difference_norms.iter().enumerate() {
        println!("iteration {:>2}: difference {d:.3e}", i + 1);
    }
    for c in verify_picard(&run.solution, diag, params.alpha, s.solver.tol)? {
        println!("{:<18} {:.3e} <= {:.3e}", c.name, c.error, c.tol);
    }

    let decay = verify_solution_decay(&run.solution, diag, params.gamma, params.beta)?;
    let boot = verify_bootstrap(&run.solution, diag, params.beta, &cfg.bootstrap_alphas, &cfg.bootstrap_hat_betas)?;
    for p in decay.parts.iter().chain(&boot.parts) {
        println!("{:<18} {:+.4} {}", p.name, p.fitted_slope, if p.verdict { "PASS" } else { "FAIL" });
    }
    Ok(())
}
