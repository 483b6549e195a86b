//! The full linear verification suite, summarised.

use mild_ns::verify::{run_suite, VerifyConfig};

fn main() -> mild_ns::Result<()> {
    let r = run_suite(&VerifyConfig::default(), 7)?;
    let worst = r.beta_checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    println!("beta integrals: {} checks, worst {worst:.2e}", r.beta_checks.len());
    for c in &r.exactness {
        println!("{:<24} {:.2e}", c.name, c.error);
    }
    for rep in &r.reports {
        println!("{:<36} {:+.4} {}", rep.name, rep.fitted_slope, if rep.verdict { "PASS" } else { "FAIL" });
    }
    for a in &r.audits {
        println!("{:?} alpha={} max ratio {:.4}", a.kind, a.alpha, a.max_ratio);
    }
    println!("overall: {}", if r.verdict { "PASS" } else { "FAIL" });
    Ok(())
}
