//! ∫_0^t (t-τ)^{-γ} τ^{-θ} dτ split at t/2, against incomplete Beta closed forms.

use mild_ns::verify::{beta_time_integral, BetaPart};

fn main() -> mild_ns::Result<()> {
    let cases = [
        (0.0, 0.0, 2.0, BetaPart::Full),
        (0.5, 0.0, 4.0, BetaPart::Full),
        (0.5, 0.5, 1.0, BetaPart::Full),
        (1.7, 0.3, 1.0, BetaPart::FirstHalf),
        (-0.4, 1.9, 7.0, BetaPart::SecondHalf),
        (0.9, 0.9, 0.5, BetaPart::Full),
    ];
    for (g, th, t, part) in cases {
        let c = beta_time_integral(g, th, t, part)?;
        println!(
            "{part:?} gamma={g:<5} theta={th:<5} t={t:<4} numeric {:.15} closed {:.15} rel {:.1e}",
            c.numeric, c.closed_form, c.rel_error
        );
    }
    Ok(())
}
