//! Special functions behind the closed forms and the initial-data profiles.

use statrs::function::gamma::{gamma as gamma_fn, ln_gamma};

pub fn gamma(x: f64) -> f64 {
    gamma_fn(x)
}

/// Complete Beta function for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Unregularised incomplete Beta `B(x; a, b) = int_0^x s^{a-1} (1-s)^{b-1} ds`
/// for `a > 0`, any real `b`, `0 <= x <= 1/2`, from
/// `x^a sum_n (1-b)_n / n! x^n / (a+n)`.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && (0.0..=0.5).contains(&x), "incomplete_beta needs a > 0, 0 <= x <= 1/2");
    if x == 0.0 {
        return 0.0;
    }
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut sum = 1.0 / a;
    for n in 0..2000 {
        let nf = n as f64;
        coef *= (1.0 - b + nf) / (nf + 1.0);
        pow *= x;
        let term = coef * pow / (a + nf + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && nf > (b - 1.0).abs() {
            break;
        }
    }
    x.powf(a) * sum
}

/// Kummer's function `M(a, c, -z)` for `z >= 0`, `c > a > 0`.
///
/// Small `z` uses Kummer's transformation `e^{-z} M(c-a, c, z)`, a series of
/// positive terms; large `z` uses the algebraic asymptotic series, whose
/// neglected part is of order `e^{-z}`.
pub fn kummer_m_neg(a: f64, c: f64, z: f64) -> f64 {
    assert!(z >= 0.0 && c > a && a > 0.0);
    if z <= 60.0 {
        let ap = c - a;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 0.0;
        loop {
            term *= (ap + n) / (c + n) * z / (n + 1.0);
            sum += term;
            n += 1.0;
            if term <= 1e-17 * sum && n > z {
                break;
            }
        }
        (-z).exp() * sum
    } else {
        let lead = (ln_gamma(c) - ln_gamma(c - a)).exp() * z.powf(-a);
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        let mut n = 0.0;
        loop {
            let next = term * (a + n) * (1.0 + a - c + n) / ((n + 1.0) * z);
            if next.abs() >= term.abs() || next.abs() <= 1e-17 * sum.abs() {
                if next.abs() < term.abs() {
                    sum += next;
                }
                break;
            }
            term = next;
            sum += term;
            n += 1.0;
        }
        lead * sum
    }
}

/// Exponential integral `E_1(z) = int_z^inf e^{-s}/s ds` for `z > 0`.
pub fn expint_e1(z: f64) -> f64 {
    assert!(z > 0.0);
    const EULER: f64 = 0.577_215_664_901_532_9;
    if z <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 1..200 {
            let nf = n as f64;
            term *= -z / nf;
            let add = term / nf;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        -EULER - z.ln() - sum
    } else {
        // Modified Lentz on the continued fraction.
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// Heat flow `e^{sΔ} |x|^{-b}` in dimension `d` at radius `r`, for `0 < b < d`:
/// `(4s)^{-b/2} Γ((d-b)/2)/Γ(d/2) M(b/2, d/2, -r^2/4s)`.
pub fn heat_regularized_power(d: usize, b: f64, s: f64, r: f64) -> f64 {
    let c = d as f64 / 2.0;
    let pref = (4.0 * s).powf(-b / 2.0) * (ln_gamma(c - b / 2.0) - ln_gamma(c)).exp();
    pref * kummer_m_neg(b / 2.0, c, r * r / (4.0 * s))
}
