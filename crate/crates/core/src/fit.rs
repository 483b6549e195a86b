//! Log-log exponent fits and the decay reports built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum goodness of fit for slope verdicts.
pub const MIN_R_SQUARED: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Least-squares line through `(log s, log v)` for samples with `s` inside
/// `window` (inclusive, with `1e-9` relative slack).
///
/// Zero variance in `log v` reports slope 0 and `R^2 = 1` by convention.
pub fn fit_decay_exponent(samples: &[(f64, f64)], window: (f64, f64)) -> Result<LogLogFit> {
    let (lo, hi) = (window.0 * (1.0 - 1e-9), window.1 * (1.0 + 1e-9));
    let pts: Vec<(f64, f64)> = samples.iter().copied().filter(|(s, _)| *s >= lo && *s <= hi).collect();
    if pts.len() < 5 {
        return Err(Error::Fit(format!("{} usable samples, need at least 5", pts.len())));
    }
    if pts.iter().any(|(s, v)| !(*s > 0.0) || !(*v > 0.0)) {
        return Err(Error::Fit("samples must be positive".into()));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("window holds a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let tiny = 1e-24 * (1.0 + my * my) * n;
    if syy <= tiny {
        return Ok(LogLogFit { slope: 0.0, intercept: my, r_squared: 1.0, n: pts.len() });
    }
    let r_squared = ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0);
    Ok(LogLogFit { slope, intercept, r_squared, n: pts.len() })
}

/// Sub-interval of `[s_min, s_max]` between log-fractions `f_lo` and `f_hi`.
pub fn log_window(s_min: f64, s_max: f64, f_lo: f64, f_hi: f64) -> (f64, f64) {
    let span = (s_max / s_min).ln();
    (s_min * (f_lo * span).exp(), s_min * (f_hi * span).exp())
}

/// The default window: drop the first and last 20% of the log range.
pub fn default_window(samples: &[(f64, f64)]) -> (f64, f64) {
    let lo = samples.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    log_window(lo, hi, 0.2, 0.8)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Criterion {
    /// `|slope - target| <= tol` and `R^2 >= 0.98`.
    Slope { tol: f64 },
    /// `slope <= target + tol` and `R^2 >= 0.98`.
    SlopeAtMost { tol: f64 },
    /// `|slope - target| <= tol`; no `R^2` gate, since a flat trend has no
    /// variance to explain.
    Flat { tol: f64 },
    /// Samples are `(probe cap, value)` pairs; every value finite and the
    /// relative change between consecutive caps at most `rel_tol`.
    Stable { rel_tol: f64 },
}

/// Outcome of one estimate, with the samples needed to recompute its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub name: String,
    pub criterion: Criterion,
    pub target_slope: f64,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    /// Largest sampled value, the empirical constant of the estimate.
    pub sup_constant: f64,
    /// Every sample is zero: the estimate holds vacuously.
    pub degenerate: bool,
    pub samples: Vec<(f64, f64)>,
    pub verdict: bool,
}

impl DecayReport {
    /// Fits `samples` in `window` and judges by `criterion`.
    pub fn from_fit(
        name: impl Into<String>,
        criterion: Criterion,
        target_slope: f64,
        samples: Vec<(f64, f64)>,
        window: (f64, f64),
    ) -> Result<Self> {
        let sup_constant = samples.iter().fold(0.0f64, |m, p| m.max(p.1));
        let mut r = Self {
            name: name.into(),
            criterion,
            target_slope,
            fitted_slope: 0.0,
            intercept: 0.0,
            r_squared: 1.0,
            window,
            sup_constant,
            degenerate: false,
            samples,
            verdict: false,
        };
        if matches!(criterion, Criterion::Stable { .. }) {
            return Err(Error::Fit("use DecayReport::stability for probe-stability checks".into()));
        }
        if r.samples.iter().all(|p| p.1 == 0.0) {
            r.degenerate = true;
        } else {
            let fit = fit_decay_exponent(&r.samples, window)?;
            r.fitted_slope = fit.slope;
            r.intercept = fit.intercept;
            r.r_squared = fit.r_squared;
        }
        r.verdict = r.judge();
        Ok(r)
    }

    /// Probe-stability report over `(cap, value)` samples.
    pub fn stability(name: impl Into<String>, rel_tol: f64, samples: Vec<(f64, f64)>) -> Self {
        let sup_constant = samples.iter().fold(0.0f64, |m, p| m.max(p.1));
        let window = (
            samples.first().map(|p| p.0).unwrap_or(0.0),
            samples.last().map(|p| p.0).unwrap_or(0.0),
        );
        let mut r = Self {
            name: name.into(),
            criterion: Criterion::Stable { rel_tol },
            target_slope: 0.0,
            fitted_slope: 0.0,
            intercept: 0.0,
            r_squared: 1.0,
            window,
            sup_constant,
            degenerate: samples.iter().all(|p| p.1 == 0.0),
            samples,
            verdict: false,
        };
        r.fitted_slope = r.max_relative_change();
        r.verdict = r.judge();
        r
    }

    pub fn max_relative_change(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| {
                if w[0].1 == 0.0 && w[1].1 == 0.0 {
                    0.0
                } else {
                    (w[1].1 - w[0].1).abs() / w[0].1.abs().max(w[1].1.abs())
                }
            })
            .fold(0.0, f64::max)
    }

    /// The verdict implied by the stored fields.
    pub fn judge(&self) -> bool {
        if self.samples.iter().any(|p| !p.1.is_finite()) {
            return false;
        }
        if self.degenerate {
            return true;
        }
        let dev = self.fitted_slope - self.target_slope;
        // a zero target claims boundedness only, and R^2 of a flat series measures noise
        let fit_ok = self.target_slope == 0.0 || self.r_squared >= MIN_R_SQUARED;
        match self.criterion {
            Criterion::Slope { tol } => dev.abs() <= tol && fit_ok,
            Criterion::SlopeAtMost { tol } => dev <= tol && fit_ok,
            Criterion::Flat { tol } => dev.abs() <= tol,
            Criterion::Stable { rel_tol } => self.max_relative_change() <= rel_tol,
        }
    }

    /// Refits from the stored samples and returns the verdict so obtained.
    pub fn recompute_verdict(&self) -> Result<bool> {
        if matches!(self.criterion, Criterion::Stable { .. }) {
            return Ok(Self::stability(&self.name, self.tol(), self.samples.clone()).verdict);
        }
        Ok(Self::from_fit(&self.name, self.criterion, self.target_slope, self.samples.clone(), self.window)?.verdict)
    }

    pub fn tol(&self) -> f64 {
        match self.criterion {
            Criterion::Slope { tol } | Criterion::SlopeAtMost { tol } | Criterion::Flat { tol } => tol,
            Criterion::Stable { rel_tol } => rel_tol,
        }
    }
}

/// Several reports that must all pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeReport {
    pub name: String,
    pub parts: Vec<DecayReport>,
    pub verdict: bool,
}

impl CompositeReport {
    pub fn new(name: impl Into<String>, parts: Vec<DecayReport>) -> Self {
        let verdict = parts.iter().all(|p| p.verdict);
        Self { name: name.into(), parts, verdict }
    }

    pub fn part(&self, name: &str) -> Option<&DecayReport> {
        self.parts.iter().find(|p| p.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn exact_power_law() {
        let s: Vec<(f64, f64)> = geo(10, 0.1, 10.0).into_iter().map(|s| (s, s.powf(-0.5))).collect();
        let f = fit_decay_exponent(&s, (0.1, 10.0)).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_convention() {
        let s: Vec<(f64, f64)> = geo(10, 1.0, 100.0).into_iter().map(|s| (s, 3.0)).collect();
        let f = fit_decay_exponent(&s, (1.0, 100.0)).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn rejects_thin_or_nonpositive() {
        let s: Vec<(f64, f64)> = geo(4, 1.0, 2.0).into_iter().map(|s| (s, s)).collect();
        assert!(fit_decay_exponent(&s, (1.0, 2.0)).is_err());
        let mut s: Vec<(f64, f64)> = geo(8, 1.0, 2.0).into_iter().map(|s| (s, s)).collect();
        s[3].1 = 0.0;
        assert!(fit_decay_exponent(&s, (1.0, 2.0)).is_err());
    }

    #[test]
    fn default_window_trims_log_range() {
        let s: Vec<(f64, f64)> = geo(11, 1.0, 1e5).into_iter().map(|s| (s, 1.0)).collect();
        let (lo, hi) = default_window(&s);
        assert!((lo - 10.0).abs() < 1e-9 && (hi - 1e4).abs() < 1e-6);
    }

    #[test]
    fn stability_report() {
        let r = DecayReport::stability("x", 0.1, vec![(1.0, 2.0), (2.0, 2.1)]);
        assert!(r.verdict);
        let r = DecayReport::stability("x", 0.1, vec![(1.0, 2.0), (2.0, 3.0)]);
        assert!(!r.verdict);
        assert!(!r.recompute_verdict().unwrap());
    }
}
