//! Decay and bootstrap checks on a converged Picard solution.

use crate::error::{param, Error, Result};
use crate::fit::{log_window, CompositeReport, Criterion, DecayReport};
use crate::solver::PicardDiagnostics;
use crate::verify::suite::ExactnessCheck;
use crate::weighted::{combined_weight_sup_capped, k_norm, k_norm_capped, ring_maxima, SpaceTimeField};

pub const SOLUTION_TOL: f64 = 0.1;
pub const PROBE_TOL: f64 = 0.1;
/// Late-time window as log-fractions of the stored time range.
pub const LATE_WINDOW: (f64, f64) = (0.5, 0.8);
pub const SPATIAL_RADII: usize = 12;
pub const MAX_CONTRACTION: f64 = 0.5;

fn probe_caps(u: &SpaceTimeField) -> [f64; 2] {
    let l = u.grid().half_width();
    [l / 4.0, l / 2.0]
}

/// `n` geometric radii spanning `[1, L/2]`.
pub fn spatial_radii(u: &SpaceTimeField, n: usize) -> Vec<f64> {
    let hi = u.grid().half_width() / 2.0;
    (0..n).map(|i| hi.powf(i as f64 / (n - 1) as f64)).collect()
}

fn require_converged(diag: &PicardDiagnostics) -> Result<()> {
    if diag.converged {
        Ok(())
    } else {
        Err(Error::NotConverged)
    }
}

/// Three parts: the combined weighted sup and its stability under doubling
/// the probe radius, the late-time slope of `‖u(t)‖∞` (target `-β/2`), and
/// the spatial slope of `|u|` at the median slice (at most `-β`).
pub fn verify_solution_decay(
    u: &SpaceTimeField,
    diag: &PicardDiagnostics,
    gamma: f64,
    beta: f64,
) -> Result<CompositeReport> {
    require_converged(diag)?;
    if u.grid().half_width() / 2.0 <= 1.0 {
        return Err(param("box too small for a spatial window [1, L/2]"));
    }
    let combined = probe_caps(u)
        .iter()
        .map(|&cap| Ok((cap, combined_weight_sup_capped(u, gamma, beta, cap)?)))
        .collect::<Result<Vec<_>>>()?;
    let combined = DecayReport::stability("combined-sup", PROBE_TOL, combined);

    let times = u.times();
    let sup: Vec<(f64, f64)> = times.iter().zip(u.slices()).map(|(&t, s)| (t, s.max_abs())).collect();
    let window = log_window(times[0], times[times.len() - 1], LATE_WINDOW.0, LATE_WINDOW.1);
    let temporal = DecayReport::from_fit("temporal", Criterion::Slope { tol: SOLUTION_TOL }, -beta / 2.0, sup, window)?;

    let slice = &u.slices()[u.median_index()];
    let radii = spatial_radii(u, SPATIAL_RADII);
    let profile = ring_maxima(u.grid(), &slice.magnitude(), &radii);
    let spatial = DecayReport::from_fit(
        "spatial",
        Criterion::SlopeAtMost { tol: SOLUTION_TOL },
        -beta,
        profile,
        (radii[0], radii[radii.len() - 1]),
    )?;
    Ok(CompositeReport::new("solution-decay", vec![combined, temporal, spatial]))
}

/// `K^1_α` norms over `alphas` and `K^β_β̂` norms over `hat_betas`, each
/// judged stable when the probe radius cap doubles from `L/4` to `L/2`.
pub fn verify_bootstrap(
    u: &SpaceTimeField,
    diag: &PicardDiagnostics,
    beta: f64,
    alphas: &[f64],
    hat_betas: &[f64],
) -> Result<CompositeReport> {
    require_converged(diag)?;
    if alphas.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
        return Err(param("alpha grid must lie in [0, 1]"));
    }
    if hat_betas.iter().any(|&b| !(0.0 <= b && b <= beta)) {
        return Err(param("hat-beta grid must lie in [0, beta]"));
    }
    let t_cap = u.times()[u.len() - 1];
    let caps = probe_caps(u);
    let mut parts = Vec::new();
    for &a in alphas {
        let s = caps.iter().map(|&c| Ok((c, k_norm_capped(u, a, 1.0, t_cap, c)?))).collect::<Result<Vec<_>>>()?;
        parts.push(DecayReport::stability(format!("K1 alpha={a}"), PROBE_TOL, s));
    }
    for &b in hat_betas {
        let s = caps.iter().map(|&c| Ok((c, k_norm_capped(u, b, beta, t_cap, c)?))).collect::<Result<Vec<_>>>()?;
        parts.push(DecayReport::stability(format!("Kbeta hat={b}"), PROBE_TOL, s));
    }
    Ok(CompositeReport::new("bootstrap", parts))
}

/// Contraction, residual and solution-size checks on a finished Picard run:
/// every recorded ratio at most 0.5, residual at most `10 ε`, and
/// `‖u‖_{K^1_α} <= 1.1 / (2 η̂)` when `η̂` is known.
pub fn verify_picard(u: &SpaceTimeField, diag: &PicardDiagnostics, alpha: f64, tol: f64) -> Result<Vec<ExactnessCheck>> {
    require_converged(diag)?;
    let worst = diag.contraction_ratios.iter().copied().fold(0.0, f64::max);
    let mut out = vec![
        ExactnessCheck::new("contraction-ratio", worst, MAX_CONTRACTION),
        ExactnessCheck::new("residual", diag.residual, 10.0 * tol),
    ];
    if let Some(eta) = diag.eta_hat {
        let norm = k_norm(u, alpha, 1.0, u.times()[u.len() - 1])?;
        out.push(ExactnessCheck::new("solution-size", norm, 1.1 / (2.0 * eta)));
    }
    Ok(out)
}
