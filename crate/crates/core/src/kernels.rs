//! Heat semigroup, Leray projection and the Oseen operator `e^{tΔ} P ∇·` as
//! Fourier multipliers, with pointwise kernel audits.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::field::{ScalarField, TensorField, VectorField};
use crate::grid::GridSpec;
use crate::spectral::{
    fft_nd, from_spectral, to_spectral, vector_from_spectral, vector_to_spectral, SpectralField,
    WaveTable,
};

/// Fields that a real, even Fourier multiplier can act on componentwise.
pub trait Multipliable: Sized {
    fn apply_multiplier(&self, m: &(dyn Fn(&[f64; 3]) -> f64 + Sync)) -> Self;
}

impl Multipliable for ScalarField {
    fn apply_multiplier(&self, m: &(dyn Fn(&[f64; 3]) -> f64 + Sync)) -> Self {
        from_spectral(&to_spectral(self).multiplied(m))
    }
}

impl Multipliable for VectorField {
    fn apply_multiplier(&self, m: &(dyn Fn(&[f64; 3]) -> f64 + Sync)) -> Self {
        let comps = self.components().iter().map(|c| c.apply_multiplier(m)).collect();
        VectorField::new(comps).expect("components share the grid")
    }
}

/// `e^{tΔ} f` through the multiplier `exp(-t |k|^2)`.
pub fn heat_apply<F: Multipliable + Clone>(f: &F, t: f64) -> Result<F> {
    if !(t >= 0.0) {
        return Err(param(format!("heat time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.apply_multiplier(&move |k: &[f64; 3]| (-t * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2])).exp()))
}

/// Heat flow of spectral vector coefficients, returned in physical space.
pub(crate) fn heat_spectral(hat: &[SpectralField], table: &WaveTable, t: f64) -> VectorField {
    let comps: Vec<SpectralField> = hat
        .iter()
        .map(|c| {
            let mut out = c.clone();
            for (v, k2) in out.coeffs_mut().iter_mut().zip(&table.k2) {
                *v *= (-t * k2).exp();
            }
            out
        })
        .collect();
    vector_from_spectral(&comps)
}

/// Helmholtz–Leray projection `δ_jm - k_j k_m / |k|^2`, identity at `k = 0`.
pub fn leray_project(u: &VectorField) -> VectorField {
    let g = *u.grid();
    let table = WaveTable::new(&g);
    let mut hat = vector_to_spectral(u);
    let d = g.dim();
    let n = g.len();
    let mut cols: Vec<Vec<Complex64>> = hat.iter().map(|c| c.coeffs().to_vec()).collect();
    for flat in 0..n {
        let k = table.kvec(flat);
        let kk: f64 = k.iter().map(|x| x * x).sum();
        if kk == 0.0 {
            continue;
        }
        let mut dot = Complex64::default();
        for a in 0..d {
            dot += cols[a][flat] * k[a];
        }
        for a in 0..d {
            cols[a][flat] -= dot * (k[a] / kk);
        }
    }
    for (h, c) in hat.iter_mut().zip(cols) {
        h.coeffs_mut().copy_from_slice(&c);
    }
    vector_from_spectral(&hat)
}

/// Adds `weight * e^{-s|k|^2} P (i k . F)` to `acc` for row-major tensor
/// coefficients `f` (`d*d` arrays of length `N^d`).
pub(crate) fn oseen_accumulate(
    table: &WaveTable,
    f: &[Vec<Complex64>],
    s: f64,
    weight: f64,
    acc: &mut [Vec<Complex64>],
) {
    let d = table.d;
    let n = table.k2.len();
    let i = Complex64::new(0.0, 1.0);
    for flat in 0..n {
        let k = table.kvec(flat);
        let kk: f64 = k.iter().map(|x| x * x).sum();
        if kk == 0.0 {
            continue;
        }
        let mut div = [Complex64::default(); 3];
        for m in 0..d {
            let mut s_ = Complex64::default();
            for l in 0..d {
                s_ += f[m * d + l][flat] * k[l];
            }
            div[m] = i * s_;
        }
        let mut dot = Complex64::default();
        for m in 0..d {
            dot += div[m] * k[m];
        }
        let w = weight * (-s * table.k2[flat]).exp();
        for j in 0..d {
            acc[j][flat] += (div[j] - dot * (k[j] / kk)) * w;
        }
    }
}

/// `e^{tΔ} P ∇·F` as one fused multiplier.
pub fn oseen_apply(f: &TensorField, t: f64) -> Result<VectorField> {
    if !(t > 0.0) {
        return Err(param(format!("Oseen time must be positive, got {t}")));
    }
    let g = *f.grid();
    let table = WaveTable::new(&g);
    let fhat: Vec<Vec<Complex64>> =
        f.components().par_iter().map(|c| to_spectral(c).coeffs().to_vec()).collect();
    let mut acc = vec![vec![Complex64::default(); g.len()]; g.dim()];
    oseen_accumulate(&table, &fhat, t, 1.0, &mut acc);
    let comps: Vec<SpectralField> = acc
        .into_iter()
        .map(|c| SpectralField::from_coeffs(g, c).expect("sizes match"))
        .collect();
    Ok(vector_from_spectral(&comps))
}

/// The matrix kernel `K_{jml}` of `e^{tΔ} P ∇·` sampled at lattice offsets
/// from the centre node, so `(e^{tΔ} P ∇·F)_j = sum_{m,l} K_{jml} * F_{ml}`.
#[derive(Debug, Clone)]
pub struct OseenKernel {
    grid: GridSpec,
    t: f64,
    comps: Vec<Vec<f64>>,
}

impl OseenKernel {
    /// Applies the multiplier to a discrete delta of unit mass at the centre node.
    pub fn reconstruct(grid: GridSpec, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(param("kernel time must be positive"));
        }
        let d = grid.dim();
        let table = WaveTable::new(&grid);
        let xc = grid.node(grid.center_index());
        let x0 = grid.coord(0);
        let norm = 1.0 / (grid.len() as f64 * grid.cell_volume());
        let delta: Vec<Complex64> = (0..grid.len())
            .map(|flat| {
                let k = grid.wavevector(flat);
                let phase: f64 = (0..d).map(|a| -k[a] * (xc[a] - x0)).sum();
                Complex64::from_polar(norm, phase)
            })
            .collect();
        let mut idx = Vec::new();
        for j in 0..d {
            for m in 0..d {
                for l in 0..d {
                    idx.push((j, m, l));
                }
            }
        }
        let comps = idx
            .par_iter()
            .map(|&(j, m, l)| {
                let mut buf: Vec<Complex64> = (0..grid.len())
                    .map(|flat| {
                        let k = table.kvec(flat);
                        let kk: f64 = k.iter().map(|x| x * x).sum();
                        let p = if kk == 0.0 {
                            if j == m { 1.0 } else { 0.0 }
                        } else {
                            (if j == m { 1.0 } else { 0.0 }) - k[j] * k[m] / kk
                        };
                        let heat = (-t * table.k2[flat]).exp();
                        delta[flat] * Complex64::new(0.0, k[l] * p * heat)
                    })
                    .collect();
                fft_nd(&grid, &mut buf, true);
                buf.into_iter().map(|c| c.re).collect()
            })
            .collect();
        Ok(Self { grid, t, comps })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn component(&self, j: usize, m: usize, l: usize) -> &[f64] {
        let d = self.grid.dim();
        &self.comps[(j * d + m) * d + l]
    }

    /// Flat node index at lattice offset `n` from the centre, if inside the box.
    pub fn offset_index(&self, n: [i64; 3]) -> Option<usize> {
        let c = (self.grid.points_per_axis() / 2) as i64;
        let np = self.grid.points_per_axis() as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.grid.dim() {
            let i = c + n[a];
            if i < 0 || i >= np {
                return None;
            }
            idx[a] = i as usize;
        }
        Some(self.grid.ravel(idx))
    }

    /// Lattice offset of a flat index from the centre node.
    pub fn offset_of(&self, flat: usize) -> [i64; 3] {
        let c = (self.grid.points_per_axis() / 2) as i64;
        let idx = self.grid.unravel(flat);
        let mut n = [0i64; 3];
        for a in 0..self.grid.dim() {
            n[a] = idx[a] as i64 - c;
        }
        n
    }

    /// Frobenius norm over `(j, m, l)` at one node.
    pub fn frobenius(&self, flat: usize) -> f64 {
        self.comps.iter().map(|c| c[flat] * c[flat]).sum::<f64>().sqrt()
    }
}

/// Outcome of comparing `t^{(d+1)/2} K_t(y)` with `(4t)^{(d+1)/2} K_{4t}(2y)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfSimilarity {
    pub t: f64,
    pub radius_cap: f64,
    pub max_abs_diff: f64,
    pub profile_max: f64,
    /// `max_abs_diff / profile_max`.
    pub rel_error: f64,
    pub n_points: usize,
}

/// Checks the collapse of rescaled kernels at `t` and `4t` on lattice offsets
/// `|y| <= L/3`, componentwise, relative to the profile's sup.
pub fn oseen_self_similarity(grid: GridSpec, t: f64) -> Result<SelfSimilarity> {
    let d = grid.dim();
    let p = (d as f64 + 1.0) / 2.0;
    let k1 = OseenKernel::reconstruct(grid, t)?;
    let k4 = OseenKernel::reconstruct(grid, 4.0 * t)?;
    let h = grid.spacing();
    let cap = grid.half_width() / 3.0;
    let (s1, s4) = (t.powf(p), (4.0 * t).powf(p));
    let mut max_diff = 0.0f64;
    let mut max_val = 0.0f64;
    let mut count = 0;
    for flat in 0..grid.len() {
        let n = k1.offset_of(flat);
        let r = h * (n.iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt();
        if r > cap {
            continue;
        }
        let Some(far) = k4.offset_index([2 * n[0], 2 * n[1], 2 * n[2]]) else {
            continue;
        };
        count += 1;
        for (a, b) in k1.comps.iter().zip(&k4.comps) {
            let va = s1 * a[flat];
            let vb = s4 * b[far];
            max_diff = max_diff.max((va - vb).abs());
            max_val = max_val.max(va.abs());
        }
    }
    Ok(SelfSimilarity {
        t,
        radius_cap: cap,
        max_abs_diff: max_diff,
        profile_max: max_val,
        rel_error: if max_val > 0.0 { max_diff / max_val } else { 0.0 },
        n_points: count,
    })
}

/// Ring maxima of `(1 + |y|)^{d+1} t^{(d+1)/2} |K_t(sqrt(t) y)|` on geometric
/// radii `1 <= |y| <= L/(3 sqrt t)`.
pub fn oseen_decay_profile(grid: GridSpec, t: f64, n_radii: usize) -> Result<Vec<(f64, f64)>> {
    if n_radii < 2 {
        return Err(param("need at least two radii"));
    }
    let d = grid.dim();
    let kern = OseenKernel::reconstruct(grid, t)?;
    let st = t.sqrt();
    let y_hi = grid.half_width() / (3.0 * st);
    if y_hi <= 1.0 {
        return Err(param("time too large for the decay window"));
    }
    let h = grid.spacing();
    let half_ring = 0.5 * h / st;
    let pw = d as f64 + 1.0;
    let scale = t.powf(pw / 2.0);
    let ys: Vec<f64> =
        (0..n_radii).map(|i| y_hi.powf(i as f64 / (n_radii - 1) as f64)).collect();
    let mut best = vec![0.0f64; n_radii];
    for flat in 0..grid.len() {
        let n = kern.offset_of(flat);
        let y = h * (n.iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt() / st;
        for (b, &yr) in best.iter_mut().zip(&ys) {
            if (y - yr).abs() <= half_ring {
                *b = b.max((1.0 + y).powf(pw) * scale * kern.frobenius(flat));
            }
        }
    }
    Ok(ys.into_iter().zip(best).filter(|(_, v)| *v > 0.0).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Heat,
    Oseen,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelProbe {
    pub x: Vec<f64>,
    pub t: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelBoundAudit {
    pub kind: KernelKind,
    pub alpha: f64,
    /// Which inequality the ratio normalises by.
    pub bound: String,
    pub probes: Vec<KernelProbe>,
    pub max_ratio: f64,
    pub argmax: usize,
}

/// Max over probes of `|kernel(x,t)| |x|^α t^{(d-α)/2}` (heat) or
/// `|F_t(x)| |x|^α t^{(d+1-α)/2}` (Oseen, Frobenius over all indices).
///
/// Oseen probes are snapped to the nearest lattice offset from the centre
/// node; the recorded `x` is the snapped point.
pub fn audit_kernel_bound(
    grid: GridSpec,
    kind: KernelKind,
    alpha: f64,
    probes: &[(Vec<f64>, f64)],
) -> Result<KernelBoundAudit> {
    let d = grid.dim();
    let df = d as f64;
    let top = match kind {
        KernelKind::Heat => df,
        KernelKind::Oseen => df + 1.0,
    };
    if !(0.0..=top).contains(&alpha) {
        return Err(param(format!("alpha = {alpha} outside [0, {top}]")));
    }
    if probes.is_empty() {
        return Err(param("no probes"));
    }
    let h = grid.spacing();
    let (t_lo, t_hi) = (grid.min_resolvable_time(), grid.max_resolvable_time());
    for (x, t) in probes {
        if x.len() != d {
            return Err(param("probe dimension does not match grid"));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < 2.0 * h * (1.0 - 1e-12) {
            return Err(param(format!("probe |x| = {r} below 2h")));
        }
        if *t < t_lo * (1.0 - 1e-12) || *t > t_hi * (1.0 + 1e-12) {
            return Err(param(format!("probe t = {t} outside [{t_lo}, {t_hi}]")));
        }
    }
    let mut kernels: BTreeMap<u64, OseenKernel> = BTreeMap::new();
    if kind == KernelKind::Oseen {
        for (_, t) in probes {
            if let std::collections::btree_map::Entry::Vacant(e) = kernels.entry(t.to_bits()) {
                e.insert(OseenKernel::reconstruct(grid, *t)?);
            }
        }
    }
    let mut out = Vec::with_capacity(probes.len());
    for (x, t) in probes {
        let (xs, val) = match kind {
            KernelKind::Heat => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (x.clone(), (4.0 * std::f64::consts::PI * t).powf(-df / 2.0) * (-r2 / (4.0 * t)).exp())
            }
            KernelKind::Oseen => {
                let kern = &kernels[&t.to_bits()];
                let mut n = [0i64; 3];
                for a in 0..d {
                    n[a] = (x[a] / h).round() as i64;
                }
                let flat = kern
                    .offset_index(n)
                    .ok_or_else(|| param("probe outside the box"))?;
                let xs = (0..d).map(|a| n[a] as f64 * h).collect::<Vec<_>>();
                (xs, kern.frobenius(flat))
            }
        };
        let r = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ratio = val * r.powf(alpha) * t.powf((top - alpha) / 2.0);
        out.push(KernelProbe { x: xs, t: *t, ratio });
    }
    let (argmax, max_ratio) = out
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, p)| if p.ratio > bv { (i, p.ratio) } else { (bi, bv) });
    let bound = match kind {
        KernelKind::Heat => "heat: |x|^-a t^-(d-a)/2",
        KernelKind::Oseen => "oseen: |x|^-a t^-(d+1-a)/2",
    };
    Ok(KernelBoundAudit { kind, alpha, bound: bound.into(), probes: out, max_ratio, argmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{curl_of_potential, divergence, tensor_divergence};
    use std::f64::consts::PI;

    #[test]
    fn harmonic_decays_by_eigenvalue() {
        let l = 4.0;
        let g = GridSpec::new(2, l, 32).unwrap();
        let f = ScalarField::from_fn(g, |x| (PI * x[0] / l).cos());
        let out = heat_apply(&f, 1.0).unwrap();
        let expect = f.scaled((-(PI / l).powi(2)).exp());
        assert!(out.axpy(-1.0, &expect).unwrap().max_abs() < 1e-13);
        assert!(heat_apply(&f, -1.0).is_err());
    }

    #[test]
    fn leray_on_diagonal_mode() {
        let l = PI;
        let g = GridSpec::new(2, l, 16).unwrap();
        let u = VectorField::from_fn(g, |x| [(x[0] + x[1]).cos(), 0.0, 0.0]);
        let p = leray_project(&u);
        let c = p.component(0).samples();
        let e = p.component(1).samples();
        for i in 0..g.len() {
            let x = g.node(i);
            let base = (x[0] + x[1]).cos();
            assert!((c[i] - 0.5 * base).abs() < 1e-13);
            assert!((e[i] + 0.5 * base).abs() < 1e-13);
        }
    }

    #[test]
    fn oseen_matches_composition() {
        let l = 3.0;
        let g = GridSpec::new(2, l, 32).unwrap();
        let psi = ScalarField::from_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp());
        let u = curl_of_potential(&psi);
        let v = VectorField::from_fn(g, |x| [(PI * x[1] / l).sin(), (PI * x[0] / l).cos(), 0.0]);
        let f = crate::field::tensor_product(&u, &v).unwrap();
        let fused = oseen_apply(&f, 0.3).unwrap();
        let composed = heat_apply(&leray_project(&tensor_divergence(&f)), 0.3).unwrap();
        let err = fused.sub(&composed).unwrap().max_abs();
        assert!(err < 1e-12 * composed.max_abs().max(1.0), "err {err}");
        assert!(divergence(&fused).max_abs() < 1e-12 * fused.max_abs());
    }

    #[test]
    fn constant_tensor_is_annihilated() {
        let g = GridSpec::new(2, 2.0, 16).unwrap();
        let f = TensorField::single(ScalarField::from_fn(g, |_| 2.5), 0, 1);
        assert!(oseen_apply(&f, 0.5).unwrap().max_abs() < 1e-14);
        assert!(oseen_apply(&f, 0.0).is_err());
    }

    #[test]
    fn kernel_reproduces_operator() {
        let g = GridSpec::new(2, 3.0, 32).unwrap();
        let t = 0.2;
        let f = ScalarField::from_fn(g, |x| {
            let (a, b) = (x[0] - g.spacing() / 2.0, x[1] - g.spacing() / 2.0);
            if a.abs() < 1e-9 && b.abs() < 1e-9 { 1.0 / g.cell_volume() } else { 0.0 }
        });
        let out = oseen_apply(&TensorField::single(f, 1, 0), t).unwrap();
        let k = OseenKernel::reconstruct(g, t).unwrap();
        for j in 0..2 {
            let diff = out
                .component(j)
                .samples()
                .iter()
                .zip(k.component(j, 1, 0))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(diff < 1e-10, "component {j}: {diff}");
        }
    }

    #[test]
    fn heat_audit_alpha_zero_peak() {
        let g = GridSpec::new(2, 12.0, 64).unwrap();
        let h = g.spacing();
        let probes: Vec<(Vec<f64>, f64)> =
            [0.2, 0.5, 1.0].iter().map(|&t| (vec![2.0 * h, 0.0], t)).collect();
        let a = audit_kernel_bound(g, KernelKind::Heat, 0.0, &probes).unwrap();
        assert!(a.max_ratio <= 1.0 / (4.0 * PI) + 1e-15);
        assert!(audit_kernel_bound(g, KernelKind::Heat, 3.0, &probes).is_err());
        let bad = vec![(vec![h, 0.0], 0.5)];
        assert!(audit_kernel_bound(g, KernelKind::Heat, 0.0, &bad).is_err());
    }

    #[test]
    fn heat_audit_alpha_d_on_the_parabola() {
        // |x| = 2 sqrt(t): |x|^d t^0 (4πt)^{-d/2} e^{-1} = 2^d e^{-1} (4π)^{-d/2}.
        let g = GridSpec::new(2, 12.0, 64).unwrap();
        let probes: Vec<(Vec<f64>, f64)> =
            [0.3, 1.0, 2.5].iter().map(|&t: &f64| (vec![0.6 * 2.0 * t.sqrt(), 0.8 * 2.0 * t.sqrt()], t)).collect();
        let a = audit_kernel_bound(g, KernelKind::Heat, 2.0, &probes).unwrap();
        let c = 4.0 * (-1.0f64).exp() / (4.0 * PI);
        for p in &a.probes {
            assert!((p.ratio / c - 1.0).abs() < 1e-12, "{}", p.ratio);
        }
    }
}
