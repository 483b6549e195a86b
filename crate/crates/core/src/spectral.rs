//! Discrete Fourier layer on the periodic box.
//!
//! Coefficients use the index-phase convention
//! `f(x_n) = sum_k F_k exp(i k (x_n - x_0))` with `x_0 = -L + h/2`, and the
//! forward transform carries `1/N^d`. Wavenumbers run over
//! `(pi/L) * {-N/2, .., N/2 - 1}` per axis and are stored in FFT order.
//!
//! Derivatives use the wave vector with Nyquist components set to zero, the
//! usual choice for real fields. Projection and Oseen multipliers use the same
//! vector, so `k . P(k) = 0` holds exactly on the discrete space.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::{same_grid, ScalarField, TensorField, VectorField};
use crate::grid::GridSpec;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let mut planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new())).lock().unwrap();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Unnormalised in-place d-dimensional transform, one axis at a time.
pub(crate) fn fft_nd(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.points_per_axis();
    let d = grid.dim();
    let fft = plan(n, inverse);
    let scratch_len = fft.get_inplace_scratch_len();
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        if stride == 1 {
            data.par_chunks_mut(n * 64).for_each(|lines| {
                let mut scratch = vec![Complex64::default(); scratch_len];
                fft.process_with_scratch(lines, &mut scratch);
            });
            continue;
        }
        let block = n * stride;
        data.par_chunks_mut(block).for_each(|blk| {
            let mut buf = vec![Complex64::default(); block];
            for k in 0..n {
                for j in 0..stride {
                    buf[j * n + k] = blk[k * stride + j];
                }
            }
            let mut scratch = vec![Complex64::default(); scratch_len];
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                for j in 0..stride {
                    blk[k * stride + j] = buf[j * n + k];
                }
            }
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(crate::error::param("coefficient count does not match grid"));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at signed integer modes `m` (each in `-N/2..N/2`).
    pub fn at_mode(&self, m: [i64; 3]) -> Complex64 {
        let n = self.grid.points_per_axis() as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.grid.dim() {
            idx[a] = m[a].rem_euclid(n) as usize;
        }
        self.coeffs[self.grid.ravel(idx)]
    }

    /// `(2L)^d sum |F_k|^2`, equal to `h^d sum |f|^2` by Parseval.
    pub fn energy(&self) -> f64 {
        let vol = (2.0 * self.grid.half_width()).powi(self.grid.dim() as i32);
        vol * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Checks `F(-k) = conj(F(k))` to absolute tolerance `tol * max|F|`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let g = &self.grid;
        let n = g.points_per_axis();
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        (0..g.len()).all(|flat| {
            let idx = g.unravel(flat);
            let mut neg = [0usize; 3];
            for a in 0..g.dim() {
                neg[a] = (n - idx[a]) % n;
            }
            let mirror = self.coeffs[g.ravel(neg)];
            (self.coeffs[flat] - mirror.conj()).norm() <= tol * scale
        })
    }

    /// Multiplies every coefficient by `m(k)` evaluated on the true wave vector.
    pub fn multiplied(&self, m: impl Fn(&[f64; 3]) -> f64 + Sync) -> Self {
        let g = self.grid;
        let coeffs = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(flat, c)| c * m(&g.wavevector(flat)))
            .collect();
        Self { grid: g, coeffs }
    }

    pub fn add_scaled(&mut self, c: Complex64, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }
}

/// Per-grid arrays of the derivative wave vector and `|k|^2`.
#[derive(Debug, Clone)]
pub(crate) struct WaveTable {
    pub(crate) d: usize,
    /// Derivative wave vector, Nyquist components zeroed; `d` entries per mode.
    pub(crate) kd: Vec<f64>,
    /// True `|k|^2` for the heat multiplier.
    pub(crate) k2: Vec<f64>,
}

impl WaveTable {
    pub(crate) fn new(grid: &GridSpec) -> Self {
        let d = grid.dim();
        let n = grid.points_per_axis();
        let mut kd = Vec::with_capacity(grid.len() * d);
        let mut k2 = Vec::with_capacity(grid.len());
        for flat in 0..grid.len() {
            let idx = grid.unravel(flat);
            let mut s = 0.0;
            for a in 0..d {
                let k = grid.wavenumber(idx[a]);
                s += k * k;
                kd.push(if idx[a] == n / 2 { 0.0 } else { k });
            }
            k2.push(s);
        }
        Self { d, kd, k2 }
    }

    pub(crate) fn kvec(&self, flat: usize) -> &[f64] {
        &self.kd[flat * self.d..(flat + 1) * self.d]
    }
}

/// Derivative wave vector of one mode (Nyquist components zeroed).
pub fn derivative_wavevector(grid: &GridSpec, flat: usize) -> [f64; 3] {
    let idx = grid.unravel(flat);
    let mut k = grid.wavevector(flat);
    for a in 0..grid.dim() {
        if idx[a] == grid.points_per_axis() / 2 {
            k[a] = 0.0;
        }
    }
    k
}

pub fn to_spectral(f: &ScalarField) -> SpectralField {
    let g = *f.grid();
    let mut coeffs: Vec<Complex64> = f.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&g, &mut coeffs, false);
    let s = 1.0 / g.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= s);
    SpectralField { grid: g, coeffs }
}

/// Inverse transform, keeping the real part.
pub fn from_spectral(f: &SpectralField) -> ScalarField {
    let g = f.grid;
    let mut buf = f.coeffs.clone();
    fft_nd(&g, &mut buf, true);
    ScalarField::from_vec_unchecked(g, buf.into_iter().map(|c| c.re).collect())
}

pub fn vector_to_spectral(u: &VectorField) -> Vec<SpectralField> {
    u.components().iter().map(to_spectral).collect()
}

pub fn vector_from_spectral(u: &[SpectralField]) -> VectorField {
    let g = *u[0].grid();
    let comps = u.iter().map(from_spectral).collect();
    VectorField::new(comps).unwrap_or_else(|_| VectorField::zeros(g))
}

/// Spectral derivative along `axis`.
pub fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    let g = f.grid;
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(flat, c)| c * Complex64::new(0.0, derivative_wavevector(&g, flat)[axis]))
        .collect();
    SpectralField { grid: g, coeffs }
}

/// `sum_l i k_l u_l`.
pub fn divergence(u: &VectorField) -> ScalarField {
    let g = *u.grid();
    let mut acc = SpectralField::zeros(g);
    for (axis, c) in u.components().iter().enumerate() {
        acc.add_scaled(Complex64::new(1.0, 0.0), &derivative(&to_spectral(c), axis));
    }
    from_spectral(&acc)
}

/// Row divergence `(div F)_i = sum_j d_j F_ij`.
pub fn tensor_divergence(f: &TensorField) -> VectorField {
    let g = *f.grid();
    let d = g.dim();
    let comps = (0..d)
        .map(|i| {
            let mut acc = SpectralField::zeros(g);
            for j in 0..d {
                acc.add_scaled(
                    Complex64::new(1.0, 0.0),
                    &derivative(&to_spectral(f.component(i, j)), j),
                );
            }
            from_spectral(&acc)
        })
        .collect();
    VectorField::new(comps).expect("components share the grid")
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let hat = to_spectral(f);
    let comps = (0..f.grid().dim()).map(|a| from_spectral(&derivative(&hat, a))).collect();
    VectorField::new(comps).expect("components share the grid")
}

/// `-|k|^2 f` on the derivative wave vector.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let hat = to_spectral(f);
    let g = *f.grid();
    let coeffs = hat
        .coeffs
        .iter()
        .enumerate()
        .map(|(flat, c)| {
            let k = derivative_wavevector(&g, flat);
            c * -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2])
        })
        .collect();
    from_spectral(&SpectralField { grid: g, coeffs })
}

/// Divergence-free field from a scalar potential: `(-d_2 psi, d_1 psi)` in
/// two dimensions, `curl(0, 0, psi) = (d_2 psi, -d_1 psi, 0)` in three.
pub fn curl_of_potential(psi: &ScalarField) -> VectorField {
    let g = *psi.grid();
    let hat = to_spectral(psi);
    let d1 = from_spectral(&derivative(&hat, 0));
    let d2 = from_spectral(&derivative(&hat, 1));
    let comps = if g.dim() == 2 {
        vec![d2.scaled(-1.0), d1]
    } else {
        vec![d2, d1.scaled(-1.0), ScalarField::zeros(g)]
    };
    VectorField::new(comps).expect("components share the grid")
}

/// Periodic convolution `int f(y) g(x - y) dy` over the box.
///
/// The product of coefficients picks up the phase `exp(-i k x_0)` of the
/// cell-centred origin offset; Nyquist modes are dropped.
pub fn convolution(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    same_grid(f.grid(), g.grid())?;
    let grid = *f.grid();
    let fh = to_spectral(f);
    let gh = to_spectral(g);
    let x0 = grid.coord(0);
    let vol = (2.0 * grid.half_width()).powi(grid.dim() as i32);
    let coeffs = (0..grid.len())
        .map(|flat| {
            if grid.is_nyquist(flat) {
                return Complex64::default();
            }
            let k = grid.wavevector(flat);
            let phase = -(k[0] + k[1] + k[2]) * x0;
            fh.coeffs[flat] * gh.coeffs[flat] * Complex64::from_polar(vol, phase)
        })
        .collect();
    Ok(from_spectral(&SpectralField { grid, coeffs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_is_pure_mean() {
        let g = GridSpec::new(2, 3.0, 16).unwrap();
        let hat = to_spectral(&ScalarField::from_fn(g, |_| 1.0));
        assert!((hat.coeffs()[0].re - 1.0).abs() < 1e-14);
        assert!(hat.coeffs().iter().skip(1).all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn parseval_with_box_volume() {
        let g = GridSpec::new(2, 2.5, 32).unwrap();
        let f = ScalarField::from_fn(g, |x| (-(x[0] - 0.3).powi(2) - 2.0 * x[1] * x[1]).exp() + 0.1 * x[0].sin());
        let direct = g.cell_volume() * f.samples().iter().map(|v| v * v).sum::<f64>();
        assert!((to_spectral(&f).energy() / direct - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_harmonic_has_two_modes() {
        let l = 3.0;
        let g = GridSpec::new(2, l, 16).unwrap();
        let hat = to_spectral(&ScalarField::from_fn(g, |x| (PI * x[0] / l).cos()));
        let big: Vec<usize> = (0..g.len()).filter(|&i| hat.coeffs()[i].norm() > 1e-12).collect();
        assert_eq!(big.len(), 2);
        for i in big {
            let k = g.wavevector(i);
            assert!((k[0].abs() - PI / l).abs() < 1e-14 && k[1] == 0.0);
            assert!((hat.coeffs()[i].norm() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn real_fields_are_conjugate_symmetric() {
        let g = GridSpec::new(2, 1.0, 16).unwrap();
        let f = ScalarField::from_fn(g, |x| (3.0 * x[0]).sin() + x[1].powi(2) + 0.3 * x[0] * x[1]);
        assert!(to_spectral(&f).is_conjugate_symmetric(1e-13));
        let mut hat = to_spectral(&f);
        hat.coeffs_mut()[5] += Complex64::new(0.0, 0.1);
        assert!(!hat.is_conjugate_symmetric(1e-13));
    }

    #[test]
    fn divergence_of_shear_vanishes() {
        let l = 2.0;
        let g = GridSpec::new(2, l, 32).unwrap();
        let u = VectorField::from_fn(g, |x| [(PI * x[1] / l).cos(), 0.0, 0.0]);
        assert!(divergence(&u).max_abs() < 1e-12);
    }

    #[test]
    fn three_dimensional_transform_roundtrip() {
        let g = GridSpec::new(3, 1.0, 16).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] - 0.3 * x[1] + x[2] * x[2]).sin());
        let back = from_spectral(&to_spectral(&f));
        let err = back.axpy(-1.0, &f).unwrap().max_abs();
        assert!(err < 1e-13 * f.max_abs());
    }
}
