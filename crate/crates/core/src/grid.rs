//! Periodic surrogate box `[-L, L]^d` with cell-centred nodes.
//!
//! # Truncation error model
//!
//! On the periodic box every field is replaced by its periodisation. For data
//! supported in `|x| <= R0` the nearest periodic image of a heat-kernel bump
//! sits at distance at least `2L - R0 - |x|`, so the wrap-around contamination
//! at time `T` is bounded by `exp(-(L - R0)^2 / 4T)` relative to the peak.
//! Requiring `L >= R0 + 6 sqrt(T)` keeps it below `e^-9`.
//! [`GridSpec::satisfies_truncation`] checks that rule and
//! [`GridSpec::max_resolvable_time`] is its `R0 = 0` form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    half_width: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(d: usize, half_width: f64, n: usize) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::Grid(format!("dimension must be 2 or 3, got {d}")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::Grid("N must be even".into()));
        }
        if n < 16 {
            return Err(Error::Grid(format!("N must be at least 16, got {n}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Grid(format!("L must be positive, got {half_width}")));
        }
        Ok(Self { d, half_width, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Total number of nodes, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Multi-index of a flat index; axis 0 varies slowest. Unused axes are 0.
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for a in (0..self.d).rev() {
            idx[a] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        let mut flat = 0;
        for &i in idx.iter().take(self.d) {
            flat = flat * self.n + i;
        }
        flat
    }

    pub fn node(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    pub fn radius(&self, flat: usize) -> f64 {
        let x = self.node(flat);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// `|x|` at every node, in flat order.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }

    /// Signed integer wavenumber of FFT-order index `i`, in `-N/2..N/2`.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Physical wavenumber `(pi/L) * mode(i)`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        std::f64::consts::PI / self.half_width * self.mode(i) as f64
    }

    /// Wave vector of a flat spectral index. Unused axes are 0.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut k = [0.0; 3];
        for a in 0..self.d {
            k[a] = self.wavenumber(idx[a]);
        }
        k
    }

    /// True when any axis sits on the Nyquist index `N/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.unravel(flat);
        idx.iter().take(self.d).any(|&i| i == self.n / 2)
    }

    pub fn min_resolvable_time(&self) -> f64 {
        self.spacing().powi(2)
    }

    pub fn max_resolvable_time(&self) -> f64 {
        (self.half_width / 6.0).powi(2)
    }

    pub fn satisfies_truncation(&self, support_radius: f64, t_max: f64) -> bool {
        self.half_width >= support_radius + 6.0 * t_max.sqrt()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Flat index of the node at `idx = N/2` on every axis, at `x = (h/2, ..)`.
    pub fn center_index(&self) -> usize {
        self.ravel([self.n / 2; 3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_grid() {
        let g = GridSpec::new(2, 8.0, 16).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.coord(0), -7.5);
        let g3 = GridSpec::new(3, 4.0, 32).unwrap();
        assert_eq!(g3.spacing(), 0.25);
        assert_eq!(g3.len(), 32768);
    }

    #[test]
    fn rejects_bad_shapes() {
        let e = GridSpec::new(2, 8.0, 15).unwrap_err();
        assert!(e.to_string().contains("N must be even"));
        assert!(GridSpec::new(2, 8.0, 14).is_err());
        assert!(GridSpec::new(2, 0.0, 16).is_err());
        assert!(GridSpec::new(1, 1.0, 16).is_err());
        assert!(GridSpec::new(4, 1.0, 16).is_err());
    }

    #[test]
    fn no_node_at_origin() {
        let g = GridSpec::new(2, 1.0, 16).unwrap();
        assert!(g.radii().iter().all(|&r| r > 0.0));
    }

    #[test]
    fn ravel_roundtrip() {
        let g = GridSpec::new(3, 1.0, 16).unwrap();
        for flat in [0, 1, 17, 300, g.len() - 1] {
            assert_eq!(g.ravel(g.unravel(flat)), flat);
        }
        let c = g.node(g.center_index());
        assert!((c[0] - g.spacing() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn wavenumbers_span_half_open_band() {
        let g = GridSpec::new(2, 2.0, 16).unwrap();
        let modes: Vec<i64> = (0..16).map(|i| g.mode(i)).collect();
        assert_eq!(*modes.iter().min().unwrap(), -8);
        assert_eq!(*modes.iter().max().unwrap(), 7);
        assert!(g.is_nyquist(g.ravel([8, 0, 0])));
    }
}
