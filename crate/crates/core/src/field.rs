//! Real-valued samples on a [`GridSpec`].

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Param(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, data })
    }

    pub(crate) fn from_vec_unchecked(grid: GridSpec, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    /// Samples `f(x)` at every node; `x` has `d` entries.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let data = (0..grid.len()).map(|i| f(&grid.node(i)[..d])).collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_vec_unchecked(self.grid, self.data.iter().map(|v| c * v).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        Ok(Self::from_vec_unchecked(self.grid, data))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(Self::from_vec_unchecked(self.grid, data))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> Result<Self> {
        let grid = *comps.first().ok_or_else(|| Error::Param("no components".into()))?.grid();
        if comps.len() != grid.dim() {
            return Err(Error::Param(format!(
                "vector field needs {} components, got {}",
                grid.dim(),
                comps.len()
            )));
        }
        for c in &comps {
            same_grid(&grid, c.grid())?;
        }
        Ok(Self { grid, comps })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, comps: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> [f64; 3]) -> Self {
        let d = grid.dim();
        let mut comps: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); d];
        for i in 0..grid.len() {
            let v = f(&grid.node(i)[..d]);
            for (a, c) in comps.iter_mut().enumerate() {
                c.push(v[a]);
            }
        }
        Self {
            grid,
            comps: comps.into_iter().map(|c| ScalarField::from_vec_unchecked(grid, c)).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.comps
    }

    /// Euclidean magnitude at every node.
    pub fn magnitude(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for c in &self.comps {
            for (o, v) in out.iter_mut().zip(c.samples()) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|o| *o = o.sqrt());
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, comps: self.comps.iter().map(|f| f.scaled(c)).collect() }
    }

    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.axpy(c, b))
            .collect::<Result<_>>()?;
        Ok(Self { grid: self.grid, comps })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }
}

/// Rank-two tensor field stored row-major: component `(i, j)` at `i * d + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: GridSpec,
    comps: Vec<ScalarField>,
}

impl TensorField {
    pub fn new(comps: Vec<ScalarField>) -> Result<Self> {
        let grid = *comps.first().ok_or_else(|| Error::Param("no components".into()))?.grid();
        let d = grid.dim();
        if comps.len() != d * d {
            return Err(Error::Param(format!(
                "tensor field needs {} components, got {}",
                d * d,
                comps.len()
            )));
        }
        for c in &comps {
            same_grid(&grid, c.grid())?;
        }
        Ok(Self { grid, comps })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let d = grid.dim();
        Self { grid, comps: (0..d * d).map(|_| ScalarField::zeros(grid)).collect() }
    }

    /// A tensor whose only nonzero entry is `(i, j) = f`.
    pub fn single(f: ScalarField, i: usize, j: usize) -> Self {
        let grid = *f.grid();
        let mut t = Self::zeros(grid);
        t.comps[i * grid.dim() + j] = f;
        t
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i * self.grid.dim() + j]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn transpose(&self) -> Self {
        let d = self.grid.dim();
        let comps = (0..d * d).map(|k| self.comps[(k % d) * d + k / d].clone()).collect();
        Self { grid: self.grid, comps }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, comps: self.comps.iter().map(|f| f.scaled(c)).collect() }
    }

    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.axpy(c, b))
            .collect::<Result<_>>()?;
        Ok(Self { grid: self.grid, comps })
    }
}

/// `(u ⊗ v)_{ij} = u_i v_j`.
pub fn tensor_product(u: &VectorField, v: &VectorField) -> Result<TensorField> {
    same_grid(u.grid(), v.grid())?;
    let d = u.grid().dim();
    let mut comps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            comps.push(u.component(i).mul(v.component(j))?);
        }
    }
    Ok(TensorField { grid: *u.grid(), comps })
}

pub(crate) fn same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(2, 1.0, 16).unwrap()
    }

    #[test]
    fn constant_outer_product() {
        let g = grid();
        let u = VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]);
        let v = VectorField::from_fn(g, |_| [0.0, 1.0, 0.0]);
        let t = tensor_product(&u, &v).unwrap();
        assert!(t.component(0, 1).samples().iter().all(|&x| x == 1.0));
        for (i, j) in [(0, 0), (1, 0), (1, 1)] {
            assert_eq!(t.component(i, j).max_abs(), 0.0);
        }
    }

    #[test]
    fn zero_product() {
        let g = grid();
        let t = tensor_product(&VectorField::zeros(g), &VectorField::zeros(g)).unwrap();
        assert!(t.components().iter().all(|c| c.max_abs() == 0.0));
    }

    #[test]
    fn rejects_mismatch_and_nonfinite() {
        let g = grid();
        let g2 = GridSpec::new(2, 2.0, 16).unwrap();
        assert!(tensor_product(&VectorField::zeros(g), &VectorField::zeros(g2)).is_err());
        let mut data = vec![0.0; g.len()];
        data[3] = f64::NAN;
        assert!(matches!(ScalarField::new(g, data), Err(Error::NonFinite)));
        assert!(ScalarField::new(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn magnitude_is_euclidean() {
        let g = grid();
        let u = VectorField::from_fn(g, |_| [3.0, 4.0, 0.0]);
        assert!(u.magnitude().iter().all(|&m| (m - 5.0).abs() < 1e-15));
    }
}
