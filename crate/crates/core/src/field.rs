//! Complex sampled functions on the line and on the phase plane.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, SpatialGrid, SymplecticVector};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: SpatialGrid,
    values: Vec<C64>,
}

impl WaveField {
    pub fn new(grid: SpatialGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "wave field needs {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain("wave field has non-finite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.point(j))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    #[inline]
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub(crate) fn from_parts(grid: SpatialGrid, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt()
    }

    /// `(self|other) = Σ self·conj(other)·dx`.
    pub fn inner(&self, other: &WaveField) -> Result<C64> {
        self.check_grid(other)?;
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.dx())
    }

    pub fn scale(&self, c: C64) -> WaveField {
        Self::from_parts(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn normalized(&self) -> Result<WaveField> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize the zero field".into()));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn conj(&self) -> WaveField {
        Self::from_parts(self.grid, self.values.iter().map(|v| v.conj()).collect())
    }

    pub fn add(&self, other: &WaveField) -> Result<WaveField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &WaveField) -> Result<WaveField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &WaveField) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Multiplies by the unit phase that makes the largest-magnitude sample
    /// real and positive.
    pub fn fix_phase(&self) -> WaveField {
        let mut best = C64::new(0.0, 0.0);
        for v in &self.values {
            if v.norm() > best.norm() {
                best = *v;
            }
        }
        if best.norm() == 0.0 {
            return self.clone();
        }
        self.scale(best.conj() / best.norm())
    }

    fn zip_with(&self, other: &WaveField, f: impl Fn(C64, C64) -> C64) -> Result<WaveField> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self::from_parts(self.grid, values))
    }

    pub(crate) fn check_grid(&self, other: &WaveField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Shape("wave fields live on different grids".into()))
        }
    }
}

/// Complex function on a [`PhaseGrid`], stored row-major as `values[j*np + k]`
/// for the sample at `(x_j, p_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    grid: PhaseGrid,
    values: Vec<C64>,
}

impl PhaseField {
    pub fn new(grid: PhaseGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.nx() * grid.np() {
            return Err(Error::Shape(format!(
                "phase field needs {}x{} samples, got {}",
                grid.nx(),
                grid.np(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain("phase field has non-finite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: PhaseGrid) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.nx() * grid.np()] }
    }

    pub fn constant(grid: PhaseGrid, c: C64) -> Self {
        Self { grid, values: vec![c; grid.nx() * grid.np()] }
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        let np = grid.np();
        let mut values = Vec::with_capacity(grid.nx() * np);
        for j in 0..grid.nx() {
            let x = grid.x_axis().point(j);
            for k in 0..np {
                values.push(f(x, grid.p_axis().point(k)));
            }
        }
        Self { grid, values }
    }

    pub fn from_real_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |x, p| C64::new(f(x, p), 0.0))
    }

    pub(crate) fn from_parts(grid: PhaseGrid, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.nx() * grid.np());
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> C64 {
        self.values[j * self.grid.np() + k]
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell()).sqrt()
    }

    /// `(self|other) = Σ self·conj(other)·dx·dp`.
    pub fn inner(&self, other: &PhaseField) -> Result<C64> {
        self.check_grid(other)?;
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell())
    }

    pub fn scale(&self, c: C64) -> PhaseField {
        Self::from_parts(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn conj(&self) -> PhaseField {
        Self::from_parts(self.grid, self.values.iter().map(|v| v.conj()).collect())
    }

    pub fn add(&self, other: &PhaseField) -> Result<PhaseField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PhaseField) -> Result<PhaseField> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product (ordinary, commutative).
    pub fn mul(&self, other: &PhaseField) -> Result<PhaseField> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &PhaseField) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Largest magnitude on the outermost rows and columns.
    pub fn boundary_max(&self) -> f64 {
        let (nx, np) = (self.grid.nx(), self.grid.np());
        let mut m = 0.0f64;
        for j in 0..nx {
            m = m.max(self.at(j, 0).norm()).max(self.at(j, np - 1).norm());
        }
        for k in 0..np {
            m = m.max(self.at(0, k).norm()).max(self.at(nx - 1, k).norm());
        }
        m
    }

    /// True when the field numerically vanishes on the boundary relative to
    /// its peak (`boundary ≤ rtol·max`); the zero field counts as decaying.
    pub fn decays(&self, rtol: f64) -> bool {
        self.boundary_max() <= rtol * self.max_abs()
    }

    /// Sample nearest to a phase-space point on a centered grid; used for
    /// quick probes in diagnostics.
    pub fn nearest(&self, z: SymplecticVector) -> C64 {
        let j = ((z.x - self.grid.x_axis().x_min()) / self.grid.dx()).round();
        let k = ((z.p - self.grid.p_axis().x_min()) / self.grid.dp()).round();
        let j = j.clamp(0.0, (self.grid.nx() - 1) as f64) as usize;
        let k = k.clamp(0.0, (self.grid.np() - 1) as f64) as usize;
        self.at(j, k)
    }

    fn zip_with(&self, other: &PhaseField, f: impl Fn(C64, C64) -> C64) -> Result<PhaseField> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self::from_parts(self.grid, values))
    }

    pub(crate) fn check_grid(&self, other: &PhaseField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Shape("phase fields live on different grids".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::HbarContext;
    use rand::{Rng, SeedableRng};

    #[test]
    fn ground_state_has_unit_norm() {
        let g = SpatialGrid::centered(10.0, 256).unwrap();
        let psi0 = WaveField::from_real_fn(g, |x| std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
        assert!((psi0.inner(&psi0).unwrap().re - 1.0).abs() < 1e-10);
        assert!(psi0.inner(&psi0).unwrap().im.abs() < 1e-15);
    }

    #[test]
    fn inner_product_is_hermitian_and_linear() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let pg = PhaseGrid::symmetric(16, HbarContext::unit()).unwrap();
        let mut rand_field = || {
            PhaseField::new(
                pg,
                (0..256).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            )
            .unwrap()
        };
        let a = rand_field();
        let b = rand_field();
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-13);
        assert_eq!(a.inner(&PhaseField::zeros(pg)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn grid_mismatch_is_a_shape_error() {
        let a = WaveField::zeros(SpatialGrid::centered(1.0, 8).unwrap());
        let b = WaveField::zeros(SpatialGrid::centered(2.0, 8).unwrap());
        assert!(matches!(a.inner(&b), Err(Error::Shape(_))));
        assert!(WaveField::new(*a.grid(), vec![C64::new(0.0, 0.0); 3]).is_err());
    }
}
