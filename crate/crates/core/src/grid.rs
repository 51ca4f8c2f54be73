//! Uniform sampling lattices for the configuration line and the phase plane.
//!
//! A [`SpatialGrid`] samples `x_j = x_min + j·dx`, `j = 0..n`, with
//! `dx = (x_max − x_min)/n`; the right end point is excluded so the grid is
//! one period of a DFT. A [`PhaseGrid`] pairs two such axes with a value of ħ.
//! Spectral operations (symplectic Fourier transform, star product, Wigner
//! transforms) need the *DFT-compatible* pairing `dx·dp = 2πħ/n` on centered
//! axes of equal length, which is what [`PhaseGrid::from_x_axis`] and
//! [`PhaseGrid::symmetric`] build.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance used when comparing grid parameters.
const GRID_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbarContext {
    hbar: f64,
}

impl HbarContext {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Config(format!("hbar must be positive and finite, got {hbar}")));
        }
        Ok(Self { hbar })
    }

    /// ħ = 1.
    pub fn unit() -> Self {
        Self { hbar: 1.0 }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.hbar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::Config(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 8 || n_points % 2 != 0 {
            return Err(Error::Config(format!(
                "n_points must be even and at least 8, got {n_points}"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Centered grid `[-half_width, half_width)`.
    pub fn centered(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    pub fn is_centered(&self) -> bool {
        let scale = self.x_max.abs().max(self.x_min.abs());
        (self.x_min + self.x_max).abs() <= GRID_RTOL * scale
    }

    /// Index of the node `x = 0` on a centered grid.
    #[inline]
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    /// Grid-parameter equality up to rounding.
    pub fn same_as(&self, other: &SpatialGrid) -> bool {
        let scale = self.x_max.abs().max(self.x_min.abs()).max(1.0);
        self.n_points == other.n_points
            && (self.x_min - other.x_min).abs() <= GRID_RTOL * scale
            && (self.x_max - other.x_max).abs() <= GRID_RTOL * scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    x_axis: SpatialGrid,
    p_axis: SpatialGrid,
    hbar: HbarContext,
}

impl PhaseGrid {
    /// Arbitrary pairing of two axes; spectral operations check
    /// [`PhaseGrid::is_dft_compatible`] before running.
    pub fn new(x_axis: SpatialGrid, p_axis: SpatialGrid, hbar: HbarContext) -> Self {
        Self { x_axis, p_axis, hbar }
    }

    /// Builds the DFT-compatible momentum axis for a centered position axis.
    pub fn from_x_axis(x_axis: SpatialGrid, hbar: HbarContext) -> Result<Self> {
        if !x_axis.is_centered() {
            return Err(Error::Config("phase grid requires a centered x axis".into()));
        }
        let n = x_axis.len();
        let dp = 2.0 * PI * hbar.value() / (n as f64 * x_axis.dx());
        let half = 0.5 * n as f64 * dp;
        let p_axis = SpatialGrid::new(-half, half, n)?;
        Ok(Self { x_axis, p_axis, hbar })
    }

    /// Square grid with `dx = dp = sqrt(2πħ/n)`, i.e. both axes cover
    /// `[-sqrt(πħn/2), sqrt(πħn/2))`.
    pub fn symmetric(n_points: usize, hbar: HbarContext) -> Result<Self> {
        let half = (PI * hbar.value() * n_points as f64 / 2.0).sqrt();
        Self::from_x_axis(SpatialGrid::centered(half, n_points)?, hbar)
    }

    #[inline]
    pub fn x_axis(&self) -> &SpatialGrid {
        &self.x_axis
    }

    #[inline]
    pub fn p_axis(&self) -> &SpatialGrid {
        &self.p_axis
    }

    #[inline]
    pub fn hbar(&self) -> HbarContext {
        self.hbar
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.x_axis.len()
    }

    #[inline]
    pub fn np(&self) -> usize {
        self.p_axis.len()
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.x_axis.dx()
    }

    #[inline]
    pub fn dp(&self) -> f64 {
        self.p_axis.dx()
    }

    /// Area element `dx·dp`.
    #[inline]
    pub fn cell(&self) -> f64 {
        self.dx() * self.dp()
    }

    pub fn is_dft_compatible(&self) -> bool {
        let n = self.nx();
        let target = 2.0 * PI * self.hbar.value() / n as f64;
        n == self.np()
            && self.x_axis.is_centered()
            && self.p_axis.is_centered()
            && (self.cell() - target).abs() <= 1e-10 * target
    }

    pub fn require_dft_compatible(&self) -> Result<()> {
        if self.is_dft_compatible() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "phase grid is not DFT-compatible: need centered axes of equal length with \
                 dx*dp = 2*pi*hbar/n (nx={}, np={}, dx*dp={}, 2*pi*hbar/n={})",
                self.nx(),
                self.np(),
                self.cell(),
                2.0 * PI * self.hbar.value() / self.nx() as f64
            )))
        }
    }

    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self.x_axis.same_as(&other.x_axis)
            && self.p_axis.same_as(&other.p_axis)
            && (self.hbar.value() - other.hbar.value()).abs() <= GRID_RTOL * self.hbar.value()
    }

    #[inline]
    pub fn point(&self, j: usize, k: usize) -> SymplecticVector {
        SymplecticVector::new(self.x_axis.point(j), self.p_axis.point(k))
    }
}

/// A point `z = (x, p)` of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymplecticVector {
    pub x: f64,
    pub p: f64,
}

impl SymplecticVector {
    pub const ZERO: SymplecticVector = SymplecticVector { x: 0.0, p: 0.0 };

    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.p * self.p
    }
}

impl std::ops::Add for SymplecticVector {
    type Output = SymplecticVector;
    fn add(self, rhs: Self) -> Self {
        SymplecticVector::new(self.x + rhs.x, self.p + rhs.p)
    }
}

impl std::ops::Sub for SymplecticVector {
    type Output = SymplecticVector;
    fn sub(self, rhs: Self) -> Self {
        SymplecticVector::new(self.x - rhs.x, self.p - rhs.p)
    }
}

impl std::ops::Mul<f64> for SymplecticVector {
    type Output = SymplecticVector;
    fn mul(self, rhs: f64) -> Self {
        SymplecticVector::new(self.x * rhs, self.p * rhs)
    }
}

/// Standard symplectic form `σ(z, z') = p·x' − p'·x`.
#[inline]
pub fn symplectic_form(z: SymplecticVector, z2: SymplecticVector) -> f64 {
    z.p * z2.x - z2.p * z.x
}
