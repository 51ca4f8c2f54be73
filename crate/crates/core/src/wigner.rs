//! Cross-Wigner intertwiner `W_φ`, its adjoint and the projection onto its
//! range.
//!
//! `W_φψ(x, p) = (2πħ)^{-1/2} ∫ e^{−ipy/ħ} ψ(x + y/2) conj(φ(x − y/2)) dy`,
//! an isometry `L²(ℝ) → L²(ℝ²)` for unit-norm `φ`. On a DFT-compatible grid
//! the `y` integral is one DFT per `x` row; the half-step samples come from
//! trigonometric interpolation on the doubled grid, and the `y` sum runs
//! over one period `|y| ≤ N·dx/2` with the end points at half weight.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{PhaseField, WaveField, C64};
use crate::fourier::{refine_periodic, refine_periodic_adjoint, wrap, FftPair};
use crate::grid::PhaseGrid;
use crate::special::{hermite_function, laguerre_wigner, LAGUERRE_CALIBRATION};

/// `W_φ` for a fixed unit-norm window on a fixed target grid.
#[derive(Debug, Clone)]
pub struct WindowedTransform {
    window: WaveField,
    grid: PhaseGrid,
}

impl WindowedTransform {
    pub fn new(window: WaveField, grid: PhaseGrid) -> Result<Self> {
        grid.require_dft_compatible()?;
        if !window.grid().same_as(grid.x_axis()) {
            return Err(Error::Shape("window is not sampled on the x axis of the phase grid".into()));
        }
        let n = window.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("window must have unit L2 norm, got {n}")));
        }
        Ok(Self { window, grid })
    }

    /// Hermite window `ψ_k` at the grid's ħ.
    pub fn hermite(k: usize, grid: PhaseGrid) -> Result<Self> {
        let w = hermite_function(k, *grid.x_axis(), grid.hbar())?;
        Self::new(w.normalized()?, grid)
    }

    pub fn window(&self) -> &WaveField {
        &self.window
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn apply(&self, psi: &WaveField) -> Result<PhaseField> {
        cross_wigner(self, psi)
    }

    pub fn adjoint(&self, big_psi: &PhaseField) -> Result<WaveField> {
        wigner_adjoint(self, big_psi)
    }
}

/// Weight of the `y = n·dx` sample: half at both ends of the period.
#[inline]
fn end_weight(n: i64, half: i64) -> f64 {
    if n.abs() == half {
        0.5
    } else {
        1.0
    }
}

#[inline]
fn parity(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(2πħ)^{-1/2}∫ e^{−ipy/ħ} ψ(x+y/2) conj(φ(x−y/2)) dy` without any
/// normalization requirement on `φ`.
pub fn cross_wigner_raw(psi: &WaveField, phi: &WaveField, grid: PhaseGrid) -> Result<PhaseField> {
    grid.require_dft_compatible()?;
    if !psi.grid().same_as(grid.x_axis()) || !phi.grid().same_as(grid.x_axis()) {
        return Err(Error::Shape("wave fields are not sampled on the x axis of the phase grid".into()));
    }
    let n = grid.nx();
    let (p1, p2) = (FftPair::new(n), FftPair::new(2 * n));
    let psi_r = refine_periodic(psi.values(), &p1, &p2);
    let phi_r = refine_periodic(phi.values(), &p1, &p2);
    let scale = grid.dx() / (2.0 * PI * grid.hbar().value()).sqrt();
    let half = (n / 2) as i64;
    let mut vals = vec![C64::new(0.0, 0.0); n * n];
    vals.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let c = 2 * j as i64;
        for m in -half..=half {
            let t = psi_r[wrap(c + m, 2 * n)] * phi_r[wrap(c - m, 2 * n)].conj();
            row[wrap(m, n)] += t * (parity(m) * end_weight(m, half) * scale);
        }
        p1.forward(row);
    });
    Ok(PhaseField::from_parts(grid, vals))
}

pub fn cross_wigner(t: &WindowedTransform, psi: &WaveField) -> Result<PhaseField> {
    cross_wigner_raw(psi, &t.window, t.grid)
}

/// Exact adjoint of the discrete [`cross_wigner`]: `(W_φψ|Ψ) = (ψ|W_φ*Ψ)`
/// with measures `dx·dp` and `dx`.
pub fn wigner_adjoint(t: &WindowedTransform, big_psi: &PhaseField) -> Result<WaveField> {
    let grid = t.grid;
    if !big_psi.grid().same_as(&grid) {
        return Err(Error::Shape("phase field is not on the transform's grid".into()));
    }
    let n = grid.nx();
    let (p1, p2) = (FftPair::new(n), FftPair::new(2 * n));
    let phi_r = refine_periodic(t.window.values(), &p1, &p2);
    let scale = grid.dp() * grid.dx() / (2.0 * PI * grid.hbar().value()).sqrt();
    let half = (n / 2) as i64;
    // per-row contributions to the refined accumulator, summed in row order
    let rows: Vec<Vec<(usize, C64)>> = big_psi
        .values()
        .par_chunks(n)
        .enumerate()
        .map(|(j, row)| {
            let mut h = row.to_vec();
            p1.inverse(&mut h);
            let c = 2 * j as i64;
            (-half..=half)
                .map(|m| {
                    let w = parity(m) * end_weight(m, half) * scale;
                    (wrap(c + m, 2 * n), phi_r[wrap(c - m, 2 * n)] * h[wrap(m, n)] * w)
                })
                .collect()
        })
        .collect();
    let mut acc = vec![C64::new(0.0, 0.0); 2 * n];
    for row in rows {
        for (i, v) in row {
            acc[i] += v;
        }
    }
    let out = refine_periodic_adjoint(&acc, &p1, &p2);
    Ok(WaveField::from_parts(*grid.x_axis(), out))
}

/// `P_φ = W_φ W_φ*`, the orthogonal projection onto the range of `W_φ`.
pub fn projection(t: &WindowedTransform, big_psi: &PhaseField) -> Result<PhaseField> {
    cross_wigner(t, &wigner_adjoint(t, big_psi)?)
}

/// Both sides of Moyal's identity
/// `(W(ψ,φ)|W(ψ′,φ′)) = (2πħ)^{-1}(ψ|ψ′)·conj((φ|φ′))`, where
/// `W(ψ,φ) = (2πħ)^{-1/2}·W_φψ`.
pub fn moyal_identity_check(
    psi: &WaveField,
    psi2: &WaveField,
    phi: &WaveField,
    phi2: &WaveField,
    grid: PhaseGrid,
) -> Result<(C64, C64)> {
    let c = 1.0 / (2.0 * PI * grid.hbar().value());
    let a = cross_wigner_raw(psi, phi, grid)?;
    let b = cross_wigner_raw(psi2, phi2, grid)?;
    let lhs = a.inner(&b)? * c;
    let rhs = psi.inner(psi2)? * phi.inner(phi2)?.conj() * c;
    Ok((lhs, rhs))
}

/// `Φ_{j,k} = W_{φ_j}φ_k` with Hermite functions `φ_i` at the grid's ħ.
pub fn basis_field(j: usize, k: usize, grid: PhaseGrid) -> Result<PhaseField> {
    let phi_k = hermite_function(k, *grid.x_axis(), grid.hbar())?;
    cross_wigner(&WindowedTransform::hermite(j, grid)?, &phi_k)
}

/// `Ψ_{j,k} = W_{ψ_k}ψ_j`: analyzed function first, window second.
pub fn oscillator_stargen(j: usize, k: usize, grid: PhaseGrid) -> Result<PhaseField> {
    basis_field(k, j, grid)
}

/// Ratio of `W_{ψ_j}ψ_{j+k}` to the uncalibrated Laguerre closed form over
/// the points where the closed form exceeds `1e-6` of its maximum:
/// returns (mean ratio, relative standard deviation).
pub fn laguerre_calibration(j: usize, k: usize, grid: PhaseGrid) -> Result<(f64, f64)> {
    let closed = laguerre_wigner(j, k, grid)?.scale(C64::new(1.0 / LAGUERRE_CALIBRATION, 0.0));
    let quad = oscillator_stargen(j + k, j, grid)?;
    let cut = 1e-6 * closed.max_abs();
    let ratios: Vec<C64> = closed
        .values()
        .iter()
        .zip(quad.values())
        .filter(|(c, _)| c.norm() > cut)
        .map(|(c, q)| q / c)
        .collect();
    let m = ratios.iter().sum::<C64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - m).norm_sqr()).sum::<f64>() / ratios.len() as f64;
    Ok((m.re, var.sqrt() / m.norm()))
}
