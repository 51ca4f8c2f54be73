//! Discrete Fourier machinery shared by the phase-space operations: the
//! ħ-scaled symplectic Fourier transform, half-step resampling of grid
//! functions and spectral derivatives.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::{PhaseField, C64};

/// Forward and inverse plans of one length. Neither direction is normalized.
#[derive(Clone)]
pub(crate) struct FftPair {
    pub fwd: Arc<dyn Fft<f64>>,
    pub inv: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    #[inline]
    pub fn forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    #[inline]
    pub fn inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
    }
}

/// Signed frequency of DFT bin `i` of length `n`, in `[-n/2, n/2)`.
#[inline]
pub(crate) fn signed_freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[inline]
pub(crate) fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

/// How a grid function is continued off the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampling {
    /// Trigonometric interpolation of the periodic extension; exact for
    /// band-limited data that vanish at the boundary.
    Periodic,
    /// Eight-point Lagrange interpolation, extrapolated with the edge
    /// stencils outside the grid; exact for polynomials of degree ≤ 7.
    Local,
}

/// Trigonometric interpolant of `values` sampled at the `2n` half-steps
/// `s/2`, `s = 0..2n`. The Nyquist coefficient is split evenly between
/// `±n/2` so the interpolant of real data is real.
pub(crate) fn refine_periodic(values: &[C64], plan_n: &FftPair, plan_2n: &FftPair) -> Vec<C64> {
    let n = values.len();
    let mut spec = values.to_vec();
    plan_n.forward(&mut spec);
    let inv_n = 1.0 / n as f64;
    let mut out = vec![C64::new(0.0, 0.0); 2 * n];
    for (i, c) in spec.iter().enumerate() {
        let f = signed_freq(i, n);
        if f == -(n as i64) / 2 {
            out[n / 2] += c * (0.5 * inv_n);
            out[wrap(-(n as i64) / 2, 2 * n)] += c * (0.5 * inv_n);
        } else {
            out[wrap(f, 2 * n)] += c * inv_n;
        }
    }
    plan_2n.inverse(&mut out);
    out
}

/// Adjoint of [`refine_periodic`] with respect to the plain Euclidean inner
/// products on `C^{2n}` and `C^n`.
pub(crate) fn refine_periodic_adjoint(g: &[C64], plan_n: &FftPair, plan_2n: &FftPair) -> Vec<C64> {
    let n = g.len() / 2;
    let mut spec = g.to_vec();
    plan_2n.forward(&mut spec);
    let inv_n = 1.0 / n as f64;
    let mut coeff = vec![C64::new(0.0, 0.0); n];
    for (i, c) in coeff.iter_mut().enumerate() {
        let f = signed_freq(i, n);
        *c = if f == -(n as i64) / 2 {
            (spec[n / 2] + spec[wrap(-(n as i64) / 2, 2 * n)]) * (0.5 * inv_n)
        } else {
            spec[wrap(f, 2 * n)] * inv_n
        };
    }
    plan_n.inverse(&mut coeff);
    coeff
}

/// Lagrange interpolation at fractional index `t`: an eight-point local
/// stencil inside the grid, and outside it eight nodes spread over the
/// adjacent half of the grid so that extrapolation stays well conditioned.
pub(crate) fn lagrange_at(values: &[C64], t: f64) -> C64 {
    const ORDER: usize = 8;
    let n = values.len();
    if n < 2 * ORDER {
        return lagrange_nodes(values, &(0..n).collect::<Vec<_>>(), t);
    }
    let last = (n - 1) as f64;
    if t < 0.0 || t > last {
        let step = n / (2 * ORDER);
        let nodes: Vec<usize> = if t < 0.0 {
            (0..ORDER).map(|i| i * step).collect()
        } else {
            (0..ORDER).map(|i| n - 1 - i * step).collect()
        };
        return lagrange_nodes(values, &nodes, t);
    }
    let start = (t.floor() as i64 - (ORDER as i64 / 2 - 1)).clamp(0, (n - ORDER) as i64) as usize;
    lagrange_nodes(values, &(start..start + ORDER).collect::<Vec<_>>(), t)
}

fn lagrange_nodes(values: &[C64], nodes: &[usize], t: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &i in nodes {
        let ti = i as f64;
        if t == ti {
            return values[i];
        }
        let mut w = 1.0;
        for &m in nodes {
            if m != i {
                w *= (t - m as f64) / (ti - m as f64);
            }
        }
        acc += values[i] * w;
    }
    acc
}

/// Samples at half-index positions `u/2` for `u = lo..hi` (so `u = 2j` is node `j`).
#[cfg(test)]
pub(crate) fn half_step_samples(values: &[C64], lo: i64, hi: i64, mode: Resampling) -> Vec<C64> {
    let n = values.len();
    half_step_samples_with(values, lo, hi, mode, &FftPair::new(n), &FftPair::new(2 * n))
}

pub(crate) fn half_step_samples_with(
    values: &[C64],
    lo: i64,
    hi: i64,
    mode: Resampling,
    plan_n: &FftPair,
    plan_2n: &FftPair,
) -> Vec<C64> {
    let n = values.len();
    match mode {
        Resampling::Periodic => {
            let fine = refine_periodic(values, plan_n, plan_2n);
            (lo..hi).map(|u| fine[wrap(u, 2 * n)]).collect()
        }
        Resampling::Local => (lo..hi)
            .map(|u| {
                if u >= 0 && u % 2 == 0 && ((u / 2) as usize) < n {
                    values[(u / 2) as usize]
                } else {
                    lagrange_at(values, u as f64 / 2.0)
                }
            })
            .collect(),
    }
}

/// Given samples at the odd half-steps `(i + 1/2)`, returns the trigonometric
/// interpolant at the nodes `i`. The Nyquist mode vanishes on half-steps and
/// is dropped.
pub(crate) fn half_to_nodes(values: &[C64], plan: &FftPair) -> Vec<C64> {
    let n = values.len();
    let mut spec = values.to_vec();
    plan.forward(&mut spec);
    for (i, c) in spec.iter_mut().enumerate() {
        let f = signed_freq(i, n);
        if f == -(n as i64) / 2 {
            *c = C64::new(0.0, 0.0);
        } else {
            // g(i) = f(i + 1/2): undo the half-step phase
            let phase = -std::f64::consts::PI * f as f64 / n as f64;
            *c *= C64::from_polar(1.0 / n as f64, phase);
        }
    }
    plan.inverse(&mut spec);
    spec
}

/// Trigonometric interpolant of periodic samples evaluated at arbitrary
/// fractional indices.
pub(crate) fn trig_eval(values: &[C64], positions: &[f64]) -> Vec<C64> {
    let n = values.len();
    let mut spec = values.to_vec();
    FftPair::new(n).forward(&mut spec);
    positions
        .iter()
        .map(|&t| {
            let mut acc = C64::new(0.0, 0.0);
            for (i, c) in spec.iter().enumerate() {
                let f = signed_freq(i, n);
                let w = if f == -(n as i64) / 2 {
                    C64::new((std::f64::consts::PI * t).cos(), 0.0)
                } else {
                    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * f as f64 * t / n as f64)
                };
                acc += c * w;
            }
            acc / n as f64
        })
        .collect()
}

/// Spectral first derivative of a periodic sequence with sample spacing `h`;
/// the Nyquist mode is zeroed.
pub(crate) fn derivative_1d(values: &mut [C64], h: f64, plan: &FftPair) {
    let n = values.len();
    plan.forward(values);
    let k0 = 2.0 * std::f64::consts::PI / (n as f64 * h);
    for (i, c) in values.iter_mut().enumerate() {
        let f = signed_freq(i, n);
        if f == -(n as i64) / 2 {
            *c = C64::new(0.0, 0.0);
        } else {
            *c *= C64::new(0.0, k0 * f as f64 / n as f64);
        }
    }
    plan.inverse(values);
}

/// ∂/∂x of a phase field (spectral, periodic).
pub fn d_dx(field: &PhaseField) -> PhaseField {
    let (nx, np) = (field.grid().nx(), field.grid().np());
    let plan = FftPair::new(nx);
    let mut out = field.values().to_vec();
    let mut col = vec![C64::new(0.0, 0.0); nx];
    for k in 0..np {
        for j in 0..nx {
            col[j] = out[j * np + k];
        }
        derivative_1d(&mut col, field.grid().dx(), &plan);
        for j in 0..nx {
            out[j * np + k] = col[j];
        }
    }
    PhaseField::from_parts(*field.grid(), out)
}

/// ∂/∂p of a phase field (spectral, periodic).
pub fn d_dp(field: &PhaseField) -> PhaseField {
    let np = field.grid().np();
    let plan = FftPair::new(np);
    let mut out = field.values().to_vec();
    for row in out.chunks_mut(np) {
        derivative_1d(row, field.grid().dp(), &plan);
    }
    PhaseField::from_parts(*field.grid(), out)
}

/// Symplectic Fourier transform
/// `F_σΨ(z) = (2πħ)⁻¹ ∫ exp(−iσ(z,z')/ħ) Ψ(z') dz'` on a DFT-compatible grid.
///
/// With centered indices the kernel factorizes into a forward DFT over `x'`
/// landing on the `p` index and an inverse DFT over `p'` landing on the `x`
/// index, which makes the discrete transform unitary and involutive.
pub fn symplectic_fourier(field: &PhaseField) -> Result<PhaseField> {
    let grid = *field.grid();
    grid.require_dft_compatible()?;
    let n = grid.nx();
    let plan = FftPair::new(n);
    let sign = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };

    // t[k'][.]: forward DFT over x' for each p' column -> index k
    let mut cols = vec![C64::new(0.0, 0.0); n * n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for kp in 0..n {
        for jp in 0..n {
            buf[jp] = field.at(jp, kp) * (sign(jp) * sign(kp));
        }
        plan.forward(&mut buf);
        // store as cols[k * n + kp]
        for k in 0..n {
            cols[k * n + kp] = buf[k];
        }
    }
    // inverse DFT over p' for each k -> index j
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let row = &mut cols[k * n..(k + 1) * n];
        plan.inverse(row);
        for j in 0..n {
            out[j * n + k] = row[j] * (sign(j) * sign(k) / n as f64);
        }
    }
    Ok(PhaseField::from_parts(grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{HbarContext, PhaseGrid};
    use rand::{Rng, SeedableRng};

    fn gaussian_bump(grid: PhaseGrid, rng: &mut impl Rng) -> PhaseField {
        let x0 = rng.gen_range(-1.5..1.5);
        let p0 = rng.gen_range(-1.5..1.5);
        let w = rng.gen_range(0.6..1.4);
        let kx = rng.gen_range(-1.0..1.0);
        PhaseField::from_fn(grid, |x, p| {
            let r = ((x - x0).powi(2) + (p - p0).powi(2)) / (2.0 * w * w);
            C64::from_polar((-r).exp(), kx * x)
        })
    }

    #[test]
    fn involution_and_unitarity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let g = PhaseGrid::symmetric(64, HbarContext::new(0.8).unwrap()).unwrap();
        let f = gaussian_bump(g, &mut rng);
        let ff = symplectic_fourier(&f).unwrap();
        let fff = symplectic_fourier(&ff).unwrap();
        assert!(fff.max_abs_diff(&f).unwrap() < 1e-12 * f.max_abs());
        assert!((ff.norm() - f.norm()).abs() < 1e-12 * f.norm());
    }

    #[test]
    fn coherent_gaussian_is_a_fixed_point() {
        let h = 0.5;
        let g = PhaseGrid::symmetric(128, HbarContext::new(h).unwrap()).unwrap();
        let f = PhaseField::from_real_fn(g, |x, p| (-(x * x + p * p) / (2.0 * h)).exp());
        let ff = symplectic_fourier(&f).unwrap();
        assert!(ff.max_abs_diff(&f).unwrap() < 1e-12);
        let z = symplectic_fourier(&PhaseField::zeros(g)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn rejects_incompatible_grid() {
        let x = crate::grid::SpatialGrid::centered(4.0, 16).unwrap();
        let g = PhaseGrid::new(x, x, HbarContext::unit());
        assert!(symplectic_fourier(&PhaseField::zeros(g)).is_err());
    }

    #[test]
    fn refinement_round_trip_and_adjoint() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let n = 32;
        let v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let (p1, p2) = (FftPair::new(n), FftPair::new(2 * n));
        let fine = refine_periodic(&v, &p1, &p2);
        for j in 0..n {
            assert!((fine[2 * j] - v[j]).norm() < 1e-12);
        }
        let g: Vec<C64> = (0..2 * n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let lhs: C64 = fine.iter().zip(&g).map(|(a, b)| a * b.conj()).sum();
        let adj = refine_periodic_adjoint(&g, &p1, &p2);
        let rhs: C64 = v.iter().zip(&adj).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn local_resampling_is_exact_on_cubics() {
        for n in [16usize, 256] {
            let f = |t: f64| t.powi(3) - 2.0 * t;
            let v: Vec<C64> = (0..n).map(|j| C64::new(f(j as f64), 0.0)).collect();
            let (lo, hi) = (-(n as i64) / 2, 5 * n as i64 / 2);
            let s = half_step_samples(&v, lo, hi, Resampling::Local);
            for (i, u) in (lo..hi).enumerate() {
                let t = u as f64 / 2.0;
                let scale = f(1.5 * n as f64).abs();
                assert!((s[i].re - f(t)).abs() < 1e-12 * scale, "n={n} t={t} {}", (s[i].re - f(t)).abs() / scale);
            }
        }
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let g = PhaseGrid::symmetric(128, HbarContext::unit()).unwrap();
        let f = PhaseField::from_real_fn(g, |x, p| (-(x * x + 2.0 * p * p)).exp());
        let dx = d_dx(&f);
        let dp = d_dp(&f);
        let ex = PhaseField::from_real_fn(g, |x, p| -2.0 * x * (-(x * x + 2.0 * p * p)).exp());
        let ep = PhaseField::from_real_fn(g, |x, p| -4.0 * p * (-(x * x + 2.0 * p * p)).exp());
        assert!(dx.max_abs_diff(&ex).unwrap() < 1e-9);
        assert!(dp.max_abs_diff(&ep).unwrap() < 1e-9);
    }
}
