//! Moyal star product, Bopp-shift operators, Heisenberg–Weyl translations
//! and the Weyl symbol ↔ kernel correspondence.
//!
//! Grids are read as discrete tori: a DFT-compatible `N×N` phase grid is one
//! period in both directions, translations wrap around, and Fourier modes at
//! the Nyquist frequency are split evenly between `±N/2`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{PhaseField, WaveField, C64};
use crate::fourier::{
    d_dp, d_dx, half_step_samples_with, half_to_nodes, signed_freq, symplectic_fourier, wrap,
    FftPair, Resampling,
};
use crate::grid::{PhaseGrid, SymplecticVector};

/// Boundary-to-peak ratio below which a field is treated as localized,
/// i.e. as one period of a function on the torus rather than as a sampled
/// polynomial-type symbol.
pub const DECAY_RTOL: f64 = 1e-3;

/// Largest grid accepted by [`star_product_direct`].
pub const DIRECT_MAX_N: usize = 32;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `Σ c_ab x^a p^b` over `a + b ≤ 2`, optionally plus a tabulated `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSymbol {
    /// Coefficients of `1, x, p, x², xp, p²`.
    pub coeffs: [C64; 6],
    pub potential: Option<Vec<f64>>,
}

impl PolynomialSymbol {
    pub fn new(coeffs: [C64; 6]) -> Self {
        Self { coeffs, potential: None }
    }

    pub fn real(c: [f64; 6]) -> Self {
        Self::new(c.map(|v| C64::new(v, 0.0)))
    }

    /// `½(p² + x²)`.
    pub fn oscillator() -> Self {
        Self::real([0.0, 0.0, 0.0, 0.5, 0.0, 0.5])
    }

    pub fn x() -> Self {
        Self::real([0.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    }

    pub fn p() -> Self {
        Self::real([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    }

    /// Adds a potential tabulated on the x axis of the grid the symbol will
    /// be used with.
    pub fn with_potential(mut self, v: Vec<f64>) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("potential contains non-finite values".into()));
        }
        self.potential = Some(v);
        Ok(self)
    }

    pub fn eval(&self, x: f64, p: f64) -> C64 {
        let c = &self.coeffs;
        c[0] + c[1] * x + c[2] * p + c[3] * x * x + c[4] * x * p + c[5] * p * p
    }

    pub fn sample(&self, grid: PhaseGrid) -> Result<PhaseField> {
        let mut f = PhaseField::from_fn(grid, |x, p| self.eval(x, p));
        if let Some(v) = &self.potential {
            if v.len() != grid.nx() {
                return Err(Error::Shape(format!(
                    "potential has {} samples, grid has {}",
                    v.len(),
                    grid.nx()
                )));
            }
            let np = grid.np();
            for (i, val) in f.values_mut().iter_mut().enumerate() {
                *val += v[i / np];
            }
        }
        Ok(f)
    }
}

/// Dense kernel `K(x_j, x_l)` of a Weyl operator; the operator acts as
/// `(Âψ)_j = Σ_l K_jl ψ_l dx`.
#[derive(Debug, Clone)]
pub struct WeylKernel {
    grid: PhaseGrid,
    values: DMatrix<C64>,
}

impl WeylKernel {
    pub fn new(grid: PhaseGrid, values: DMatrix<C64>) -> Result<Self> {
        let n = grid.nx();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::Shape(format!(
                "kernel is {}x{}, grid has {n} points",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("kernel contains non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    /// Kernel of the rank-one operator `ψ ⊗ conj(φ)`.
    pub fn rank_one(psi: &WaveField, phi: &WaveField, grid: PhaseGrid) -> Result<Self> {
        psi.check_grid(phi)?;
        let n = psi.values().len();
        let m = DMatrix::from_fn(n, n, |j, l| psi.values()[j] * phi.values()[l].conj());
        Self::new(grid, m)
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    /// The operator as a matrix on grid samples (`K·dx`).
    pub fn operator_matrix(&self) -> DMatrix<C64> {
        &self.values * C64::new(self.grid.dx(), 0.0)
    }

    pub fn apply(&self, psi: &WaveField) -> Result<WaveField> {
        if !psi.grid().same_as(self.grid.x_axis()) {
            return Err(Error::Shape("wave field is not on the kernel's grid".into()));
        }
        let v = nalgebra::DVector::from_column_slice(psi.values());
        let out = self.operator_matrix() * v;
        Ok(WaveField::from_parts(*psi.grid(), out.as_slice().to_vec()))
    }

    /// Kernel of the composition `self ∘ other`.
    pub fn compose(&self, other: &WeylKernel) -> Result<WeylKernel> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Shape("kernels live on different grids".into()));
        }
        Ok(WeylKernel { grid: self.grid, values: &self.values * &other.values * C64::new(self.grid.dx(), 0.0) })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.values - self.values.adjoint();
        d.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn require_same(a: &PhaseField, b: &PhaseField) -> Result<PhaseGrid> {
    if !a.grid().same_as(b.grid()) {
        return Err(Error::Shape("phase fields live on different grids".into()));
    }
    a.grid().require_dft_compatible()?;
    Ok(*a.grid())
}

fn resampling_for(a: &PhaseField) -> Resampling {
    if a.decays(DECAY_RTOL) {
        Resampling::Periodic
    } else {
        Resampling::Local
    }
}

/// Half-step samples of `a` on `[lo, hi)²`, row-major in `(u, v)`.
fn refine_ext(a: &PhaseField, lo: i64, hi: i64, mode: Resampling) -> Vec<C64> {
    let (nx, np) = (a.grid().nx(), a.grid().np());
    let m = (hi - lo) as usize;
    let (pn, p2n) = (FftPair::new(nx), FftPair::new(2 * nx));
    // along x for every p node
    let cols: Vec<Vec<C64>> = (0..np)
        .into_par_iter()
        .map(|k| {
            let col: Vec<C64> = (0..nx).map(|j| a.at(j, k)).collect();
            half_step_samples_with(&col, lo, hi, mode, &pn, &p2n)
        })
        .collect();
    let (qn, q2n) = (FftPair::new(np), FftPair::new(2 * np));
    let rows: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|u| {
            let row: Vec<C64> = cols.iter().map(|c| c[u]).collect();
            half_step_samples_with(&row, lo, hi, mode, &qn, &q2n)
        })
        .collect();
    rows.concat()
}

/// Coefficients `(1, x, p, x², xp, p²)` when `a` is a polynomial of degree
/// at most two on the grid (checked on every node).
fn fit_quadratic(a: &PhaseField) -> Option<[C64; 6]> {
    let g = a.grid();
    let (nx, np) = (g.nx(), g.np());
    let (j0, k0) = (nx / 2, np / 2);
    let (sj, sk) = (nx / 4, np / 4);
    let (hx, hp) = (sj as f64 * g.dx(), sk as f64 * g.dp());
    let (x0, p0) = (g.x_axis().point(j0), g.p_axis().point(k0));
    let f = |dj: i64, dk: i64| a.at((j0 as i64 + dj * sj as i64) as usize, (k0 as i64 + dk * sk as i64) as usize);
    // local Taylor data around (x0, p0)
    let c = f(0, 0);
    let fx = (f(1, 0) - f(-1, 0)) / (2.0 * hx);
    let fp = (f(0, 1) - f(0, -1)) / (2.0 * hp);
    let fxx = (f(1, 0) - f(0, 0) * 2.0 + f(-1, 0)) / (hx * hx);
    let fpp = (f(0, 1) - f(0, 0) * 2.0 + f(0, -1)) / (hp * hp);
    let fxp = (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4.0 * hx * hp);
    // re-expand about the origin
    let coeffs = [
        c - fx * x0 - fp * p0 + fxx * (0.5 * x0 * x0) + fxp * (x0 * p0) + fpp * (0.5 * p0 * p0),
        fx - fxx * x0 - fxp * p0,
        fp - fpp * p0 - fxp * x0,
        fxx * 0.5,
        fxp,
        fpp * 0.5,
    ];
    let sym = PolynomialSymbol::new(coeffs);
    let tol = 1e-9 * a.max_abs().max(1e-300);
    for j in 0..nx {
        for k in 0..np {
            let z = g.point(j, k);
            if (sym.eval(z.x, z.p) - a.at(j, k)).norm() > tol {
                return None;
            }
        }
    }
    Some(coeffs)
}

/// Terminating Moyal series for two quadratic symbols:
/// `ab + (iħ/2){a,b} − (ħ²/8)(a_xx b_pp − 2a_xp b_xp + a_pp b_xx)`.
fn star_quadratic(a: &[C64; 6], b: &[C64; 6], grid: PhaseGrid) -> PhaseField {
    let h = grid.hbar().value();
    let (sa, sb) = (PolynomialSymbol::new(*a), PolynomialSymbol::new(*b));
    let grad = |c: &[C64; 6], x: f64, p: f64| (c[1] + c[3] * (2.0 * x) + c[4] * p, c[2] + c[4] * x + c[5] * (2.0 * p));
    let second = (a[3] * 2.0) * (b[5] * 2.0) - a[4] * b[4] * 2.0 + (a[5] * 2.0) * (b[3] * 2.0);
    PhaseField::from_fn(grid, |x, p| {
        let (ax, ap) = grad(a, x, p);
        let (bx, bp) = grad(b, x, p);
        sa.eval(x, p) * sb.eval(x, p) + C64::new(0.0, 0.5 * h) * (ax * bp - ap * bx) - second * (h * h / 8.0)
    })
}

/// `a★b` for decaying `b`: expand `b` in plane waves and use
/// `a★e^{ik·z} = e^{ik·z}·a(x − ħk_p/2, p + ħk_x/2)`, with the shifted
/// samples of `a` taken from its half-step refinement. The sum over
/// x-shifts is a convolution evaluated with FFTs column by column.
fn star_shift(a: &PhaseField, b: &PhaseField) -> PhaseField {
    let grid = *a.grid();
    let n = grid.nx();
    let half = (n / 2) as i64;
    let len = 4 * n;
    let ext_lo = -half;
    let ext_hi = 5 * half;
    let m = (ext_hi - ext_lo) as usize;
    let ext = refine_ext(a, ext_lo, ext_hi, resampling_for(a));

    let plan_l = FftPair::new(len);
    let plan_2n = FftPair::new(2 * n);
    let plan_n = FftPair::new(n);

    // FFT of every refined p-column, zero padded, offset n along u
    let col_fft: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|v| {
            let mut buf = vec![ZERO; len];
            for u in 0..m {
                buf[u + n - half as usize] = ext[u * m + v];
            }
            plan_l.forward(&mut buf);
            buf
        })
        .collect();

    // Fourier coefficients of b, Nyquist split, indexed by (n1 + half, n2 + half)
    let mut bh = b.values().to_vec();
    for row in bh.chunks_mut(n) {
        plan_n.forward(row);
    }
    let mut col = vec![ZERO; n];
    for k in 0..n {
        for j in 0..n {
            col[j] = bh[j * n + k];
        }
        plan_n.forward(&mut col);
        for j in 0..n {
            bh[j * n + k] = col[j];
        }
    }
    let w = n + 1;
    let mut coef = vec![ZERO; w * w];
    let norm = 1.0 / (n * n) as f64;
    for i1 in 0..n {
        for i2 in 0..n {
            let (f1, f2) = (signed_freq(i1, n), signed_freq(i2, n));
            let c = bh[i1 * n + i2] * norm;
            let s1: &[i64] = if f1 == -half { &[-half, half] } else { &[f1] };
            let s2: &[i64] = if f2 == -half { &[-half, half] } else { &[f2] };
            let wgt = 1.0 / (s1.len() * s2.len()) as f64;
            for &g1 in s1 {
                for &g2 in s2 {
                    coef[(g1 + half) as usize * w + (g2 + half) as usize] += c * wgt;
                }
            }
        }
    }
    let peak = coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let active: Vec<i64> = (-half..=half)
        .filter(|&n1| {
            let r = &coef[(n1 + half) as usize * w..(n1 + half + 1) as usize * w];
            r.iter().any(|c| c.norm() > 1e-18 * peak)
        })
        .collect();
    let kernels: Vec<Vec<C64>> = active
        .par_iter()
        .map(|&n1| {
            let mut h = vec![ZERO; len];
            for n2 in -half..=half {
                h[wrap(n2, len)] += coef[(n1 + half) as usize * w + (n2 + half) as usize];
            }
            plan_l.forward(&mut h);
            h
        })
        .collect();
    let twiddle: Vec<C64> = (0..n).map(|t| C64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64)).collect();
    let inv_len = 1.0 / len as f64;

    let columns: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut out = vec![ZERO; n];
            let mut z = vec![ZERO; 2 * n];
            for (&n1, hk) in active.iter().zip(&kernels) {
                let v = (2 * k as i64 + n1 - ext_lo) as usize;
                let c = &col_fft[v];
                let shift = 4 * k;
                for f in 0..2 * n {
                    z[f] = c[f] * hk[(f + len - shift) % len] + c[f + 2 * n] * hk[(f + 2 * n + len - shift) % len];
                }
                plan_2n.inverse(&mut z);
                for (j, o) in out.iter_mut().enumerate() {
                    let tw = twiddle[wrap(j as i64 * n1, n)];
                    *o += tw * z[j + n / 2] * inv_len;
                }
            }
            out
        })
        .collect();
    let mut vals = vec![ZERO; n * n];
    for (k, c) in columns.iter().enumerate() {
        for (j, v) in c.iter().enumerate() {
            vals[j * n + k] = *v;
        }
    }
    PhaseField::from_parts(grid, vals)
}

/// Constant value of a field, if it is constant to rounding.
fn constant_value(a: &PhaseField) -> Option<C64> {
    let c = a.values()[0];
    let tol = 1e-13 * a.max_abs().max(1e-300);
    a.values().iter().all(|v| (v - c).norm() <= tol).then_some(c)
}

/// Moyal product `a★b` on a DFT-compatible grid.
///
/// Exact on the discrete torus when one factor numerically vanishes on the
/// boundary (the other may be a polynomial or tabulated symbol of degree
/// ≤ 7 in each variable), or when both factors are quadratic polynomials.
/// Other combinations are refused.
pub fn star_product(a: &PhaseField, b: &PhaseField) -> Result<PhaseField> {
    require_same(a, b)?;
    if b.decays(DECAY_RTOL) {
        return Ok(star_shift(a, b));
    }
    if a.decays(DECAY_RTOL) {
        return Ok(star_shift(&b.conj(), &a.conj()).conj());
    }
    if let Some(c) = constant_value(a) {
        return Ok(b.scale(c));
    }
    if let Some(c) = constant_value(b) {
        return Ok(a.scale(c));
    }
    match (fit_quadratic(a), fit_quadratic(b)) {
        (Some(ca), Some(cb)) => Ok(star_quadratic(&ca, &cb, *a.grid())),
        _ => Err(Error::Unsupported(
            "star product needs one factor that vanishes at the grid boundary, or two quadratic polynomials".into(),
        )),
    }
}

fn refine_2d(a: &PhaseField) -> Vec<C64> {
    let n = a.grid().nx();
    refine_ext(a, 0, 2 * n as i64, Resampling::Periodic)
}

/// Direct quadrature of
/// `a★b(z) = (4πħ)^{-2}∬ e^{iσ(u,v)/2ħ} a(z + u/2) b(z − v/2) du dv`
/// over one period of `u` and `v`, using periodic half-step refinement.
/// Costs `O(N⁵)`; grids above 32×32 are refused.
pub fn star_product_direct(a: &PhaseField, b: &PhaseField) -> Result<PhaseField> {
    let grid = require_same(a, b)?;
    let n = grid.nx();
    if n > DIRECT_MAX_N {
        return Err(Error::Unsupported(format!(
            "direct star-product quadrature is limited to {DIRECT_MAX_N}x{DIRECT_MAX_N} grids, got {n}x{n}"
        )));
    }
    let m = 2 * n;
    let (ar, br) = (refine_2d(a), refine_2d(b));
    let ph = DMatrix::from_fn(m, m, |s, t| C64::from_polar(1.0, PI * (s * t) as f64 / n as f64));
    let ph_c = ph.map(|v| v.conj());
    let scale = 1.0 / (4.0 * (n * n) as f64);
    let vals: Vec<C64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / n, idx % n);
            let am = DMatrix::from_fn(m, m, |sx, sp| ar[((2 * j + sx) % m) * m + (2 * k + sp) % m]);
            // b(z − v/2) at v = (t_x dx, t_p dp); stored transposed (t_p, t_x)
            let bt = DMatrix::from_fn(m, m, |tp, tx| br[wrap(2 * j as i64 - tx as i64, m) * m + wrap(2 * k as i64 - tp as i64, m)]);
            let mm = &ph_c * bt * &ph;
            am.component_mul(&mm).sum() * scale
        })
        .collect();
    Ok(PhaseField::from_parts(grid, vals))
}

/// Kernel form of `Ψ ↦ H★Ψ`:
/// `K(z, y) = (2πħ)^{-2} ∫ e^{−iσ(u, z−y)/ħ} H(z − u/2) du`, with `u/2` on
/// the half-step grid over one centered period (end points at half
/// weight, periodically refined `H`), applied to `Ψ` by quadrature over
/// `y`. Costs `O(N⁵)`; limited to 32×32 grids.
pub fn star_operator_kernel_apply(h: &PhaseField, psi: &PhaseField) -> Result<PhaseField> {
    let grid = require_same(h, psi)?;
    let n = grid.nx();
    if n > DIRECT_MAX_N {
        return Err(Error::Unsupported(format!("kernel quadrature is limited to {DIRECT_MAX_N}x{DIRECT_MAX_N} grids")));
    }
    let m = 2 * n;
    let half = (n / 2) as i64;
    let href = refine_2d(h);
    let cell = grid.cell();
    let pref = cell * cell / (2.0 * PI * grid.hbar().value()).powi(2);
    // u/2 = (a·dx/2, b·dp/2): σ(u, z − y)/ħ = 2π(b(j − j_y) − a(k − k_y))/N
    let phase: Vec<C64> = (0..n).map(|t| C64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64)).collect();
    let weight = |a: i64| if a.abs() == half { 0.5 } else { 1.0 };
    let offsets: Vec<i64> = (-half..=half).collect();
    let vals: Vec<C64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / n, idx % n);
            // inner[a][jy] = Σ_b e^{−2πi b(j − jy)/N} H(z − u/2)
            let mut inner = vec![ZERO; offsets.len() * n];
            for (ia, &a) in offsets.iter().enumerate() {
                for jy in 0..n {
                    let d = j as i64 - jy as i64;
                    let mut acc = ZERO;
                    for &b in &offsets {
                        let hv = href[wrap(2 * j as i64 - a, m) * m + wrap(2 * k as i64 - b, m)];
                        acc += phase[wrap(-b * d, n)] * hv * weight(b);
                    }
                    inner[ia * n + jy] = acc * weight(a);
                }
            }
            let mut out = ZERO;
            for jy in 0..n {
                for ky in 0..n {
                    let d = k as i64 - ky as i64;
                    let mut kern = ZERO;
                    for (ia, &a) in offsets.iter().enumerate() {
                        kern += phase[wrap(a * d, n)] * inner[ia * n + jy];
                    }
                    out += kern * psi.at(jy, ky);
                }
            }
            out * pref
        })
        .collect();
    Ok(PhaseField::from_parts(grid, vals))
}

/// `H(x + ½iħ∂_p, p − ½iħ∂_x)Ψ` for a quadratic symbol, Weyl ordered
/// (`xp ↦ ½(X̃P̃ + P̃X̃)`), with spectral derivatives.
pub fn bopp_apply(h: &PolynomialSymbol, psi: &PhaseField) -> Result<PhaseField> {
    if h.potential.is_some() {
        return Err(Error::Unsupported(
            "a tabulated potential has no finite Bopp shift; use star_product with the sampled symbol".into(),
        ));
    }
    psi.grid().require_dft_compatible()?;
    let hb = psi.grid().hbar().value();
    let grid = *psi.grid();
    let xs = PhaseField::from_real_fn(grid, |x, _| x);
    let ps = PhaseField::from_real_fn(grid, |_, p| p);
    let bx = |f: &PhaseField| -> PhaseField {
        xs.mul(f).unwrap().add(&d_dp(f).scale(C64::new(0.0, 0.5 * hb))).unwrap()
    };
    let bp = |f: &PhaseField| -> PhaseField {
        ps.mul(f).unwrap().sub(&d_dx(f).scale(C64::new(0.0, 0.5 * hb))).unwrap()
    };
    let c = &h.coeffs;
    let x1 = bx(psi);
    let p1 = bp(psi);
    let mut out = psi.scale(c[0]);
    out = out.add(&x1.scale(c[1]))?.add(&p1.scale(c[2]))?;
    if c[3] != ZERO {
        out = out.add(&bx(&x1).scale(c[3]))?;
    }
    if c[4] != ZERO {
        let xp = bx(&p1).add(&bp(&x1))?;
        out = out.add(&xp.scale(c[4] * 0.5))?;
    }
    if c[5] != ZERO {
        out = out.add(&bp(&p1).scale(c[5]))?;
    }
    Ok(out)
}

fn grid_steps(value: f64, step: f64, what: &str) -> Result<i64> {
    let r = value / step;
    let i = r.round();
    if (r - i).abs() > 1e-9 * r.abs().max(1.0) {
        return Err(Error::OffGrid(format!("{what} = {value} is not a multiple of the grid step {step}")));
    }
    Ok(i as i64)
}

/// Heisenberg–Weyl operator `T̂(z₀)ψ(x) = e^{i(p₀x − ½p₀x₀)/ħ}ψ(x − x₀)`.
/// `x₀` must be a multiple of `dx` and `p₀` of `2πħ/(N·dx)`; the shift wraps
/// around the grid.
pub fn heisenberg_weyl(z0: SymplecticVector, psi: &WaveField, hbar: f64) -> Result<WaveField> {
    let g = *psi.grid();
    let n = g.len();
    let a = grid_steps(z0.x, g.dx(), "x0")?;
    let dp = 2.0 * PI * hbar / (n as f64 * g.dx());
    grid_steps(z0.p, dp, "p0")?;
    let v = psi.values();
    let vals = (0..n)
        .map(|j| {
            let x = g.point(j);
            C64::from_polar(1.0, (z0.p * x - 0.5 * z0.p * z0.x) / hbar) * v[wrap(j as i64 - a, n)]
        })
        .collect();
    Ok(WaveField::from_parts(g, vals))
}

/// Phase-space translation `T̃(z₀)Ψ(z) = e^{−iσ(z,z₀)/ħ}Ψ(z − z₀/2)`;
/// `z₀/2` must be a grid translation. Wraps around the grid.
pub fn phase_translate(z0: SymplecticVector, psi: &PhaseField) -> Result<PhaseField> {
    let g = *psi.grid();
    g.require_dft_compatible()?;
    let a = grid_steps(z0.x / 2.0, g.dx(), "x0/2")?;
    let b = grid_steps(z0.p / 2.0, g.dp(), "p0/2")?;
    let hb = g.hbar().value();
    let (nx, np) = (g.nx(), g.np());
    let mut vals = Vec::with_capacity(nx * np);
    for j in 0..nx {
        for k in 0..np {
            let z = g.point(j, k);
            let sigma = z.p * z0.x - z0.p * z.x;
            vals.push(C64::from_polar(1.0, -sigma / hb) * psi.at(wrap(j as i64 - a, nx), wrap(k as i64 - b, np)));
        }
    }
    Ok(PhaseField::from_parts(g, vals))
}

/// `Ĥψ = (2πħ)^{-1}∬ H_σ(z₀) T̂(z₀)ψ dz₀` summed over grid translations,
/// with `H_σ` the symplectic Fourier transform of `H`.
pub fn weyl_apply_covariant(h: &PhaseField, psi: &WaveField) -> Result<WaveField> {
    let g = *h.grid();
    g.require_dft_compatible()?;
    if !psi.grid().same_as(g.x_axis()) {
        return Err(Error::Shape("wave field is not on the symbol's x axis".into()));
    }
    let hs = symplectic_fourier(h)?;
    let n = g.nx();
    let hb = g.hbar().value();
    let pref = g.cell() / (2.0 * PI * hb);
    // e^{i p_b x_j/ħ} and e^{−i p_b x_a/2ħ}
    let e_full: Vec<C64> = (0..n * n)
        .map(|i| C64::from_polar(1.0, g.p_axis().point(i % n) * g.x_axis().point(i / n) / hb))
        .collect();
    let e_half: Vec<C64> = (0..n * n)
        .map(|i| C64::from_polar(1.0, -0.5 * g.p_axis().point(i % n) * g.x_axis().point(i / n) / hb))
        .collect();
    let v = psi.values();
    // x_a on a centered grid is (a − N/2)dx, i.e. a shift by a − N/2 nodes
    let vals = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = ZERO;
            for a in 0..n {
                let mut s = ZERO;
                for b in 0..n {
                    s += hs.at(a, b) * e_full[j * n + b] * e_half[a * n + b];
                }
                acc += s * v[wrap(j as i64 - (a as i64 - (n / 2) as i64), n)];
            }
            acc * pref
        })
        .collect();
    Ok(WaveField::from_parts(*psi.grid(), vals))
}

/// Weyl kernel `K(x,y) = (2πħ)^{-1}∫ e^{ip(x−y)/ħ} H((x+y)/2, p) dp`.
///
/// On the torus each pair `(j, l)` has the midpoint half-index
/// `(j + l) mod 2N` taken along the shorter arc; at separation `N/2` both
/// midpoints are averaged.
pub fn weyl_matrix(h: &PhaseField) -> Result<WeylKernel> {
    let g = *h.grid();
    g.require_dft_compatible()?;
    let n = g.nx();
    let ext = refine_ext(h, 0, 2 * n as i64, resampling_for(h));
    let m = 2 * n;
    // A_c(·) for each half-index c: inverse DFT over the p index
    let plan = FftPair::new(n);
    let mut spec = vec![ZERO; m * n];
    spec.par_chunks_mut(n).enumerate().for_each(|(c, row)| {
        for k in 0..n {
            row[k] = ext[c * m + 2 * k];
        }
        plan.inverse(row);
    });
    let scale = 1.0 / (n as f64 * g.dx());
    let half = (n / 2) as i64;
    let entry = |j: usize, l: usize| -> C64 {
        let d = j as i64 - l as i64;
        let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let bin = wrap(d, n);
        let c1 = (j + l) % m;
        let c2 = (j + l + n) % m;
        let v = if d.abs() < half {
            spec[c1 * n + bin]
        } else if d.abs() > half {
            spec[c2 * n + bin]
        } else {
            (spec[c1 * n + bin] + spec[c2 * n + bin]) * 0.5
        };
        v * (sign * scale)
    };
    let values = DMatrix::from_fn(n, n, entry);
    WeylKernel::new(g, values)
}

/// Weyl symbol of a kernel: `a(x,p) = ∫ e^{−ipy/ħ} K(x + y/2, x − y/2) dy`.
pub fn symbol_of(k: &WeylKernel) -> Result<PhaseField> {
    let g = *k.grid();
    g.require_dft_compatible()?;
    let n = g.nx();
    let half = (n / 2) as i64;
    let plan = FftPair::new(n);
    let kv = k.values();
    // a_nodes[i][bin]: A_{2i}(n) for every separation bin
    let mut a_nodes = vec![ZERO; n * n];
    for bin in 0..n {
        let d = signed_freq(bin, n);
        let d = if d == -half { half } else { d };
        let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let fac = n as f64 * g.dx() * sign;
        // pairs (l + d mod N, l) have midpoint half-index 2l + d mod 2N
        let mut samples = vec![ZERO; n];
        for l in 0..n {
            let j = wrap(l as i64 + d, n);
            let c = wrap(2 * l as i64 + d, 2 * n);
            samples[c / 2] = kv[(j, l)] * fac;
        }
        let at_nodes = if d.rem_euclid(2) == 0 { samples } else { half_to_nodes(&samples, &plan) };
        for i in 0..n {
            a_nodes[i * n + bin] = at_nodes[i];
        }
    }
    let inv_n = 1.0 / n as f64;
    a_nodes.par_chunks_mut(n).for_each(|row| {
        plan.forward(row);
        row.iter_mut().for_each(|v| *v *= inv_n);
    });
    Ok(PhaseField::from_parts(g, a_nodes))
}
