//! Star-genvalue problems through the ordinary eigenproblem: solve `Ĥψ = λψ`,
//! lift eigenfunctions with `W_φ`, check `H★Ψ = λΨ`, and the quadratic
//! (Williamson) theory.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{PhaseField, WaveField, C64};
use crate::fourier::trig_eval;
use crate::grid::{HbarContext, PhaseGrid, SpatialGrid};
use crate::moyal::{bopp_apply, star_product, weyl_matrix, PolynomialSymbol, WeylKernel};
use crate::special::hermite_function;
use crate::wigner::{cross_wigner_raw, oscillator_stargen, projection, WindowedTransform};

/// `V(x)` of a kinetic-plus-potential Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    /// `Σ_i c_i x^i`.
    Polynomial { coeffs: Vec<f64> },
    /// Samples on the solver's x grid.
    Tabulated { values: Vec<f64> },
}

impl Potential {
    pub fn sample(&self, grid: &SpatialGrid) -> Result<Vec<f64>> {
        match self {
            Potential::Polynomial { coeffs } => Ok(grid
                .points()
                .iter()
                .map(|&x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
                .collect()),
            Potential::Tabulated { values } => {
                if values.len() != grid.len() {
                    return Err(Error::Shape(format!(
                        "tabulated potential has {} samples, grid has {}",
                        values.len(),
                        grid.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("tabulated potential contains non-finite values".into()));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// `Σ c_ab x^a p^b`, coefficients of `1, x, p, x², xp, p²`.
    #[serde(rename = "quadratic_1d")]
    Quadratic1d { coeffs: [f64; 6] },
    /// `p²/2 + V(x)`.
    KineticPotential { potential: Potential },
    /// `½ Mz·z` on `ℝ^{2n}`, `z = (x_1..x_n, p_1..p_n)`.
    QuadraticNd { m: Vec<Vec<f64>> },
}

impl HamiltonianSpec {
    /// `½(p² + x²)`.
    pub fn oscillator() -> Self {
        HamiltonianSpec::Quadratic1d { coeffs: [0.0, 0.0, 0.0, 0.5, 0.0, 0.5] }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HamiltonianSpec::Quadratic1d { .. } => "quadratic_1d",
            HamiltonianSpec::KineticPotential { .. } => "kinetic_potential",
            HamiltonianSpec::QuadraticNd { .. } => "quadratic_nd",
        }
    }

    /// Exact quadratic symbol, when there is one.
    pub fn polynomial(&self) -> Option<PolynomialSymbol> {
        match self {
            HamiltonianSpec::Quadratic1d { coeffs } => Some(PolynomialSymbol::real(*coeffs)),
            HamiltonianSpec::KineticPotential { potential: Potential::Polynomial { coeffs } } if coeffs.len() <= 3 => {
                let c = |i: usize| coeffs.get(i).copied().unwrap_or(0.0);
                Some(PolynomialSymbol::real([c(0), c(1), 0.0, c(2), 0.0, 0.5]))
            }
            _ => None,
        }
    }

    /// Symbol sampled on a phase grid.
    pub fn symbol(&self, grid: PhaseGrid) -> Result<PhaseField> {
        match self {
            HamiltonianSpec::Quadratic1d { coeffs } => PolynomialSymbol::real(*coeffs).sample(grid),
            HamiltonianSpec::KineticPotential { potential } => {
                let v = potential.sample(grid.x_axis())?;
                PolynomialSymbol::real([0.0, 0.0, 0.0, 0.0, 0.0, 0.5]).with_potential(v)?.sample(grid)
            }
            HamiltonianSpec::QuadraticNd { .. } => Err(Error::Unsupported(
                "quadratic_nd Hamiltonians are handled by quadratic_spectrum, not on a 1-D grid".into(),
            )),
        }
    }

    pub fn nd_matrix(&self) -> Result<DMatrix<f64>> {
        match self {
            HamiltonianSpec::QuadraticNd { m } => {
                let n = m.len();
                if n == 0 || n % 2 != 0 || m.iter().any(|r| r.len() != n) {
                    return Err(Error::Shape("M must be a square matrix of even size".into()));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| m[i][j]))
            }
            _ => Err(Error::Unsupported("not a quadratic_nd Hamiltonian".into())),
        }
    }
}

/// Weyl quantization `Ĥ` of a Hamiltonian on a DFT-compatible grid.
pub fn quantize(h: &HamiltonianSpec, grid: PhaseGrid) -> Result<WeylKernel> {
    weyl_matrix(&h.symbol(grid)?)
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub psi: WaveField,
    /// `‖Ĥψ − λψ‖`.
    pub residual: f64,
}

/// Window of a star-genfunction: a Hermite index or a user field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowLabel {
    Hermite(usize),
    Custom,
}

#[derive(Debug, Clone)]
pub struct StarGenPair {
    pub lambda: f64,
    pub psi: PhaseField,
    pub window: WindowLabel,
}

/// Lowest `count` eigenpairs of the Weyl-quantized `H` on a centered grid,
/// ascending, each with its largest component real positive.
pub fn eigensolve(h: &HamiltonianSpec, grid: SpatialGrid, hbar: HbarContext, count: usize) -> Result<Vec<EigenPair>> {
    if count > grid.len() / 4 {
        return Err(Error::Config(format!("count {count} exceeds n_points/4 = {}", grid.len() / 4)));
    }
    let pg = PhaseGrid::from_x_axis(grid, hbar)?;
    let kernel = quantize(h, pg)?;
    let m = kernel.operator_matrix();
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let defect = (&m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if defect > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "quantized Hamiltonian is not Hermitian (relative defect {:.3e})",
            defect / scale
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let inv_sqrt_dx = 1.0 / grid.dx().sqrt();
    order
        .into_iter()
        .take(count)
        .map(|i| {
            let lambda = eig.eigenvalues[i];
            let v: Vec<C64> = eig.eigenvectors.column(i).iter().map(|c| c * inv_sqrt_dx).collect();
            let psi = WaveField::new(grid, v)?.fix_phase();
            let residual = operator_residual(&kernel, &psi, lambda)?;
            Ok(EigenPair { lambda, psi, residual })
        })
        .collect()
}

fn operator_residual(kernel: &WeylKernel, psi: &WaveField, lambda: f64) -> Result<f64> {
    Ok(kernel.apply(psi)?.sub(&psi.scale(C64::new(lambda, 0.0)))?.norm())
}

/// `Ψ = W_φψ` carries the eigenvalue of `ψ`.
pub fn stargen_from_eigen(pair: &EigenPair, t: &WindowedTransform, window: WindowLabel) -> Result<StarGenPair> {
    Ok(StarGenPair { lambda: pair.lambda, psi: t.apply(&pair.psi)?, window })
}

/// `ψ = W_φ*Ψ`, normalized, with `λ` from the Rayleigh quotient of `Ĥ` and
/// the residual `‖Ĥψ − λψ‖`. Fails when the window annihilates `Ψ`.
pub fn eigen_from_stargen(sg: &StarGenPair, t: &WindowedTransform, h: &HamiltonianSpec) -> Result<EigenPair> {
    let raw = t.adjoint(&sg.psi)?;
    let n_big = sg.psi.norm();
    if raw.norm() < 1e-10 * n_big {
        return Err(Error::Numerical(format!(
            "window annihilates the star-genfunction (|W*Psi| = {:.3e}); retry with another window",
            raw.norm()
        )));
    }
    let psi = raw.normalized()?.fix_phase();
    let kernel = quantize(h, *t.grid())?;
    let hpsi = kernel.apply(&psi)?;
    let lambda = hpsi.inner(&psi)?.re;
    let residual = hpsi.sub(&psi.scale(C64::new(lambda, 0.0)))?.norm();
    Ok(EigenPair { lambda, psi, residual })
}

/// How `H★Ψ` is evaluated in [`stargen_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarPath {
    /// Bopp shift when `H` is quadratic, star product otherwise.
    Auto,
    Bopp,
    Star,
}

/// `‖H★Ψ − λΨ‖ / ‖Ψ‖`.
pub fn stargen_residual(h: &HamiltonianSpec, sg: &StarGenPair, path: StarPath) -> Result<f64> {
    let grid = *sg.psi.grid();
    let hs = match (path, h.polynomial()) {
        (StarPath::Bopp, None) => {
            return Err(Error::Unsupported("Bopp path needs a quadratic Hamiltonian".into()));
        }
        (StarPath::Bopp, Some(p)) | (StarPath::Auto, Some(p)) => bopp_apply(&p, &sg.psi)?,
        _ => star_product(&h.symbol(grid)?, &sg.psi)?,
    };
    let r = hs.sub(&sg.psi.scale(C64::new(sg.lambda, 0.0)))?;
    Ok(r.norm() / sg.psi.norm())
}

/// Coefficients `α_{j,ℓ} = (Ψ|Ψ_{j,ℓ})` against the oscillator
/// star-genfunctions `Ψ_{j,ℓ} = W_{ψ_ℓ}ψ_j`.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionCoefficients {
    pub fixed_j: usize,
    pub alphas: Vec<C64>,
    /// `Σ_{k≠j, ℓ} |(Ψ|Ψ_{k,ℓ})|²` over `k, ℓ ≤ max_index`.
    pub cross_energy: f64,
}

pub fn expand_in_basis(big_psi: &PhaseField, j: usize, max_index: usize) -> Result<ExpansionCoefficients> {
    let grid = *big_psi.grid();
    let mut alphas = Vec::with_capacity(max_index + 1);
    let mut cross_energy = 0.0;
    for k in 0..=max_index {
        for l in 0..=max_index {
            let c = big_psi.inner(&oscillator_stargen(k, l, grid)?)?;
            if k == j {
                alphas.push(c);
            } else {
                cross_energy += c.norm_sqr();
            }
        }
    }
    if j > max_index {
        for l in 0..=max_index {
            alphas.push(big_psi.inner(&oscillator_stargen(j, l, grid)?)?);
        }
    }
    Ok(ExpansionCoefficients { fixed_j: j, alphas, cross_energy })
}

/// Groups ascending eigenvalues whose neighbours lie within `tol`.
pub fn group_levels(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (v - values[*g.last().unwrap()]).abs() <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// `M = SᵀDS` with `S` symplectic and `D = diag(Λ, Λ)`.
#[derive(Debug, Clone)]
pub struct SymplecticDecomposition {
    pub s: DMatrix<f64>,
    /// Symplectic eigenvalues, ascending.
    pub omegas: Vec<f64>,
}

impl SymplecticDecomposition {
    pub fn d(&self) -> DMatrix<f64> {
        let n = self.omegas.len();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| if i == j { self.omegas[i % n] } else { 0.0 })
    }
}

/// Standard symplectic matrix `[[0, I], [−I, 0]]` of size `2n`.
pub fn symplectic_j(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            1.0
        } else if i == j + n {
            -1.0
        } else {
            0.0
        }
    })
}

/// Williamson normal form of a symmetric positive-definite `2n×2n` matrix.
///
/// With `K = M^{-1/2} J M^{-1/2}` (antisymmetric), an orthogonal `O` brings
/// `K` to `[[0, Λ⁻¹], [−Λ⁻¹, 0]]`; then `S = D^{-1/2} Oᵀ M^{1/2}`. Columns of
/// `O` pair a unit eigenvector `e` of `−K²` (eigenvalue `ω⁻²`) with
/// `f = −ωKe`; degenerate eigenspaces are filled greedily with pivoted
/// Gram–Schmidt.
pub fn williamson(m: &DMatrix<f64>) -> Result<SymplecticDecomposition> {
    let dim = m.nrows();
    if dim == 0 || dim != m.ncols() || dim % 2 != 0 {
        return Err(Error::Domain("M must be square with even size".into()));
    }
    let n = dim / 2;
    if n > 8 {
        return Err(Error::Domain(format!("Williamson decomposition is limited to n <= 8, got n = {n}")));
    }
    let scale = m.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if (m - m.transpose()).iter().any(|v| v.abs() > 1e-12 * scale) {
        return Err(Error::Domain("M is not symmetric".into()));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("M is not positive definite".into()));
    }
    let q = &eig.eigenvectors;
    let half = q * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * q.transpose();
    let inv_half = q * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt())) * q.transpose();
    let j = symplectic_j(n);
    let k = &inv_half * &j * &inv_half;
    let k = (&k - k.transpose()) * 0.5;
    let neg_k2 = k.transpose() * &k;
    let e2 = SymmetricEigen::new((&neg_k2 + neg_k2.transpose()) * 0.5);
    let mut cand: Vec<usize> = (0..dim).collect();
    cand.sort_by(|&a, &b| e2.eigenvalues[b].total_cmp(&e2.eigenvalues[a]).then(a.cmp(&b)));

    let mut es: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut fs: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut omegas = Vec::with_capacity(n);
    let mut used = vec![false; dim];
    while es.len() < n {
        // next eigenvalue cluster head, then best residual inside that cluster
        let head = *cand.iter().find(|&&c| !used[c]).ok_or_else(|| {
            Error::Numerical("Williamson construction ran out of eigenvectors".into())
        })?;
        let mu = e2.eigenvalues[head];
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for &c in cand.iter().filter(|&&c| !used[c]) {
            if (e2.eigenvalues[c] - mu).abs() > 1e-8 * mu.abs() {
                continue;
            }
            let mut v = e2.eigenvectors.column(c).into_owned();
            for _ in 0..2 {
                for b in es.iter().chain(fs.iter()) {
                    let d = b.dot(&v);
                    v -= b * d;
                }
            }
            let r = v.norm();
            if best.as_ref().map_or(true, |(_, _, br)| r > *br) {
                best = Some((c, v, r));
            }
        }
        let (c, v, r) = best.ok_or_else(|| Error::Numerical("degenerate symplectic spectrum not resolved".into()))?;
        used[c] = true;
        if r < 1e-6 {
            continue;
        }
        let e = v / r;
        let mu_e = e.dot(&(&neg_k2 * &e));
        let omega = 1.0 / mu_e.sqrt();
        let f = (&k * &e) * (-omega);
        let f = &f / f.norm();
        es.push(e);
        fs.push(f);
        omegas.push(omega);
    }
    let mut o = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        o.set_column(i, &es[i]);
        o.set_column(i + n, &fs[i]);
    }
    let d_inv_half = DMatrix::from_fn(dim, dim, |a, b| if a == b { omegas[a % n].sqrt().recip() } else { 0.0 });
    let s = d_inv_half * o.transpose() * half;
    Ok(SymplecticDecomposition { s, omegas })
}

/// `λ_N = Σ_j (N_j + ½)ħω_j` for each multi-index.
pub fn quadratic_spectrum(m: &DMatrix<f64>, multi_indices: &[Vec<usize>], hbar: HbarContext) -> Result<Vec<f64>> {
    let dec = williamson(m)?;
    multi_indices
        .iter()
        .map(|idx| {
            if idx.len() != dec.omegas.len() {
                return Err(Error::Shape(format!(
                    "multi-index has {} entries, system has {} degrees of freedom",
                    idx.len(),
                    dec.omegas.len()
                )));
            }
            Ok(idx.iter().zip(&dec.omegas).map(|(&k, w)| (k as f64 + 0.5) * hbar.value() * w).sum())
        })
        .collect()
}

/// Generators of the metaplectic group used by [`symplectic_covariance_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `J`: `(x, p) ↦ (p, −x)`, acting as the ħ-Fourier transform.
    Fourier,
    /// `diag(a, 1/a)`, acting as `a^{-1/2}ψ(x/a)`.
    Dilation(f64),
    /// `(x, p) ↦ (x, p + cx)`, acting as `e^{icx²/2ħ}ψ`.
    Shear(f64),
}

impl Generator {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        match *self {
            Generator::Fourier => [[0.0, 1.0], [-1.0, 0.0]],
            Generator::Dilation(a) => [[a, 0.0], [0.0, 1.0 / a]],
            Generator::Shear(c) => [[1.0, 0.0], [c, 1.0]],
        }
    }

    fn apply(&self, psi: &WaveField, hbar: f64) -> Result<WaveField> {
        let g = *psi.grid();
        let n = g.len();
        match *self {
            Generator::Fourier => {
                let target = 2.0 * PI * hbar / n as f64;
                if !g.is_centered() || (g.dx() * g.dx() - target).abs() > 1e-10 * target {
                    return Err(Error::Config(
                        "the Fourier generator needs a symmetric grid with dx^2 = 2*pi*hbar/n".into(),
                    ));
                }
                let s = 1.0 / (n as f64).sqrt();
                let h = n as i64 / 2;
                let v = psi.values();
                let vals = (0..n)
                    .map(|j| {
                        let mut acc = C64::new(0.0, 0.0);
                        for (l, val) in v.iter().enumerate() {
                            let ph = -2.0 * PI * ((j as i64 - h) * (l as i64 - h)).rem_euclid(n as i64) as f64 / n as f64;
                            acc += val * C64::from_polar(1.0, ph);
                        }
                        acc * s
                    })
                    .collect();
                Ok(WaveField::new(g, vals)?)
            }
            Generator::Dilation(a) => {
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::Domain(format!("dilation factor must be positive, got {a}")));
                }
                let pos: Vec<f64> = g.points().iter().map(|&x| (x / a - g.x_min()) / g.dx()).collect();
                let vals = trig_eval(psi.values(), &pos);
                let vals = pos
                    .iter()
                    .zip(vals)
                    .map(|(&t, v)| if t < 0.0 || t > (n - 1) as f64 { C64::new(0.0, 0.0) } else { v / a.sqrt() })
                    .collect();
                Ok(WaveField::new(g, vals)?)
            }
            Generator::Shear(c) => Ok(WaveField::new(
                g,
                g.points().iter().zip(psi.values()).map(|(&x, v)| v * C64::from_polar(1.0, c * x * x / (2.0 * hbar))).collect(),
            )?),
        }
    }
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn bilinear(f: &PhaseField, x: f64, p: f64) -> Option<C64> {
    let g = f.grid();
    let tx = (x - g.x_axis().x_min()) / g.dx();
    let tp = (p - g.p_axis().x_min()) / g.dp();
    if tx < 0.0 || tp < 0.0 || tx >= (g.nx() - 1) as f64 || tp >= (g.np() - 1) as f64 {
        return None;
    }
    let (j, k) = (tx.floor() as usize, tp.floor() as usize);
    let (u, v) = (tx - j as f64, tp - k as f64);
    Some(
        f.at(j, k) * ((1.0 - u) * (1.0 - v))
            + f.at(j + 1, k) * (u * (1.0 - v))
            + f.at(j, k + 1) * ((1.0 - u) * v)
            + f.at(j + 1, k + 1) * (u * v),
    )
}

/// `max |W(Ŝψ, Ŝφ)(z) − W(ψ, φ)(S⁻¹z)|` over the interior half of the grid,
/// for `S = G_last ⋯ G_first` built from `word` (applied first to last).
pub fn symplectic_covariance_check(word: &[Generator], psi: &WaveField, phi: &WaveField, grid: PhaseGrid) -> Result<f64> {
    let hbar = grid.hbar().value();
    let mut s = [[1.0, 0.0], [0.0, 1.0]];
    let (mut sp, mut sf) = (psi.clone(), phi.clone());
    for gen in word {
        s = mat_mul(gen.matrix(), s);
        sp = gen.apply(&sp, hbar)?;
        sf = gen.apply(&sf, hbar)?;
    }
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
    let w0 = cross_wigner_raw(psi, phi, grid)?;
    let w1 = cross_wigner_raw(&sp, &sf, grid)?;
    let (xl, pl) = (0.5 * grid.x_axis().x_max(), 0.5 * grid.p_axis().x_max());
    // nodes whose preimage is again a node are compared exactly, the rest
    // only when no such nodes exist
    let (mut exact, mut interp) = (0.0f64, 0.0f64);
    let mut n_exact = 0;
    for j in 0..grid.nx() {
        for k in 0..grid.np() {
            let z = grid.point(j, k);
            if z.x.abs() > xl || z.p.abs() > pl {
                continue;
            }
            let (x0, p0) = (inv[0][0] * z.x + inv[0][1] * z.p, inv[1][0] * z.x + inv[1][1] * z.p);
            let tx = (x0 - grid.x_axis().x_min()) / grid.dx();
            let tp = (p0 - grid.p_axis().x_min()) / grid.dp();
            let (rx, rp) = (tx.round(), tp.round());
            if (tx - rx).abs() < 1e-9 && (tp - rp).abs() < 1e-9 && rx >= 0.0 && rp >= 0.0 {
                let (a, b) = (rx as usize, rp as usize);
                if a < grid.nx() && b < grid.np() {
                    exact = exact.max((w1.at(j, k) - w0.at(a, b)).norm());
                    n_exact += 1;
                    continue;
                }
            }
            if let Some(v) = bilinear(&w0, x0, p0) {
                interp = interp.max((w1.at(j, k) - v).norm());
            }
        }
    }
    Ok(if n_exact >= 16 { exact } else { interp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContinuousCase {
    /// `H = p`: `Ψ = Φ(p)e^{2i(E−p)x/ħ}` solves `(p − ½iħ∂_x)Ψ = EΨ`.
    Momentum,
    /// `H = x`: `Ψ = Φ(x)e^{−2i(E−x)p/ħ}` solves `(x + ½iħ∂_p)Ψ = EΨ`.
    Position,
}

/// Gaussian profile `Φ(s) = e^{−(s − center)²/(2·width²)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianProfile {
    pub center: f64,
    pub width: f64,
}

impl Default for GaussianProfile {
    fn default() -> Self {
        Self { center: 0.0, width: 1.0 }
    }
}

/// Max residual of the closed-form continuous-spectrum solutions on the
/// grid, with the exact derivative. `flip_sign` reverses the exponent, which
/// no longer solves the equation.
pub fn continuous_spectrum_check(
    case: ContinuousCase,
    energy: f64,
    profile: GaussianProfile,
    grid: PhaseGrid,
    flip_sign: bool,
) -> f64 {
    let hbar = grid.hbar().value();
    let s = if flip_sign { -1.0 } else { 1.0 };
    let phi = |t: f64| (-(t - profile.center).powi(2) / (2.0 * profile.width * profile.width)).exp();
    let mut worst = 0.0f64;
    for j in 0..grid.nx() {
        for k in 0..grid.np() {
            let z = grid.point(j, k);
            let r = match case {
                ContinuousCase::Momentum => {
                    let psi = C64::from_polar(phi(z.p), s * 2.0 * (energy - z.p) * z.x / hbar);
                    let dpsi_dx = psi * C64::new(0.0, s * 2.0 * (energy - z.p) / hbar);
                    psi * z.p - dpsi_dx * C64::new(0.0, 0.5 * hbar) - psi * energy
                }
                ContinuousCase::Position => {
                    let psi = C64::from_polar(phi(z.x), -s * 2.0 * (energy - z.x) * z.p / hbar);
                    let dpsi_dp = psi * C64::new(0.0, -s * 2.0 * (energy - z.x) / hbar);
                    psi * z.x + dpsi_dp * C64::new(0.0, 0.5 * hbar) - psi * energy
                }
            };
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// Least-squares fit of `log|W| = c − (a x² + b p²)/ħ` over the points where
/// `|W| > 1e-6·max`. Fails if the field is not a centered Gaussian.
pub fn fit_gaussian_decay(w: &PhaseField) -> Result<(f64, f64)> {
    let g = w.grid();
    let hbar = g.hbar().value();
    let cut = 1e-6 * w.max_abs();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..g.nx() {
        for k in 0..g.np() {
            let v = w.at(j, k).norm();
            if v > cut {
                let z = g.point(j, k);
                rows.push([1.0, -z.x * z.x / hbar, -z.p * z.p / hbar]);
                rhs.push(v.ln());
            }
        }
    }
    if rows.len() < 3 {
        return Err(Error::Unsupported("too few significant samples for a Gaussian fit".into()));
    }
    let a = DMatrix::from_fn(rows.len(), 3, |i, c| rows[i][c]);
    let b = DVector::from_vec(rhs);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("Gaussian fit failed: {e}")))?;
    let resid = (&a * &sol - &b).amax();
    if resid > 1e-6 {
        return Err(Error::Unsupported(format!("field is not a Gaussian (log-fit residual {resid:.3e})")));
    }
    Ok((sol[1], sol[2]))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub width: f64,
    pub a: f64,
    pub b: f64,
    pub product: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// `a·b ≤ 1 + 1e-9` for every row.
    pub bound_holds: bool,
    /// `‖P_φΨ_trunc − Ψ_trunc‖` for `Ψ_{0,0}` cut to `|z| ≤ 2`.
    pub compact_support_defect: f64,
}

/// Fits the Gaussian decay of `W_φψ` for `ψ = φ = (πħs²)^{-1/4}e^{−x²/(2s²ħ)}`
/// over the given widths, and probes a compactly supported field.
pub fn gaussian_decay_check(widths: &[f64], grid: PhaseGrid) -> Result<DecayReport> {
    let hbar = grid.hbar().value();
    let mut rows = Vec::with_capacity(widths.len());
    for &s in widths {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Domain(format!("width must be positive, got {s}")));
        }
        let norm = (PI * hbar * s * s).powf(-0.25);
        let psi = WaveField::from_real_fn(*grid.x_axis(), |x| norm * (-x * x / (2.0 * s * s * hbar)).exp());
        let w = cross_wigner_raw(&psi, &psi, grid)?;
        let (a, b) = fit_gaussian_decay(&w)?;
        rows.push(DecayRow { width: s, a, b, product: a * b });
    }
    let bound_holds = rows.iter().all(|r| r.product <= 1.0 + 1e-9);
    let t = WindowedTransform::hermite(0, grid)?;
    let base = oscillator_stargen(0, 0, grid)?;
    let mut cut = base.clone();
    for j in 0..grid.nx() {
        for k in 0..grid.np() {
            if grid.point(j, k).norm_sqr() > 4.0 {
                cut.values_mut()[j * grid.np() + k] = C64::new(0.0, 0.0);
            }
        }
    }
    let defect = projection(&t, &cut)?.sub(&cut)?.norm();
    Ok(DecayReport { rows, bound_holds, compact_support_defect: defect })
}

/// Hermite eigenfunction of the oscillator at the grid's ħ.
pub fn oscillator_eigenfunction(k: usize, grid: SpatialGrid, hbar: HbarContext) -> Result<WaveField> {
    hermite_function(k, grid, hbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moyal::PolynomialSymbol;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn unit_grid(n: usize) -> PhaseGrid {
        PhaseGrid::symmetric(n, HbarContext::unit()).unwrap()
    }

    #[test]
    fn oscillator_eigenpairs() {
        let g = SpatialGrid::centered(10.0, 256).unwrap();
        let pairs = eigensolve(&HamiltonianSpec::oscillator(), g, HbarContext::unit(), 8).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            assert!((p.lambda - (k as f64 + 0.5)).abs() < 1e-8, "{k}: {}", p.lambda);
            let h = hermite_function(k, g, HbarContext::unit()).unwrap();
            assert!((p.psi.inner(&h).unwrap().norm() - 1.0).abs() < 1e-10);
            assert!(p.residual < 1e-8);
        }
        assert!(eigensolve(&HamiltonianSpec::oscillator(), g, HbarContext::unit(), 65).is_err());
        assert!(eigensolve(&HamiltonianSpec::oscillator(), g, HbarContext::unit(), 0).unwrap().is_empty());
        let nd = HamiltonianSpec::QuadraticNd { m: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert!(matches!(eigensolve(&nd, g, HbarContext::unit(), 1), Err(Error::Unsupported(_))));
    }

    // lowest eigenvalues of the symmetric tridiagonal (d, e) by Sturm bisection
    fn sturm_lowest(d: &[f64], e: &[f64], count: usize) -> Vec<f64> {
        let below = |x: f64| {
            let mut c = 0;
            let mut q = d[0] - x;
            if q < 0.0 {
                c += 1;
            }
            for i in 1..d.len() {
                let qq = if q == 0.0 { 1e-300 } else { q };
                q = d[i] - x - e[i - 1] * e[i - 1] / qq;
                if q < 0.0 {
                    c += 1;
                }
            }
            c
        };
        (0..count)
            .map(|i| {
                let (mut lo, mut hi) = (-1e3, 1e3);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if below(mid) > i {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    #[test]
    fn quartic_potential_matches_finite_differences() {
        let count = 6;
        let l = 6.0;
        let fd = |n: usize| {
            let h = 2.0 * l / n as f64;
            let xs: Vec<f64> = (1..n).map(|i| -l + i as f64 * h).collect();
            let d: Vec<f64> = xs.iter().map(|x| 1.0 / (h * h) + x.powi(4)).collect();
            let e = vec![-0.5 / (h * h); xs.len() - 1];
            sturm_lowest(&d, &e, count)
        };
        let (c, f) = (fd(2000), fd(4000));
        let oracle: Vec<f64> = c.iter().zip(&f).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
        let h = HamiltonianSpec::KineticPotential { potential: Potential::Polynomial { coeffs: vec![0.0, 0.0, 0.0, 0.0, 1.0] } };
        let g = SpatialGrid::centered(l, 256).unwrap();
        let pairs = eigensolve(&h, g, HbarContext::unit(), count).unwrap();
        for (p, o) in pairs.iter().zip(&oracle) {
            assert!((p.lambda - o).abs() < 1e-5, "{} vs {}", p.lambda, o);
        }
    }

    #[test]
    fn star_genvalue_round_trip() {
        let g = unit_grid(128);
        let h = HamiltonianSpec::oscillator();
        let pairs = eigensolve(&h, *g.x_axis(), g.hbar(), 5).unwrap();
        for (j, pair) in pairs.iter().enumerate() {
            for l in 0..=4 {
                let t = WindowedTransform::hermite(l, g).unwrap();
                let sg = stargen_from_eigen(pair, &t, WindowLabel::Hermite(l)).unwrap();
                assert!((sg.psi.norm() - 1.0).abs() < 1e-8);
                for path in [StarPath::Bopp, StarPath::Star] {
                    assert!(stargen_residual(&h, &sg, path).unwrap() < 1e-6);
                }
                let back = eigen_from_stargen(&sg, &t, &h).unwrap();
                assert!(back.psi.max_abs_diff(&pair.psi).unwrap() < 1e-7);
                assert!((back.lambda - (j as f64 + 0.5)).abs() < 1e-6);
            }
        }
        // wrong eigenvalue and generic fields are detected
        let t0 = WindowedTransform::hermite(0, g).unwrap();
        let mut sg = stargen_from_eigen(&pairs[1], &t0, WindowLabel::Hermite(0)).unwrap();
        sg.lambda += 0.1;
        assert!(stargen_residual(&h, &sg, StarPath::Auto).unwrap() >= 0.09);
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let noise = PhaseField::from_fn(g, |x, p| C64::from_polar((-(x - a).powi(2) - 3.0 * (p - b).powi(2)).exp(), x * p));
        let noise = noise.scale(C64::new(1.0 / noise.norm(), 0.0));
        let sg = StarGenPair { lambda: 0.5, psi: noise, window: WindowLabel::Custom };
        assert!(stargen_residual(&h, &sg, StarPath::Auto).unwrap() > 0.1);
    }

    #[test]
    fn mixed_windows_never_give_a_wrong_eigenvalue() {
        let g = unit_grid(128);
        let h = HamiltonianSpec::oscillator();
        let sg = StarGenPair { lambda: 1.5, psi: oscillator_stargen(1, 0, g).unwrap(), window: WindowLabel::Hermite(0) };
        for l in 0..=4 {
            let t = WindowedTransform::hermite(l, g).unwrap();
            match eigen_from_stargen(&sg, &t, &h) {
                Ok(p) => assert!((p.lambda - 1.5).abs() < 1e-6 && p.residual < 1e-6),
                Err(e) => assert!(matches!(e, Error::Numerical(_))),
            }
        }
        let t1 = WindowedTransform::hermite(1, g).unwrap();
        assert!(eigen_from_stargen(&sg, &t1, &h).is_err());
    }

    #[test]
    fn expansion_in_oscillator_basis() {
        let g = unit_grid(128);
        let e = expand_in_basis(&oscillator_stargen(2, 2, g).unwrap(), 2, 4).unwrap();
        for (l, a) in e.alphas.iter().enumerate() {
            let want = if l == 2 { 1.0 } else { 0.0 };
            assert!((a - want).norm() < 1e-8);
        }
        assert!(e.cross_energy < 1e-8);
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let coef: Vec<C64> = (0..5).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let nrm = coef.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut f = PhaseField::zeros(g);
        for (l, c) in coef.iter().enumerate() {
            f = f.add(&oscillator_stargen(1, l, g).unwrap().scale(c / nrm)).unwrap();
        }
        let e = expand_in_basis(&f, 1, 5).unwrap();
        for (l, c) in coef.iter().enumerate() {
            assert!((e.alphas[l] - c / nrm).norm() < 1e-8);
        }
        assert!(e.cross_energy < 1e-8);
        assert!((e.alphas.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn level_grouping() {
        assert_eq!(group_levels(&[0.5, 1.5, 1.5 + 1e-9, 2.5], 1e-8), vec![vec![0], vec![1, 2], vec![3]]);
    }

    fn check_williamson(m: &DMatrix<f64>) {
        let n = m.nrows() / 2;
        let dec = williamson(m).unwrap();
        let j = symplectic_j(n);
        let s = &dec.s;
        let scale = m.amax().max(1.0);
        assert!((s.transpose() * &j * s - &j).amax() < 1e-10 * scale);
        assert!((s.transpose() * dec.d() * s - m).amax() < 1e-10 * scale);
        // oracle: eigenvalues of JM are ±iω
        let jm = &j * m;
        let mut im: Vec<f64> = jm.complex_eigenvalues().iter().map(|c| c.im).filter(|v| *v > 0.0).collect();
        im.sort_by(f64::total_cmp);
        assert_eq!(im.len(), n);
        for (a, b) in im.iter().zip(&dec.omegas) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
    }

    fn random_spd(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(2 * n, 2 * n, |_, _| rng.gen_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(2 * n, 2 * n) * 0.5
    }

    #[test]
    fn williamson_examples() {
        let dec = williamson(&DMatrix::identity(2, 2)).unwrap();
        assert!((dec.omegas[0] - 1.0).abs() < 1e-14);
        let dec = williamson(&DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 3.0]))).unwrap();
        assert!((dec.omegas[0] - 3.0).abs() < 1e-14);
        check_williamson(&DMatrix::identity(6, 6));
        check_williamson(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 1.0, 2.0])));
        assert!(williamson(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
        assert!(williamson(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            check_williamson(&random_spd(n, &mut rng));
        }
    }

    #[test]
    fn quadratic_spectra() {
        let one = HbarContext::unit();
        let l = quadratic_spectrum(&DMatrix::identity(2, 2), &[vec![0], vec![1], vec![2], vec![3]], one).unwrap();
        assert_eq!(l, vec![0.5, 1.5, 2.5, 3.5]);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 1.0, 2.0]));
        assert!((quadratic_spectrum(&m, &[vec![0, 0]], one).unwrap()[0] - 1.5).abs() < 1e-12);
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        let m = random_spd(2, &mut rng);
        let w = williamson(&m).unwrap().omegas;
        let l = quadratic_spectrum(&m, &[vec![0, 0], vec![1, 0], vec![0, 1]], one).unwrap();
        assert!((l[1] - l[0] - w[0]).abs() < 1e-10);
        assert!((l[2] - l[0] - w[1]).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn williamson_postconditions(seed in 0u64..10_000, n in 1usize..=3) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            check_williamson(&random_spd(n, &mut rng));
        }
    }

    #[test]
    fn symplectic_covariance() {
        let g = PhaseGrid::symmetric(256, HbarContext::unit()).unwrap();
        let psi0 = hermite_function(0, *g.x_axis(), g.hbar()).unwrap();
        let psi1 = hermite_function(1, *g.x_axis(), g.hbar()).unwrap();
        assert!(symplectic_covariance_check(&[], &psi0, &psi0, g).unwrap() < 1e-14);
        assert!(symplectic_covariance_check(&[Generator::Fourier], &psi0, &psi0, g).unwrap() < 1e-6);
        assert!(symplectic_covariance_check(&[Generator::Fourier], &psi1, &psi0, g).unwrap() < 1e-6);
        let e = symplectic_covariance_check(&[Generator::Dilation(2.0)], &psi1, &psi1, g).unwrap();
        assert!(e < 1e-6, "{e}");
        let e = symplectic_covariance_check(&[Generator::Shear(1.0), Generator::Fourier], &psi1, &psi0, g).unwrap();
        assert!(e < 1e-6, "{e}");
        let e = symplectic_covariance_check(&[Generator::Shear(0.5), Generator::Dilation(1.5)], &psi1, &psi0, g).unwrap();
        assert!(e < 1e-2, "{e}");
    }

    #[test]
    fn continuous_spectrum() {
        let g = unit_grid(64);
        for e in [-1.0, 0.0, 1.0, 2.5] {
            for case in [ContinuousCase::Momentum, ContinuousCase::Position] {
                assert!(continuous_spectrum_check(case, e, GaussianProfile::default(), g, false) < 1e-12);
                assert!(continuous_spectrum_check(case, e, GaussianProfile::default(), g, true) > 1e-3);
            }
        }
    }

    #[test]
    fn gaussian_decay() {
        let g = PhaseGrid::symmetric(512, HbarContext::unit()).unwrap();
        let r = gaussian_decay_check(&[0.5, 1.0, 2.0], g).unwrap();
        for row in &r.rows {
            assert!((row.product - 1.0).abs() < 1e-6, "{row:?}");
            assert!((row.a - 1.0 / (row.width * row.width)).abs() < 1e-6);
        }
        assert!(r.bound_holds);
        assert!(r.compact_support_defect > 1e-3);
        let not_gauss = oscillator_stargen(2, 0, unit_grid(64)).unwrap();
        assert!(matches!(fit_gaussian_decay(&not_gauss), Err(Error::Unsupported(_))));
    }

    #[test]
    fn injectivity_surrogate() {
        let g = unit_grid(128);
        let t = WindowedTransform::hermite(2, g).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(31);
        let basis: Vec<WaveField> = (0..16).map(|k| hermite_function(k, *g.x_axis(), g.hbar()).unwrap()).collect();
        for _ in 0..4 {
            let mut psi = WaveField::zeros(*g.x_axis());
            for b in &basis {
                psi = psi.add(&b.scale(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).unwrap();
            }
            assert!((t.apply(&psi).unwrap().norm() - psi.norm()).abs() < 1e-8 * psi.norm());
        }
    }

    #[test]
    fn tabulated_and_polynomial_potentials_agree() {
        let g = SpatialGrid::centered(8.0, 128).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| 0.5 * x * x).collect();
        let a = HamiltonianSpec::KineticPotential { potential: Potential::Tabulated { values: v } };
        let b = HamiltonianSpec::KineticPotential { potential: Potential::Polynomial { coeffs: vec![0.0, 0.0, 0.5] } };
        assert_eq!(b.polynomial(), Some(PolynomialSymbol::oscillator()));
        let ea = eigensolve(&a, g, HbarContext::unit(), 4).unwrap();
        let eb = eigensolve(&b, g, HbarContext::unit(), 4).unwrap();
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x.lambda - y.lambda).abs() < 1e-10);
        }
    }
}
