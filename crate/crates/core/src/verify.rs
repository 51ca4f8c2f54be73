//! Invariant suites behind `stargen verify`. Every check reports the
//! measured quantity and its tolerance; output is deterministic.

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{PhaseField, C64};
use crate::fourier::symplectic_fourier;
use crate::grid::{symplectic_form, HbarContext, PhaseGrid, SpatialGrid, SymplecticVector};
use crate::moyal::{bopp_apply, heisenberg_weyl, phase_translate, star_product, star_product_direct, weyl_matrix, PolynomialSymbol};
use crate::special::hermite_function;
use crate::spectral::{
    continuous_spectrum_check, eigen_from_stargen, eigensolve, expand_in_basis, gaussian_decay_check, quadratic_spectrum,
    stargen_from_eigen, stargen_residual, symplectic_j, williamson, ContinuousCase, GaussianProfile, HamiltonianSpec,
    StarGenPair, StarPath, WindowLabel,
};
use crate::wigner::{basis_field, moyal_identity_check, oscillator_stargen, WindowedTransform};

pub const SUITES: [&str; 6] = ["fourier", "wigner", "star", "spectral", "williamson", "decay"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Below,
    Above,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    fn below(suite: &'static str, name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self { suite, name, measured, tolerance, bound: Bound::Below }
    }

    fn above(suite: &'static str, name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self { suite, name, measured, tolerance, bound: Bound::Above }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Below => self.measured < self.tolerance,
            Bound::Above => self.measured > self.tolerance,
        }
    }

    pub fn line(&self) -> String {
        let op = if self.bound == Bound::Below { "<" } else { ">" };
        format!(
            "{} {}/{} measured={:.3e} {op} {:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

pub fn run_suite(name: &str) -> Result<Vec<Check>> {
    match name {
        "fourier" => fourier(),
        "wigner" => wigner(),
        "star" => star(),
        "spectral" => spectral(),
        "williamson" => williamson_suite(),
        "decay" => decay(),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s)?);
            }
            Ok(out)
        }
        other => Err(Error::Config(format!(
            "unknown suite '{other}' (expected one of {}, all)",
            SUITES.join(", ")
        ))),
    }
}

pub fn report(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(s, "{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let _ = writeln!(s, "{} checks, {} failed", checks.len(), failed);
    s
}

fn unit(n: usize) -> Result<PhaseGrid> {
    PhaseGrid::symmetric(n, HbarContext::unit())
}

fn max_diff(a: &PhaseField, b: &PhaseField) -> Result<f64> {
    a.max_abs_diff(b)
}

/// Sum of random Gaussian bumps with random linear phases, decaying to
/// machine zero at the edges of a symmetric grid.
pub fn random_band_limited(grid: PhaseGrid, rng: &mut StdRng, bumps: usize) -> PhaseField {
    let params: Vec<[f64; 6]> = (0..bumps)
        .map(|_| {
            [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.7..1.5),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-1.0..1.0),
            ]
        })
        .collect();
    PhaseField::from_fn(grid, |x, p| {
        params
            .iter()
            .map(|c| {
                let r2 = ((x - c[0]).powi(2) + (p - c[1]).powi(2)) / (c[2] * c[2]);
                C64::from_polar((-r2).exp(), c[3] * x + c[4] * p + c[5])
            })
            .sum()
    })
}

fn fourier() -> Result<Vec<Check>> {
    let g = unit(256)?;
    let mut rng = StdRng::seed_from_u64(101);
    let (mut inv, mut uni) = (0.0f64, 0.0f64);
    for _ in 0..3 {
        let f = random_band_limited(g, &mut rng, 4);
        let once = symplectic_fourier(&f)?;
        let twice = symplectic_fourier(&once)?;
        inv = inv.max(twice.sub(&f)?.norm() / f.norm());
        uni = uni.max((once.norm() - f.norm()).abs() / f.norm());
    }
    Ok(vec![Check::below("fourier", "involution", inv, 1e-12), Check::below("fourier", "unitarity", uni, 1e-12)])
}

fn wigner() -> Result<Vec<Check>> {
    let g = unit(128)?;
    let x = *g.x_axis();
    let h = g.hbar();
    let psis: Vec<_> = (0..6).map(|k| hermite_function(k, x, h)).collect::<Result<_>>()?;

    let t = WindowedTransform::hermite(0, g)?;
    let iso = (t.apply(&psis[3])?.norm() - 1.0).abs();

    let mut moyal = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let (l, r) = moyal_identity_check(&psis[a], &psis[b], &psis[c], &psis[d], g)?;
                    moyal = moyal.max((l - r).norm());
                }
            }
        }
    }

    let basis: Vec<PhaseField> = (0..6)
        .flat_map(|j| (0..6).map(move |k| (j, k)))
        .map(|(j, k)| basis_field(j, k, g))
        .collect::<Result<_>>()?;
    let mut gram = 0.0f64;
    for (a, fa) in basis.iter().enumerate() {
        for (b, fb) in basis.iter().enumerate().skip(a) {
            let want = if a == b { 1.0 } else { 0.0 };
            gram = gram.max((fa.inner(fb)? - want).norm());
        }
    }

    let mut rng = StdRng::seed_from_u64(202);
    let (mut inter, mut rel_a, mut rel_b) = (0.0f64, 0.0f64, 0.0f64);
    let tw = WindowedTransform::hermite(1, g)?;
    let wpsi = tw.apply(&psis[2])?;
    let step = |rng: &mut StdRng| {
        SymplecticVector::new(2.0 * rng.gen_range(-4i32..=4) as f64 * g.dx(), 2.0 * rng.gen_range(-4i32..=4) as f64 * g.dp())
    };
    for _ in 0..5 {
        let z0 = step(&mut rng);
        let lhs = tw.apply(&heisenberg_weyl(z0, &psis[2], h.value())?)?;
        inter = inter.max(max_diff(&lhs, &phase_translate(z0, &wpsi)?)?);
        let z1 = step(&mut rng);
        let s = symplectic_form(z0, z1) / h.value();
        let t01 = phase_translate(z0, &phase_translate(z1, &wpsi)?)?;
        let t10 = phase_translate(z1, &phase_translate(z0, &wpsi)?)?;
        let sum = phase_translate(z0 + z1, &wpsi)?;
        rel_a = rel_a.max(max_diff(&sum, &t01.scale(C64::from_polar(1.0, -s / 2.0)))?);
        rel_b = rel_b.max(max_diff(&t10, &t01.scale(C64::from_polar(1.0, -s)))?);
    }

    Ok(vec![
        Check::below("wigner", "isometry", iso, 1e-10),
        Check::below("wigner", "moyal_identity", moyal, 1e-8),
        Check::below("wigner", "basis_gram", gram, 1e-8),
        Check::below("wigner", "intertwining", inter, 1e-8),
        Check::below("wigner", "translation_sum", rel_a, 1e-12),
        Check::below("wigner", "translation_commutation", rel_b, 1e-12),
    ])
}

fn star() -> Result<Vec<Check>> {
    let g16 = unit(16)?;
    let bump = |g: PhaseGrid, x0: f64, p0: f64, w: f64, k: f64| {
        PhaseField::from_fn(g, move |x, p| C64::from_polar((-((x - x0).powi(2) + (p - p0).powi(2)) / (2.0 * w * w)).exp(), k * x))
    };
    let (a, b) = (bump(g16, 0.3, -0.2, 1.0, 0.4), bump(g16, -0.4, 0.1, 0.8, -0.3));
    let fast = star_product(&a, &b)?;
    let direct = star_product_direct(&a, &b)?;
    let quad = max_diff(&fast, &direct)? / direct.max_abs();

    let g = unit(64)?;
    let xf = PhaseField::from_real_fn(g, |x, _| x);
    let pf = PhaseField::from_real_fn(g, |_, p| p);
    let comm = star_product(&xf, &pf)?.sub(&star_product(&pf, &xf)?)?;
    let ccr = max_diff(&comm, &PhaseField::constant(g, C64::new(0.0, 1.0)))?;

    let (a, b) = (bump(g, 0.5, 0.2, 1.2, 0.3), bump(g, -0.3, 0.6, 0.8, -0.5));
    let lhs = weyl_matrix(&star_product(&a, &b)?)?;
    let rhs = weyl_matrix(&a)?.compose(&weyl_matrix(&b)?)?;
    let scale = rhs.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let hom = (lhs.values() - rhs.values()).iter().map(|v| v.norm()).fold(0.0, f64::max) / scale;

    let g = unit(128)?;
    let hs = PolynomialSymbol::oscillator();
    let hf = hs.sample(g)?;
    let (mut via_star, mut via_bopp) = (0.0f64, 0.0f64);
    for j in 0..=2 {
        for k in 0..=2 {
            let psi = oscillator_stargen(j, k, g)?;
            let lam = C64::new(j as f64 + 0.5, 0.0);
            via_star = via_star.max(star_product(&hf, &psi)?.sub(&psi.scale(lam))?.norm() / psi.norm());
            via_bopp = via_bopp.max(bopp_apply(&hs, &psi)?.sub(&psi.scale(lam))?.norm() / psi.norm());
        }
    }

    Ok(vec![
        Check::below("star", "fft_vs_direct", quad, 1e-6),
        Check::below("star", "canonical_commutator", ccr, 1e-10),
        Check::below("star", "weyl_homomorphism", hom, 1e-6),
        Check::below("star", "stargenvalue_star", via_star, 1e-6),
        Check::below("star", "stargenvalue_bopp", via_bopp, 1e-6),
    ])
}

fn spectral() -> Result<Vec<Check>> {
    let h = HamiltonianSpec::oscillator();
    let xg = SpatialGrid::centered(10.0, 256)?;
    let pairs = eigensolve(&h, xg, HbarContext::unit(), 8)?;
    let eig = pairs.iter().enumerate().map(|(k, p)| (p.lambda - (k as f64 + 0.5)).abs()).fold(0.0, f64::max);

    let g = unit(128)?;
    let pairs = eigensolve(&h, *g.x_axis(), g.hbar(), 3)?;
    let (mut psi_err, mut lam_err, mut resid) = (0.0f64, 0.0f64, 0.0f64);
    for pair in &pairs {
        for l in 0..=2 {
            let t = WindowedTransform::hermite(l, g)?;
            let sg = stargen_from_eigen(pair, &t, WindowLabel::Hermite(l))?;
            resid = resid.max(stargen_residual(&h, &sg, StarPath::Auto)?);
            let back = eigen_from_stargen(&sg, &t, &h)?;
            let phase = back.psi.inner(&pair.psi)?;
            let aligned = back.psi.scale(phase.conj() / phase.norm());
            psi_err = psi_err.max(aligned.max_abs_diff(&pair.psi)?);
            lam_err = lam_err.max((back.lambda - pair.lambda).abs());
        }
    }

    let mut cross = 0.0f64;
    for j in 0..=2 {
        let sg = StarGenPair { lambda: j as f64 + 0.5, psi: oscillator_stargen(j, 1, g)?, window: WindowLabel::Hermite(1) };
        cross = cross.max(expand_in_basis(&sg.psi, j, 5)?.cross_energy);
    }

    let mut cont = 0.0f64;
    let g64 = unit(64)?;
    for e in [-1.0, 0.0, 1.0, 2.5] {
        for case in [ContinuousCase::Momentum, ContinuousCase::Position] {
            cont = cont.max(continuous_spectrum_check(case, e, GaussianProfile::default(), g64, false));
        }
    }
    let flipped = continuous_spectrum_check(ContinuousCase::Momentum, 1.0, GaussianProfile::default(), g64, true);

    Ok(vec![
        Check::below("spectral", "oscillator_eigenvalues", eig, 1e-8),
        Check::below("spectral", "stargen_residual", resid, 1e-6),
        Check::below("spectral", "round_trip_state", psi_err, 1e-7),
        Check::below("spectral", "round_trip_eigenvalue", lam_err, 1e-6),
        Check::below("spectral", "expansion_cross_energy", cross, 1e-8),
        Check::below("spectral", "continuous_closed_forms", cont, 1e-12),
        Check::above("spectral", "continuous_wrong_sign_detected", flipped, 1e-3),
    ])
}

/// Random symmetric positive-definite `2n×2n` matrix `AAᵀ + I/2`.
pub fn random_spd(n: usize, rng: &mut StdRng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(2 * n, 2 * n, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(2 * n, 2 * n) * 0.5
}

fn williamson_suite() -> Result<Vec<Check>> {
    let mut rng = StdRng::seed_from_u64(303);
    let (mut sympl, mut recon, mut omega, mut spacing) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..100 {
        let n = 1 + i % 3;
        let m = random_spd(n, &mut rng);
        let dec = williamson(&m)?;
        let j = symplectic_j(n);
        let s = &dec.s;
        sympl = sympl.max((s.transpose() * &j * s - &j).amax());
        recon = recon.max((s.transpose() * dec.d() * s - &m).amax() / m.amax());
        let mut im: Vec<f64> = (&j * &m).complex_eigenvalues().iter().map(|c| c.im).filter(|v| *v > 0.0).collect();
        im.sort_by(f64::total_cmp);
        if im.len() != n {
            omega = f64::INFINITY;
            continue;
        }
        for (a, b) in im.iter().zip(&dec.omegas) {
            omega = omega.max((a - b).abs());
        }
        let mut idx = vec![vec![0; n]];
        for k in 0..n {
            let mut v = vec![0; n];
            v[k] = 1;
            idx.push(v);
        }
        let lam = quadratic_spectrum(&m, &idx, HbarContext::unit())?;
        for k in 0..n {
            spacing = spacing.max((lam[k + 1] - lam[0] - dec.omegas[k]).abs());
        }
    }
    Ok(vec![
        Check::below("williamson", "symplectic", sympl, 1e-10),
        Check::below("williamson", "reconstruction", recon, 1e-10),
        Check::below("williamson", "symplectic_eigenvalues", omega, 1e-10),
        Check::below("williamson", "spectrum_spacing", spacing, 1e-10),
    ])
}

fn decay() -> Result<Vec<Check>> {
    let r = gaussian_decay_check(&[0.5, 1.0, 2.0], unit(512)?)?;
    let dev = r.rows.iter().map(|row| (row.product - 1.0).abs()).fold(0.0, f64::max);
    let worst = r.rows.iter().map(|row| row.product).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        Check::below("decay", "gaussian_product", dev, 1e-6),
        Check::below("decay", "hardy_bound_excess", worst - 1.0, 1e-9),
        Check::above("decay", "compact_support_not_in_range", r.compact_support_defect, 1e-3),
    ])
}
