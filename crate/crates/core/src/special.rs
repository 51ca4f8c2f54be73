//! Hermite and Laguerre machinery: oscillator eigenfunctions and the
//! Laguerre closed form of the oscillator star-genfunctions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{PhaseField, WaveField, C64};
use crate::grid::{HbarContext, PhaseGrid, SpatialGrid};

/// Largest Hermite or Laguerre index accepted by the grid-level functions.
pub const MAX_INDEX: usize = 64;

/// Ratio between the Laguerre closed form as printed and the cross-Wigner
/// transform it represents. Measured with [`crate::wigner::laguerre_calibration`];
/// identical for every `(j, k)`.
pub const LAGUERRE_CALIBRATION: f64 = 0.398_942_280_401_432_7; // 1/sqrt(2π)

fn check_index(name: &str, k: usize) -> Result<()> {
    if k > MAX_INDEX {
        return Err(Error::Domain(format!("{name} = {k} exceeds the supported maximum {MAX_INDEX}")));
    }
    Ok(())
}

/// Physicists' Hermite polynomial `H_k(x)`.
pub fn hermite_poly(k: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if k == 0 {
        return h0;
    }
    for i in 1..k {
        let h2 = 2.0 * x * h1 - 2.0 * i as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Generalized Laguerre polynomial `L_j^k(x)`, `x ≥ 0`.
pub fn laguerre_poly(j: usize, k: usize, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("Laguerre argument must be non-negative, got {x}")));
    }
    let kf = k as f64;
    let (mut l0, mut l1) = (1.0, 1.0 + kf - x);
    if j == 0 {
        return Ok(l0);
    }
    for i in 1..j {
        let fi = i as f64;
        let l2 = ((2.0 * fi + kf + 1.0 - x) * l1 - (fi + kf) * l0) / (fi + 1.0);
        l0 = l1;
        l1 = l2;
    }
    Ok(l1)
}

/// Normalized Hermite function `ψ_k` at ħ = 1, by the orthonormal
/// three-term recurrence (no factorials, no overflow).
pub fn hermite_function_value(k: usize, x: f64) -> f64 {
    let mut a = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if k == 0 {
        return a;
    }
    let mut b = 2f64.sqrt() * x * a;
    for i in 1..k {
        let fi = i as f64;
        let c = (2.0 / (fi + 1.0)).sqrt() * x * b - (fi / (fi + 1.0)).sqrt() * a;
        a = b;
        b = c;
    }
    b
}

/// `ψ_k^ħ(x) = ħ^{-1/4} ψ_k(x/√ħ)` sampled on `grid`.
pub fn hermite_function(k: usize, grid: SpatialGrid, hbar: HbarContext) -> Result<WaveField> {
    check_index("Hermite index", k)?;
    let h = hbar.value();
    let scale = h.powf(-0.25);
    let s = h.sqrt();
    Ok(WaveField::from_real_fn(grid, |x| scale * hermite_function_value(k, x / s)))
}

/// Laguerre closed form of the oscillator star-genfunction `W_{ψ_j}ψ_{j+k}`
/// (window `ψ_j`) at ħ = 1:
/// `c·(−1)^j √(j!/(j+k)!) 2^{k/2+1} ζ̄^k L_j^k(2|z|²) e^{−|z|²}`, `ζ = x + ip`.
pub fn laguerre_wigner(j: usize, k: usize, grid: PhaseGrid) -> Result<PhaseField> {
    check_index("Laguerre degree", j)?;
    check_index("Laguerre order", k)?;
    if (grid.hbar().value() - 1.0).abs() > 1e-12 {
        return Err(Error::Unsupported(format!(
            "the Laguerre closed form is only available at hbar = 1, got {}",
            grid.hbar().value()
        )));
    }
    let mut pref = LAGUERRE_CALIBRATION * 2f64.powf(k as f64 / 2.0 + 1.0);
    for i in j + 1..=j + k {
        pref /= (i as f64).sqrt();
    }
    if j % 2 == 1 {
        pref = -pref;
    }
    let mut vals = Vec::with_capacity(grid.nx() * grid.np());
    for jx in 0..grid.nx() {
        let x = grid.x_axis().point(jx);
        for kp in 0..grid.np() {
            let p = grid.p_axis().point(kp);
            let r2 = x * x + p * p;
            let lag = laguerre_poly(j, k, 2.0 * r2)?;
            let zeta_bar = C64::new(x, -p).powu(k as u32);
            vals.push(zeta_bar * (pref * lag * (-r2).exp()));
        }
    }
    Ok(PhaseField::from_parts(grid, vals))
}

/// Conjugate partner `W_{ψ_{j+k}}ψ_j = conj(W_{ψ_j}ψ_{j+k})`.
pub fn laguerre_wigner_conj(j: usize, k: usize, grid: PhaseGrid) -> Result<PhaseField> {
    Ok(laguerre_wigner(j, k, grid)?.conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    // e^{-x²}·P(x) differentiated k times; returns P.
    fn hermite_rodrigues(k: usize) -> Vec<f64> {
        let mut p = vec![1.0];
        for _ in 0..k {
            let mut q = vec![0.0; p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                if i > 0 {
                    q[i - 1] += i as f64 * c;
                }
                q[i + 1] -= 2.0 * c;
            }
            p = q;
        }
        if k % 2 == 1 {
            p.iter_mut().for_each(|c| *c = -*c);
        }
        p
    }

    // x^{-k} e^{x} (d/dx)^j (e^{-x} x^{j+k}) / j!
    fn laguerre_rodrigues(j: usize, k: usize) -> Vec<f64> {
        let mut q = vec![0.0; j + k + 1];
        q[j + k] = 1.0;
        for _ in 0..j {
            let mut r = vec![0.0; q.len()];
            for (i, c) in q.iter().enumerate() {
                if i > 0 {
                    r[i - 1] += i as f64 * c;
                }
                r[i] -= c;
            }
            q = r;
        }
        let fact: f64 = (1..=j).map(|i| i as f64).product();
        assert!(q[..k].iter().all(|c| *c == 0.0));
        q[k..].iter().map(|c| c / fact).collect()
    }

    fn horner(c: &[f64], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, v| acc * x + v)
    }

    #[test]
    fn recurrences_match_rodrigues() {
        for k in 0..=8 {
            let hp = hermite_rodrigues(k);
            for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let (a, b) = (hermite_poly(k, x), horner(&hp, x));
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "H_{k}({x})");
            }
            for j in 0..=8 {
                let lp = laguerre_rodrigues(j, k);
                for x in [0.0, 0.5, 1.0, 2.0, 4.0] {
                    let (a, b) = (laguerre_poly(j, k, x).unwrap(), horner(&lp, x));
                    assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "L_{j}^{k}({x})");
                }
            }
        }
    }

    #[test]
    fn small_values() {
        assert_eq!(hermite_poly(0, 3.7), 1.0);
        assert_eq!(hermite_poly(1, 0.5), 1.0);
        assert_eq!(hermite_poly(2, 1.0), 2.0);
        assert_eq!(laguerre_poly(0, 3, 1.7).unwrap(), 1.0);
        assert_eq!(laguerre_poly(1, 0, 2.0).unwrap(), -1.0);
        assert_eq!(laguerre_poly(1, 1, 1.0).unwrap(), 1.0);
        assert!(matches!(laguerre_poly(2, 0, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let g = SpatialGrid::centered(10.0, 512).unwrap();
        assert!((hermite_function_value(0, 0.0) - 0.751_125_544_464_942_5).abs() < 1e-15);
        for hb in [1.0, 0.3] {
            let h = HbarContext::new(hb).unwrap();
            let fs: Vec<_> = (0..=10).map(|k| hermite_function(k, g, h).unwrap()).collect();
            for (a, fa) in fs.iter().enumerate() {
                for (b, fb) in fs.iter().enumerate() {
                    let ip = fa.inner(fb).unwrap();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-10, "({a}|{b}) at hbar {hb}: {ip}");
                }
            }
        }
        // closed form at hbar = 1 for moderate k
        let norm = |k: usize| {
            let f: f64 = (1..=k).map(|i| i as f64).product();
            (2f64.powi(k as i32) * f * PI.sqrt()).powf(-0.5)
        };
        for k in 0..=12 {
            for x in [-2.5f64, -0.3, 0.0, 1.1, 3.0] {
                let want = norm(k) * (-0.5 * x * x).exp() * hermite_poly(k, x);
                assert!((hermite_function_value(k, x) - want).abs() < 1e-12);
            }
        }
        assert!(hermite_function(65, g, HbarContext::unit()).is_err());
        assert!(hermite_function_value(60, 3.0).is_finite());
    }

    #[test]
    fn laguerre_form_requires_unit_hbar() {
        let g = PhaseGrid::symmetric(16, HbarContext::new(0.5).unwrap()).unwrap();
        assert!(matches!(laguerre_wigner(0, 0, g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn ground_state_closed_form() {
        let g = PhaseGrid::symmetric(64, HbarContext::unit()).unwrap();
        let f = laguerre_wigner(0, 0, g).unwrap();
        let want = PhaseField::from_real_fn(g, |x, p| (2.0 / PI).sqrt() * (-(x * x + p * p)).exp());
        assert!(f.max_abs_diff(&want).unwrap() < 1e-15);
        let c = laguerre_wigner_conj(1, 2, g).unwrap();
        let d = laguerre_wigner(1, 2, g).unwrap();
        assert!(c.max_abs_diff(&d.conj()).unwrap() == 0.0);
    }
}
