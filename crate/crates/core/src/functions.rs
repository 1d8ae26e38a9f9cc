//! Standard test functions, windows and smooth cutoffs.

use crate::grid::{Domain, SampledFunction};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// L²-normalised Gaussian π^{-d/4} e^{-|x|²/2}: the default window.
pub fn standard_gaussian(dom: Domain) -> SampledFunction {
    gaussian_window(dom, 1.0)
}

/// L²-normalised Gaussian of width w: (πw²)^{-d/4} e^{-|x|²/(2w²)}.
pub fn gaussian_window(dom: Domain, w: f64) -> SampledFunction {
    let d = dom.ndim as f64;
    let amp = (PI * w * w).powf(-d / 4.0);
    SampledFunction::from_real_fn(dom, move |p| amp * (-norm_sqr(p) / (2.0 * w * w)).exp())
        .with_label(format!("gaussian(w={w})"))
}

/// Normalised coherent state π^{-d/4} e^{-|x - x0|²/2} e^{i⟨ξ0, x⟩}.
pub fn coherent_state(dom: Domain, x0: &[f64], xi0: &[f64]) -> SampledFunction {
    let d = dom.ndim as f64;
    let amp = PI.powf(-d / 4.0);
    let (x0, xi0) = (x0.to_vec(), xi0.to_vec());
    let label = format!("coherent(x0={x0:?}, xi0={xi0:?})");
    SampledFunction::from_fn(dom, move |p| {
        let r2: f64 = p.iter().zip(&x0).map(|(a, b)| (a - b) * (a - b)).sum();
        let ph: f64 = p.iter().zip(&xi0).map(|(a, b)| a * b).sum();
        C64::from_polar(amp * (-r2 / 2.0).exp(), ph)
    })
    .with_label(label)
}

/// Normalised Hermite function h_k(t) by the stable three-term recurrence.
pub fn hermite_value(k: usize, t: f64) -> f64 {
    let mut h0 = PI.powf(-0.25) * (-t * t / 2.0).exp();
    if k == 0 {
        return h0;
    }
    let mut h1 = 2f64.sqrt() * t * h0;
    for j in 1..k {
        let h2 = (2.0 / (j as f64 + 1.0)).sqrt() * t * h1 - (j as f64 / (j as f64 + 1.0)).sqrt() * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Tensor-product Hermite function h_{k_1}(x_1)···h_{k_d}(x_d).
pub fn hermite_function(dom: Domain, k: &[usize]) -> SampledFunction {
    let k = k.to_vec();
    let label = format!("hermite{k:?}");
    SampledFunction::from_real_fn(dom, move |p| p.iter().zip(&k).map(|(&t, &kk)| hermite_value(kk, t)).product())
        .with_label(label)
}

/// First `count` Hermite functions along the first coordinate (times h_0 in the others).
pub fn hermite_ensemble(dom: Domain, count: usize) -> Vec<SampledFunction> {
    (0..count)
        .map(|k| {
            let mut idx = vec![0; dom.ndim];
            idx[0] = k;
            hermite_function(dom, &idx)
        })
        .collect()
}

/// Phase-space Gaussian amp·e^{-Σ λ_i X_i²}.
pub fn anisotropic_gaussian(dom: Domain, lambda: Vec<f64>, amp: f64) -> SampledFunction {
    SampledFunction::from_real_fn(dom, move |p| amp * (-p.iter().zip(&lambda).map(|(x, l)| l * x * x).sum::<f64>()).exp())
}

/// Shifted Gaussian bump amp·e^{-|X - X0|²/(2w²)} with complex amplitude.
pub fn gaussian_bump(dom: Domain, center: Vec<f64>, w: f64, amp: C64) -> SampledFunction {
    SampledFunction::from_fn(dom, move |p| {
        let r2: f64 = p.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
        amp * (-r2 / (2.0 * w * w)).exp()
    })
}

pub fn norm_sqr(p: &[f64]) -> f64 {
    p.iter().map(|v| v * v).sum()
}

/// Smooth plateau χ(u) = ½[erf((u + R)/w) - erf((u - R)/w)]: ≈1 for |u| < R - 3w, ≈0 beyond R + 3w.
pub fn plateau(u: f64, r: f64, w: f64) -> f64 {
    0.5 * (libm::erf((u + r) / w) - libm::erf((u - r) / w))
}

/// Periodised plateau Σ_k χ(u + 2kL) over the nearest images, so that the
/// cutoff is smooth on the torus [-L, L).
pub fn periodic_plateau(u: f64, r: f64, w: f64, l: f64) -> f64 {
    (-2..=2).map(|k| plateau(u + 2.0 * k as f64 * l, r, w)).sum()
}

/// Standard phase-space cutoff: product of periodised plateaus with R = 3L/4 and w = L/10.
/// Equal to 1 to within 1e-9 for |X|_∞ ≤ L/4 and 2.1e-4 at the edge of the central
/// half-grid; about 4e-4 at the seam ±L. A sharper profile would alias at N ≤ 64.
pub fn central_cutoff(p: &[f64], l: f64) -> f64 {
    p.iter().map(|&u| periodic_plateau(u, 0.75 * l, l / 10.0, l)).product()
}

/// Periodic smooth version of the coordinate function u on [-L, L): equal to u
/// (up to e^{-L²/4}-size terms) away from the seam at ±L, where it turns over
/// through an erf profile of width σ.
pub fn periodic_linear(u: f64, l: f64, sigma: f64) -> f64 {
    let s = 2f64.sqrt() * sigma;
    u - l * (1.0 + libm::erf((u - l) / s)) - l * (libm::erf((u + l) / s) - 1.0)
}

/// χ(X)·ω(P(X)) with χ the central cutoff and P the coordinatewise periodic
/// linear map (σ = 1/√2): equals ω on the central half-grid to the cutoff's
/// accuracy and, unlike χ·ω, has no derivative jump at the seam ±L.
pub fn windowed_weight(dom: Domain, omega: &crate::weights::Weight) -> SampledFunction {
    let l = dom.axis.half_width();
    let w = omega.clone();
    let sigma = 0.5f64.sqrt();
    SampledFunction::from_fn(dom, move |p| {
        let q: Vec<f64> = p.iter().map(|&u| periodic_linear(u, l, sigma)).collect();
        C64::new(central_cutoff(p, l) * w.eval(&q), 0.0)
    })
    .with_label(format!("windowed {}", omega.label()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridMode};

    #[test]
    fn hermite_functions_are_orthonormal() {
        let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
        let hs = hermite_ensemble(g.config(), 6);
        for i in 0..6 {
            for j in 0..6 {
                let ip = hs[i].inner(&hs[j]).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-10, "{i} {j} {ip}");
            }
        }
    }

    #[test]
    fn cutoff_is_one_on_central_half() {
        let l = 10.0;
        for u in [-2.5, -1.0, 0.0, 2.0, 2.5] {
            assert!((central_cutoff(&[u, -u], l) - 1.0).abs() < 1e-9);
        }
        assert!((central_cutoff(&[5.0, 0.0], l) - 1.0).abs() < 2.1e-4);
        assert!(central_cutoff(&[9.99, 0.0], l) < 5e-4);
    }

    #[test]
    fn periodic_linear_is_linear_in_the_middle() {
        let l = (64.0 * 2.0 * PI).sqrt() / 2.0;
        for u in [-5.0, -1.0, 0.0, 2.5, 5.0] {
            assert!((periodic_linear(u, l, 0.5f64.sqrt()) - u).abs() < 1e-10);
        }
    }
}
