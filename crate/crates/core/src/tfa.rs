//! Fourier, symplectic Fourier, short-time Fourier and A-Wigner transforms.

use crate::calculus::{self, Quantization};
use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{Domain, Interpolator, SampledFunction, SampledSymbol};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

fn require_self_dual(dom: &Domain) -> Result<()> {
    if dom.axis.is_self_dual() {
        Ok(())
    } else {
        Err(Error::Grid("Fourier transforms need a self-dual grid (h = sqrt(2π/N)); dual nodes are undefined".into()))
    }
}

fn transform(f: &SampledFunction, dir: Direction) -> Result<SampledFunction> {
    let dom = *f.domain();
    require_self_dual(&dom)?;
    let mut v = f.values().to_vec();
    let axes: Vec<usize> = (0..dom.ndim).collect();
    fft::centered_dft(&mut v, &dom.shape(), &axes, dir);
    SampledFunction::from_values(dom, v)
}

/// (2π)^{-d/2} ∫ f(x) e^{-i⟨x,ξ⟩} dx at the (identical) dual nodes; unitary on the grid.
pub fn fourier(f: &SampledFunction) -> Result<SampledFunction> {
    transform(f, Direction::Forward)
}

pub fn inverse_fourier(f: &SampledFunction) -> Result<SampledFunction> {
    transform(f, Direction::Inverse)
}

fn phase_dims(a: &SampledSymbol) -> Result<(usize, usize)> {
    let dom = a.domain();
    if dom.ndim == 0 || dom.ndim % 2 != 0 {
        return Err(Error::GridMismatch(format!("expected a phase-space symbol, got dimension {}", dom.ndim)));
    }
    require_self_dual(dom)?;
    Ok((dom.n(), dom.ndim / 2))
}

/// Symplectic Fourier transform F_σ a(X) = π^{-d} ∫ a(Y) e^{2iσ(X,Y)} dY,
/// σ(X,Y) = ⟨y,ξ⟩ - ⟨x,η⟩.
///
/// Sampled on the self-dual grid the kernel e^{2iσ} is not invertible (it
/// doubles frequency indices), so the grid version uses the operator identity
/// Op^w(a)·Π = Op^w((F_σ a)ˇ) with Π f(x) = f(-x): F_σ a is the reflected Weyl
/// symbol of Op^w(a)Π. This is an exact unitary involution on grid data and
/// agrees with the integral for symbols resolved on the central half-grid.
/// Equivalently F_σ a(X) = 2^d [T∘(F⊗F^{-1}) a](-2X).
pub fn symplectic_fourier(a: &SampledSymbol) -> Result<SampledSymbol> {
    let (n, d) = phase_dims(a)?;
    let weyl = Quantization::weyl(d);
    let kn = Quantization::kohn_nirenberg(d);
    let a0 = calculus::change_quantization_raw(a.values(), n, d, &weyl, &kn);
    let m = calculus::kn_matrix(&a0, n, d);
    let perm = calculus::parity_permutation(n, d);
    let mp = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, perm[j])]);
    let s0 = calculus::kn_symbol(&mp, n, d);
    let s = calculus::change_quantization_raw(&s0, n, d, &kn, &weyl);
    Ok(SampledFunction::from_values(*a.domain(), s)?.reflect())
}

/// STFT V_φ f(x_j, ξ_k) = (2π)^{-d/2} h^d Σ_y f(y) conj(φ(y - x_j)) e^{-i⟨y,ξ_k⟩},
/// one centred FFT per time shift, window wrapped periodically. Both inputs
/// must respect the grid's aliasing budget.
pub fn stft(f: &SampledFunction, window: &SampledFunction) -> Result<SampledSymbol> {
    f.domain().ensure_same(window.domain(), "stft")?;
    if window.sup_norm() == 0.0 {
        return Err(Error::InvalidArgument("STFT window is identically zero".into()));
    }
    f.check_alias_budget("stft input")?;
    window.check_alias_budget("stft window")?;
    stft_unchecked(f, window)
}

/// [`stft`] without the aliasing-budget check (used for grid deltas).
pub fn stft_unchecked(f: &SampledFunction, window: &SampledFunction) -> Result<SampledSymbol> {
    let dom = *f.domain();
    require_self_dual(&dom)?;
    let n = dom.n();
    let d = dom.ndim;
    let nd = dom.len();
    let shape = dom.shape();
    let axes: Vec<usize> = (0..d).collect();
    let fv = f.values();
    let wv: Vec<C64> = window.values().iter().map(|v| v.conj()).collect();
    let rows: Vec<Vec<C64>> = (0..nd)
        .into_par_iter()
        .map(|j| {
            let mj = dom.multi_index(j);
            let mut g: Vec<C64> = (0..nd)
                .map(|y| {
                    let my = dom.multi_index(y);
                    // node of y - x_j wrapped: index (y - j + N/2) mod N per axis
                    let w: Vec<usize> = my.iter().zip(&mj).map(|(&a, &b)| (a + n + n / 2 - b) % n).collect();
                    fv[y] * wv[dom.flat_index(&w)]
                })
                .collect();
            fft::centered_dft(&mut g, &shape, &axes, Direction::Forward);
            g
        })
        .collect();
    SampledFunction::from_values(Domain::new(dom.axis, 2 * d), rows.concat())
}

/// A-Wigner distribution
/// W^A_{f1,f2}(x,ξ) = (2π)^{-d/2} ∫ f1(x + Ay) conj(f2(x - (I-A)y)) e^{-i⟨y,ξ⟩} dy.
///
/// The y-integral runs over an extended grid of 2N nodes per axis (spacing h)
/// so the integrand is not truncated; off-grid values come from the analytic
/// evaluators when present, otherwise from band-limited interpolation (zero
/// outside the grid box).
pub fn wigner(f1: &SampledFunction, f2: &SampledFunction, a: &Quantization) -> Result<SampledSymbol> {
    f1.domain().ensure_same(f2.domain(), "wigner")?;
    let dom = *f1.domain();
    require_self_dual(&dom)?;
    let d = dom.ndim;
    if a.d() != d {
        return Err(Error::InvalidArgument(format!("quantization is {}×{} but the functions live on ℝ^{d}", a.d(), a.d())));
    }
    if a.entries().iter().any(|v| v.abs() > 2.0) {
        return Err(Error::InvalidArgument("quantization entries must lie in [-2, 2]".into()));
    }
    let n = dom.n();
    let h = dom.h();
    let m = 2 * n;
    let ext = Domain::new(crate::grid::Grid1D::new(m, crate::grid::GridMode::Custom(h))?, d);
    let ext_len = ext.len();
    let ext_shape = ext.shape();
    let axes: Vec<usize> = (0..d).collect();
    let i1 = (!f1.has_analytic()).then(|| Interpolator::new(f1));
    let i2 = (!f2.has_analytic()).then(|| Interpolator::new(f2));
    let ev = |f: &SampledFunction, it: &Option<Interpolator>, p: &[f64]| match it {
        Some(it) => it.eval(p),
        None => f.eval(p),
    };
    let ys: Vec<Vec<f64>> = (0..ext_len).map(|i| ext.point(i)).collect();
    let ay: Vec<Vec<f64>> = ys.iter().map(|y| a.apply(y)).collect();
    let scale = (2.0 * PI).powf(-(d as f64) / 2.0) * h.powi(d as i32);
    let nd = dom.len();
    let rows: Vec<Vec<C64>> = (0..nd)
        .into_par_iter()
        .map(|j| {
            let x = dom.point(j);
            let mut p1 = vec![0.0; d];
            let mut p2 = vec![0.0; d];
            let mut g: Vec<C64> = (0..ext_len)
                .map(|k| {
                    for i in 0..d {
                        p1[i] = x[i] + ay[k][i];
                        p2[i] = x[i] - (ys[k][i] - ay[k][i]);
                    }
                    ev(f1, &i1, &p1) * ev(f2, &i2, &p2).conj()
                })
                .collect();
            fft::fft_axes(&mut g, &ext_shape, &axes, Direction::Forward);
            // ξ_k = (k - N/2)h corresponds to frequency index 2(k - N/2) mod 2N
            (0..nd)
                .map(|k| {
                    let mk = dom.multi_index(k);
                    let q: Vec<usize> = mk.iter().map(|&kk| (2 * kk + m - n) % m).collect();
                    g[ext.flat_index(&q)] * scale
                })
                .collect()
        })
        .collect();
    SampledFunction::from_values(Domain::new(dom.axis, 2 * d), rows.concat())
}

/// Cross-Wigner distribution (A = I/2).
pub fn cross_wigner(f1: &SampledFunction, f2: &SampledFunction) -> Result<SampledSymbol> {
    wigner(f1, f2, &Quantization::weyl(f1.domain().ndim))
}

/// Grid-aligned time–frequency shift: g(x) = e^{i⟨b,x⟩} f(x - a) with a, b given in node steps.
pub fn time_frequency_shift(f: &SampledFunction, shift: &[i64], modulation: &[i64]) -> Result<SampledFunction> {
    let dom = *f.domain();
    if modulation.len() != dom.ndim {
        return Err(Error::InvalidArgument("modulation has the wrong dimension".into()));
    }
    let g = f.translate(shift)?;
    let h = dom.h();
    let b: Vec<f64> = modulation.iter().map(|&k| k as f64 * h).collect();
    let mut p = vec![0.0; dom.ndim];
    let values = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            dom.point_into(i, &mut p);
            v * C64::from_polar(1.0, p.iter().zip(&b).map(|(x, y)| x * y).sum())
        })
        .collect();
    SampledFunction::from_values(dom, values)
}

/// Spectral derivative ∂^α f (centred DFT, multiply by (iη)^α, invert) together
/// with the relative spectral tail of (iη)^α f̂ in the band |η|_∞ > 3L/4.
/// Odd-order derivatives zero the Nyquist coefficient.
pub fn spectral_derivative(f: &SampledFunction, alpha: &[usize]) -> Result<(SampledFunction, f64)> {
    let dom = *f.domain();
    if alpha.len() != dom.ndim {
        return Err(Error::InvalidArgument(format!("multi-index has length {} but the data has {} axes", alpha.len(), dom.ndim)));
    }
    let n = dom.n();
    let dk = 2.0 * PI / (n as f64 * dom.h());
    let shape = dom.shape();
    let axes: Vec<usize> = (0..dom.ndim).collect();
    let mut v = f.values().to_vec();
    fft::centered_dft(&mut v, &shape, &axes, Direction::Forward);
    let mut peak = 0.0f64;
    let mut tail = 0.0f64;
    for (i, val) in v.iter_mut().enumerate() {
        let mi = dom.multi_index(i);
        let mut factor = C64::new(1.0, 0.0);
        for (&k, &a) in mi.iter().zip(alpha) {
            if a == 0 {
                continue;
            }
            if k == 0 && a % 2 == 1 {
                factor = C64::new(0.0, 0.0);
                break;
            }
            factor *= C64::new(0.0, (k as f64 - (n / 2) as f64) * dk).powu(a as u32);
        }
        *val *= factor;
        let m = val.norm();
        peak = peak.max(m);
        if dom.is_tail(i) {
            tail = tail.max(m);
        }
    }
    fft::centered_dft(&mut v, &shape, &axes, Direction::Inverse);
    let ratio = if peak > 0.0 { tail / peak } else { 0.0 };
    Ok((SampledFunction::from_values(dom, v)?, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use crate::grid::{make_grid, GridMode};

    #[test]
    fn gaussian_is_fourier_invariant() {
        let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
        let f = SampledFunction::from_real_fn(g.config(), |p| (-p[0] * p[0] / 2.0).exp());
        let ff = fourier(&f).unwrap();
        for (a, b) in ff.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn translation_becomes_modulation() {
        let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
        let f = SampledFunction::from_real_fn(g.config(), |p| (-(p[0] - 1.0).powi(2) / 2.0).exp());
        let ff = fourier(&f).unwrap();
        for (k, v) in ff.values().iter().enumerate() {
            let xi = g.axis().node(k);
            let want = C64::from_polar((-xi * xi / 2.0).exp(), -xi);
            assert!((v - want).norm() < 1e-10);
        }
    }

    #[test]
    fn non_self_dual_grid_is_rejected() {
        let g = make_grid(64, 1, GridMode::Custom(0.25)).unwrap();
        let f = SampledFunction::zeros(g.config());
        assert!(fourier(&f).is_err());
    }

    #[test]
    fn stft_zero_window_is_an_error() {
        let g = make_grid(32, 1, GridMode::SelfDual).unwrap();
        let f = functions::standard_gaussian(g.config());
        assert!(stft(&f, &SampledFunction::zeros(g.config())).is_err());
        let wide = SampledFunction::from_real_fn(g.config(), |p| (-p[0] * p[0] / 50.0).exp());
        assert!(matches!(stft(&wide, &f), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn wigner_rejects_large_stretch() {
        let g = make_grid(32, 1, GridMode::SelfDual).unwrap();
        let f = functions::standard_gaussian(g.config());
        assert!(wigner(&f, &f, &Quantization::scalar(2.5, 1)).is_err());
    }
}
