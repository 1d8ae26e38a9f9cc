//! Weyl product and twisted convolution.
//!
//! The matrix route (compose the quantized operators, read back the symbol) is
//! the production path. The direct twisted convolution is an independent
//! O(N^{4d}) quadrature used as its oracle.

use crate::calculus::Quantization;
use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Domain, SampledFunction, SampledSymbol};
use crate::quantize::{op_matrix, symbol_from_matrix};
use crate::tfa::symplectic_fourier;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest N^d accepted by the direct twisted convolution.
pub const MAX_DIRECT_ND: usize = 64;

/// Default bound for the route and identity residuals.
pub const ROUTE_TOL: f64 = 1e-7;

fn is_constant(a: &SampledSymbol) -> bool {
    let v = a.values();
    v.iter().all(|x| *x == v[0])
}

/// Grid constants are exact scalars in the discrete algebra; everything else
/// must keep its tail band within the aliasing budget.
fn check_factor(a: &SampledSymbol, what: &str) -> Result<()> {
    if !is_constant(a) {
        a.check_alias_budget(what)?;
    }
    Ok(())
}

/// a #_A b: the A-symbol of Op_A(a)·Op_A(b). Default A = I/2 gives the Weyl product.
pub fn weyl_product(a: &SampledSymbol, b: &SampledSymbol, q: &Quantization) -> Result<SampledSymbol> {
    check_factor(a, "left factor of #")?;
    check_factor(b, "right factor of #")?;
    weyl_product_unchecked(a, b, q)
}

/// [`weyl_product`] without the aliasing check, for periodised linear symbols
/// and other inputs that are large at the grid edge by design.
pub fn weyl_product_unchecked(a: &SampledSymbol, b: &SampledSymbol, q: &Quantization) -> Result<SampledSymbol> {
    a.domain().ensure_same(b.domain(), "weyl product")?;
    let m = op_matrix(a, q)?.compose(&op_matrix(b, q)?)?;
    symbol_from_matrix(&m, q)
}

/// a # b in the Weyl quantization.
pub fn sharp(a: &SampledSymbol, b: &SampledSymbol) -> Result<SampledSymbol> {
    weyl_product(a, b, &Quantization::weyl(a.domain().ndim / 2))
}

/// a#b − b#a (unchecked, Weyl quantization).
pub fn commutator(a: &SampledSymbol, b: &SampledSymbol) -> Result<SampledSymbol> {
    let q = Quantization::weyl(a.domain().ndim / 2);
    weyl_product_unchecked(a, b, &q)?.sub(&weyl_product_unchecked(b, a, &q)?)
}

fn phase_d(dom: &Domain) -> Result<usize> {
    if dom.ndim == 0 || dom.ndim % 2 != 0 {
        return Err(Error::GridMismatch(format!("expected a phase-space symbol, got dimension {}", dom.ndim)));
    }
    if !dom.axis.is_self_dual() {
        return Err(Error::Grid("twisted convolution needs a self-dual grid".into()));
    }
    Ok(dom.ndim / 2)
}

/// Direct quadrature of a ∗_σ b(X) = (2/π)^{d/2} ∫ a(X − Y) b(Y) e^{2iσ(X,Y)} dY
/// with periodic wrap, oversampled ×2.
///
/// The chirp e^{2iσ(X,Y)} has frequency 2|X| in Y, which reaches twice the
/// grid band at the edge, so both inputs are first band-limited-interpolated
/// onto the grid with half the spacing and the sum runs there; the phase is
/// evaluated exactly at node pairs.
pub fn twisted_convolution(a: &SampledSymbol, b: &SampledSymbol) -> Result<SampledSymbol> {
    twisted_convolution_with(a, b, 2)
}

/// Twisted convolution with oversampling factor 1 (plain rectangle rule on the
/// grid, exact for grid deltas) or 2.
pub fn twisted_convolution_with(a: &SampledSymbol, b: &SampledSymbol, oversample: usize) -> Result<SampledSymbol> {
    a.domain().ensure_same(b.domain(), "twisted convolution")?;
    let dom = *a.domain();
    let d = phase_d(&dom)?;
    let n = dom.n();
    if n.pow(d as u32) > MAX_DIRECT_ND {
        return Err(Error::TooLarge(format!(
            "direct twisted convolution needs N^d ≤ {MAX_DIRECT_ND} (got N = {n}, d = {d}); use weyl_product, \
             which equals (2π)^(-d/2) a ∗_σ F_σ b"
        )));
    }
    let p = oversample;
    if p != 1 && p != 2 {
        return Err(Error::InvalidArgument(format!("oversampling factor must be 1 or 2, got {p}")));
    }
    let dim = 2 * d;
    let m = p * n;
    let (af, bf) = if p == 2 {
        (fft::upsample2(a.values(), n, dim), fft::upsample2(b.values(), n, dim))
    } else {
        (a.values().to_vec(), b.values().to_vec())
    };
    let fine = Domain::new(crate::grid::Grid1D::new(m, crate::grid::GridMode::Custom(dom.h() / p as f64))?, dim);
    // fine node K ↦ (K − m/2)h/p and coarse node k ↦ (k − N/2)h sits at fine index p·k;
    // 2·(fine)(coarse) = (2/p)(K − m/2)(k − N/2)·2π/N
    let roots: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect();
    let fine_idx: Vec<Vec<usize>> = (0..fine.len()).map(|i| fine.multi_index(i)).collect();
    let strides = fft::strides(&fine.shape());
    let pref = (2.0 / PI).powf(d as f64 / 2.0) * fine.cell();
    let (ni, mi, twice) = (n as i64, m as i64, (2 / p) as i64);
    let out: Vec<C64> = (0..dom.len())
        .into_par_iter()
        .map(|o| {
            let mo = dom.multi_index(o);
            let c: Vec<i64> = mo.iter().map(|&k| k as i64 - ni / 2).collect();
            let base: Vec<usize> = mo.iter().map(|&k| p * k + m + m / 2).collect();
            let mut acc = C64::new(0.0, 0.0);
            for (k, mk) in fine_idx.iter().enumerate() {
                let bv = bf[k];
                if bv == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut flat = 0;
                for ax in 0..dim {
                    flat += ((base[ax] - mk[ax]) % m) * strides[ax];
                }
                let av = af[flat];
                // σ(X,Y) = ⟨y,ξ⟩ − ⟨x,η⟩
                let mut e: i64 = 0;
                for i in 0..d {
                    let y = mk[i] as i64 - mi / 2;
                    let eta = mk[d + i] as i64 - mi / 2;
                    e += y * c[d + i] - c[i] * eta;
                }
                acc += av * bv * roots[(twice * e).rem_euclid(ni) as usize];
            }
            acc * pref
        })
        .collect();
    SampledFunction::from_values(dom, out)
}

#[derive(Clone, Debug, Serialize)]
pub struct RouteResidual {
    pub name: String,
    /// sup |lhs − rhs| over the central grid divided by `scale`.
    pub relative: f64,
    pub absolute: f64,
    pub scale: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Relative sup-residual over the central grid (|X|_∞ ≤ L/2), scaled by sup |lhs|.
/// The periodic wrap makes values beyond the central region meaningless for
/// comparisons with the continuous identities.
pub fn central_residual(name: &str, lhs: &SampledSymbol, rhs: &SampledSymbol, threshold: f64) -> Result<RouteResidual> {
    lhs.domain().ensure_same(rhs.domain(), name)?;
    let dom = lhs.domain();
    let idx = dom.central_indices();
    let absolute = idx.iter().map(|&i| (lhs.get(i) - rhs.get(i)).norm()).fold(0.0, f64::max);
    let peak = idx.iter().map(|&i| lhs.get(i).norm()).fold(0.0, f64::max);
    let scale = if peak > 0.0 { peak } else { 1.0 };
    let relative = absolute / scale;
    Ok(RouteResidual { name: name.to_string(), relative, absolute, scale, threshold, pass: relative <= threshold })
}

fn weyl_of(dom: &Domain) -> Quantization {
    Quantization::weyl(dom.ndim / 2)
}

/// (2π)^{-d/2}
fn tc_factor(dom: &Domain) -> C64 {
    let d = (dom.ndim / 2) as f64;
    C64::new((2.0 * PI).powf(-d / 2.0), 0.0)
}

/// a#b against (2π)^{-d/2} a ∗_σ (F_σ b).
pub fn product_route_equivalence(a: &SampledSymbol, b: &SampledSymbol) -> Result<RouteResidual> {
    let dom = *a.domain();
    let lhs = weyl_product(a, b, &weyl_of(&dom))?;
    let rhs = twisted_convolution(a, &symplectic_fourier(b)?)?.scale(tc_factor(&dom));
    central_residual("a#b = (2π)^(-d/2) a ∗σ Fσb", &lhs, &rhs, ROUTE_TOL)
}

/// F_σ(a ∗_σ b) = (F_σ a) ∗_σ b = ǎ ∗_σ (F_σ b); one residual per equality.
pub fn twisted_fourier_identity(a: &SampledSymbol, b: &SampledSymbol) -> Result<[RouteResidual; 2]> {
    let lhs = symplectic_fourier(&twisted_convolution(a, b)?)?;
    let m1 = twisted_convolution(&symplectic_fourier(a)?, b)?;
    let m2 = twisted_convolution(&a.reflect(), &symplectic_fourier(b)?)?;
    Ok([
        central_residual("Fσ(a ∗σ b) = (Fσa) ∗σ b", &lhs, &m1, ROUTE_TOL)?,
        central_residual("Fσ(a ∗σ b) = ǎ ∗σ (Fσb)", &lhs, &m2, ROUTE_TOL)?,
    ])
}

/// F_σ(a#b) against (2π)^{-d/2} (F_σ a) ∗_σ (F_σ b).
pub fn weyl_fourier_identity_check(a: &SampledSymbol, b: &SampledSymbol) -> Result<RouteResidual> {
    let dom = *a.domain();
    let lhs = symplectic_fourier(&weyl_product(a, b, &weyl_of(&dom))?)?;
    let rhs = twisted_convolution(&symplectic_fourier(a)?, &symplectic_fourier(b)?)?.scale(tc_factor(&dom));
    central_residual("Fσ(a#b) = (2π)^(-d/2) Fσa ∗σ Fσb", &lhs, &rhs, ROUTE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridMode};

    #[test]
    fn constants_are_units() {
        let g = make_grid(16, 1, GridMode::SelfDual).unwrap();
        let one = SampledFunction::constant(g.phase(), C64::new(1.0, 0.0));
        let b = SampledFunction::from_real_fn(g.phase(), |p| (-(p[0] * p[0] + p[1] * p[1])).exp());
        let q = Quantization::weyl(1);
        for r in [weyl_product(&one, &b, &q).unwrap(), weyl_product(&b, &one, &q).unwrap()] {
            assert!(r.sub(&b).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn direct_route_is_size_limited() {
        let g = make_grid(128, 1, GridMode::SelfDual).unwrap();
        let z = SampledFunction::zeros(g.phase());
        assert!(matches!(twisted_convolution(&z, &z), Err(Error::TooLarge(_))));
    }
}
