//! A-quantization: symbol ↔ kernel ↔ matrix, change of quantization, rank-one
//! symbols and the Wigner pairing.
//!
//! Every quantization routes through Kohn–Nirenberg (A = 0) and the Fourier
//! multiplier of [`change_quantization`], so all maps are exact linear
//! bijections on grid data and no half-grid midpoint is ever interpolated.

use crate::calculus::{self, Quantization};
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid1D, SampledFunction, SampledSymbol};
use crate::linalg::{self, CMatrix};
use crate::tfa;
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Dense matrix of an operator on grid functions with the quadrature
/// convention entries = kernel × h^d, so apply(f) = entries·f is the rectangle
/// rule for ∫K(x,y)f(y)dy.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    entries: CMatrix,
    axis: Grid1D,
    d: usize,
    quantization: Option<Quantization>,
}

impl OperatorMatrix {
    pub fn new(entries: CMatrix, axis: Grid1D, d: usize, quantization: Option<Quantization>) -> Result<Self> {
        let nd = axis.n().pow(d as u32);
        if entries.nrows() != nd || entries.ncols() != nd {
            return Err(Error::InvalidArgument(format!(
                "operator matrix is {}×{}, expected {nd}×{nd}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries, axis, d, quantization })
    }

    pub fn identity(dom: &Domain) -> Self {
        let nd = dom.len();
        Self { entries: CMatrix::identity(nd, nd), axis: dom.axis, d: dom.ndim, quantization: None }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn quantization(&self) -> Option<&Quantization> {
        self.quantization.as_ref()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn axis(&self) -> Grid1D {
        self.axis
    }

    /// Domain of the functions this operator acts on.
    pub fn config(&self) -> Domain {
        Domain::new(self.axis, self.d)
    }

    /// Phase-space domain of its symbols.
    pub fn phase(&self) -> Domain {
        Domain::new(self.axis, 2 * self.d)
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.config().ensure_same(f.domain(), "operator apply")?;
        let v = &self.entries * DVector::from_column_slice(f.values());
        SampledFunction::from_values(*f.domain(), v.iter().cloned().collect())
    }

    /// Composition self ∘ other.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.config().ensure_same(&other.config(), "operator composition")?;
        Ok(Self { entries: &self.entries * &other.entries, axis: self.axis, d: self.d, quantization: None })
    }

    pub fn map_entries(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self { entries: f(&self.entries), axis: self.axis, d: self.d, quantization: None }
    }

    /// Largest singular value: the discrete L²→L² operator norm (s_∞^w norm of the symbol).
    pub fn operator_norm_2(&self) -> f64 {
        linalg::spectral_norm(&self.entries)
    }

    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.entries)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.entries)[0]
    }

    /// ‖self - other‖₂.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::spectral_norm(&(&self.entries - &other.entries))
    }
}

/// Kernel samples K(x_m, x_n) (not multiplied by h^d).
#[derive(Clone, Debug)]
pub struct Kernel {
    pub values: CMatrix,
    pub axis: Grid1D,
    pub d: usize,
    /// max |K| at wrapped separations |x - y|_∞ > 3L/4, relative to max |K|.
    pub tail_ratio: f64,
}

fn phase_info(a: &SampledSymbol, q: &Quantization) -> Result<(usize, usize)> {
    let dom = a.domain();
    if dom.ndim == 0 || dom.ndim % 2 != 0 {
        return Err(Error::GridMismatch(format!("expected a phase-space symbol, got dimension {}", dom.ndim)));
    }
    if !dom.axis.is_self_dual() {
        return Err(Error::Grid("quantization needs a self-dual grid".into()));
    }
    let d = dom.ndim / 2;
    if q.d() != d {
        return Err(Error::InvalidArgument(format!("quantization is {}×{} but d = {d}", q.d(), q.d())));
    }
    Ok((dom.n(), d))
}

/// Symbol a_2 with Op_{A2}(a_2) = Op_{A1}(a_1): the centred Fourier transform of a
/// (duals η of x and y of ξ) is multiplied by e^{i⟨(A1 - A2)y, η⟩}. On the
/// Nyquist lines each bilinear term uses |y_k η_i| so the multiplier is even.
pub fn change_quantization(a: &SampledSymbol, a1: &Quantization, a2: &Quantization) -> Result<SampledSymbol> {
    let (n, d) = phase_info(a, a1)?;
    if a2.d() != d {
        return Err(Error::InvalidArgument("quantizations of different dimension".into()));
    }
    SampledFunction::from_values(*a.domain(), calculus::change_quantization_raw(a.values(), n, d, a1, a2))
}

/// Op_A(a) as a quadrature-scaled matrix.
pub fn op_matrix(a: &SampledSymbol, q: &Quantization) -> Result<OperatorMatrix> {
    let (n, d) = phase_info(a, q)?;
    let a0 = calculus::change_quantization_raw(a.values(), n, d, q, &Quantization::kohn_nirenberg(d));
    OperatorMatrix::new(calculus::kn_matrix(&a0, n, d), a.domain().axis, d, Some(q.clone()))
}

/// Weyl quantization Op^w(a).
pub fn op_weyl(a: &SampledSymbol) -> Result<OperatorMatrix> {
    op_matrix(a, &Quantization::weyl(a.domain().ndim / 2))
}

/// Symbol of a matrix in the A-quantization (exact inverse of [`op_matrix`]).
pub fn symbol_from_matrix(m: &OperatorMatrix, q: &Quantization) -> Result<SampledSymbol> {
    let (n, d) = (m.axis.n(), m.d);
    if q.d() != d {
        return Err(Error::InvalidArgument("quantization dimension mismatch".into()));
    }
    let s0 = calculus::kn_symbol(&m.entries, n, d);
    let s = calculus::change_quantization_raw(&s0, n, d, &Quantization::kohn_nirenberg(d), q);
    SampledFunction::from_values(m.phase(), s)
}

fn kernel_tail(m: &CMatrix, n: usize, d: usize) -> f64 {
    let nd = m.nrows();
    let peak = linalg::max_abs(m);
    if peak == 0.0 {
        return 0.0;
    }
    let mut tail = 0.0f64;
    for r in 0..nd {
        for c in 0..nd {
            let (mut a, mut b) = (r, c);
            let mut far = false;
            for _ in 0..d {
                let diff = ((a % n) as i64 - (b % n) as i64).rem_euclid(n as i64);
                let wrapped = diff.min(n as i64 - diff);
                if 8 * wrapped > 3 * n as i64 {
                    far = true;
                }
                a /= n;
                b /= n;
            }
            if far {
                tail = tail.max(m[(r, c)].norm());
            }
        }
    }
    tail / peak
}

/// Kernel K_{a,A}(x_m, x_n) = (2π)^{-d/2}(F₂^{-1}a)(x - A(x - y), x - y) at the
/// nodes, with the difference variable wrapped periodically. The relative
/// kernel mass at large separations is reported in `tail_ratio`; see
/// [`kernel_from_symbol_checked`] for the enforcing variant.
pub fn kernel_from_symbol(a: &SampledSymbol, q: &Quantization) -> Result<Kernel> {
    let m = op_matrix(a, q)?;
    let (n, d) = (m.axis.n(), m.d);
    let hd = m.axis.h().powi(d as i32);
    let tail_ratio = kernel_tail(&m.entries, n, d);
    Ok(Kernel { values: m.entries / C64::new(hd, 0.0), axis: m.axis, d, tail_ratio })
}

/// [`kernel_from_symbol`] that fails when the kernel tail exceeds the grid's aliasing budget.
pub fn kernel_from_symbol_checked(a: &SampledSymbol, q: &Quantization) -> Result<Kernel> {
    let k = kernel_from_symbol(a, q)?;
    let budget = a.domain().axis.alias_budget();
    if k.tail_ratio > budget {
        return Err(Error::Aliasing { what: "kernel (F₂^{-1} a)".into(), tail: k.tail_ratio, budget });
    }
    Ok(k)
}

impl Kernel {
    pub fn to_matrix(&self) -> OperatorMatrix {
        let hd = self.axis.h().powi(self.d as i32);
        OperatorMatrix { entries: &self.values * C64::new(hd, 0.0), axis: self.axis, d: self.d, quantization: None }
    }

    /// Kernel of the rank-one operator f ↦ (f, f2) f1: K(x, y) = f1(x) conj(f2(y)).
    pub fn rank_one(f1: &SampledFunction, f2: &SampledFunction) -> Result<Self> {
        f1.domain().ensure_same(f2.domain(), "rank-one kernel")?;
        let nd = f1.domain().len();
        let values = CMatrix::from_fn(nd, nd, |i, j| f1.get(i) * f2.get(j).conj());
        Ok(Self { values, axis: f1.domain().axis, d: f1.domain().ndim, tail_ratio: 0.0 })
    }
}

/// Exact inverse of [`kernel_from_symbol`].
pub fn symbol_from_kernel(k: &Kernel, q: &Quantization) -> Result<SampledSymbol> {
    symbol_from_matrix(&k.to_matrix(), q)
}

/// A-symbol of the rank-one operator f ↦ (f, f2) f1, i.e. (2π)^{d/2} W^A_{f1,f2}.
pub fn rank_one_symbol(f1: &SampledFunction, f2: &SampledFunction, q: &Quantization) -> Result<SampledSymbol> {
    symbol_from_kernel(&Kernel::rank_one(f1, f2)?, q)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingResidual {
    pub operator_side: (f64, f64),
    pub wigner_side: (f64, f64),
    pub residual: f64,
    pub scale: f64,
}

/// |(Op_A(a)f, g) - (2π)^{-d/2}(a, W^A_{g,f})|, both sides by quadrature; the
/// Wigner side uses the direct [`tfa::wigner`] evaluation.
pub fn wigner_pairing_check(
    a: &SampledSymbol,
    f: &SampledFunction,
    g: &SampledFunction,
    q: &Quantization,
) -> Result<PairingResidual> {
    let op = op_matrix(a, q)?;
    let lhs = op.apply(f)?.inner(g)?;
    let w = tfa::wigner(g, f, q)?;
    let d = q.d() as f64;
    let rhs = a.inner(&w)? * (2.0 * PI).powf(-d / 2.0);
    let scale = a.sup_norm() * f.l2_norm() * g.l2_norm();
    Ok(PairingResidual {
        operator_side: (lhs.re, lhs.im),
        wigner_side: (rhs.re, rhs.im),
        residual: (lhs - rhs).norm(),
        scale: if scale > 0.0 { scale } else { 1.0 },
    })
}

/// JSON sidecar of a binary dump: the .bin file holds `shape` complex values
/// in row-major order as little-endian (re: f32, im: f32) pairs.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct DumpSidecar {
    pub kind: String,
    pub dtype: String,
    pub shape: Vec<usize>,
    pub n: usize,
    pub h: f64,
    pub d: usize,
    /// Row-major d×d quantization matrix A, if any.
    pub quantization: Option<Vec<f64>>,
    pub label: Option<String>,
}

fn write_dump(stem: &std::path::Path, values: impl Iterator<Item = C64>, sidecar: &DumpSidecar) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 * sidecar.shape.iter().product::<usize>());
    for v in values {
        bytes.extend_from_slice(&(v.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    std::fs::write(stem.with_extension("bin"), bytes)?;
    let json = serde_json::to_string_pretty(sidecar).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(stem.with_extension("json"), json + "\n")?;
    Ok(())
}

/// Writes `stem.bin` (complex64, row-major) and `stem.json`.
pub fn export_matrix(m: &OperatorMatrix, stem: &std::path::Path) -> Result<DumpSidecar> {
    let e = m.entries();
    let sidecar = DumpSidecar {
        kind: "operator".into(),
        dtype: "<c8".into(),
        shape: vec![e.nrows(), e.ncols()],
        n: m.axis.n(),
        h: m.axis.h(),
        d: m.d,
        quantization: m.quantization.as_ref().map(|q| q.entries().to_vec()),
        label: None,
    };
    let rows = (0..e.nrows()).flat_map(|i| (0..e.ncols()).map(move |j| e[(i, j)]));
    write_dump(stem, rows, &sidecar)?;
    Ok(sidecar)
}

/// Writes a symbol's grid values (shape N^{2d}, last axis fastest) the same way.
pub fn export_symbol(a: &SampledSymbol, q: Option<&Quantization>, stem: &std::path::Path) -> Result<DumpSidecar> {
    let dom = a.domain();
    let sidecar = DumpSidecar {
        kind: "symbol".into(),
        dtype: "<c8".into(),
        shape: dom.shape(),
        n: dom.n(),
        h: dom.h(),
        d: dom.ndim / 2,
        quantization: q.map(|q| q.entries().to_vec()),
        label: a.label().map(str::to_string),
    };
    write_dump(stem, a.values().iter().copied(), &sidecar)?;
    Ok(sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridMode};

    #[test]
    fn op_of_one_is_identity() {
        let g = make_grid(16, 1, GridMode::SelfDual).unwrap();
        let one = SampledFunction::constant(g.phase(), C64::new(1.0, 0.0));
        for t in [0.0, 0.25, 0.5, 1.0] {
            let m = op_matrix(&one, &Quantization::scalar(t, 1)).unwrap();
            let id = CMatrix::identity(16, 16);
            assert!(linalg::max_abs(&(m.entries() - id)) < 1e-12);
        }
    }

    #[test]
    fn kernel_of_one_is_scaled_delta() {
        let g = make_grid(16, 1, GridMode::SelfDual).unwrap();
        let one = SampledFunction::constant(g.phase(), C64::new(1.0, 0.0));
        let k = kernel_from_symbol(&one, &Quantization::kohn_nirenberg(1)).unwrap();
        let h = g.h();
        for i in 0..16 {
            for j in 0..16 {
                let want = if i == j { 1.0 / h } else { 0.0 };
                assert!((k.values[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn checked_kernel_rejects_rough_symbols() {
        let g = make_grid(16, 1, GridMode::SelfDual).unwrap();
        let rough = SampledFunction::from_real_fn(g.phase(), |p| if p[1] > 0.0 { 1.0 } else { 0.0 });
        assert!(matches!(kernel_from_symbol_checked(&rough, &Quantization::kohn_nirenberg(1)), Err(Error::Aliasing { .. })));
        assert!(kernel_from_symbol(&rough, &Quantization::kohn_nirenberg(1)).is_ok());
    }
}
