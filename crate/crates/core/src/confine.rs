//! Confinement and symbol-class diagnostics: Gevrey envelope fits, localized
//! Weyl products, the partition of unity ∫ψ_Y#φ_Y dY = 1 and the
//! M^{∞,1} envelope of a symbol.
//!
//! "Central grid" is |X|_∞ ≤ L/2 throughout.

use crate::calculus::Quantization;
use crate::error::{Error, Result};
use crate::functions::standard_gaussian;
use crate::grid::{Domain, SampledFunction, SampledSymbol};
use crate::quantize::rank_one_symbol;
use crate::tfa::{spectral_derivative, stft_unchecked};
use crate::weights::Weight;
use crate::weylalg::{central_residual, weyl_product, RouteResidual};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

/// Nodes below this fraction of the peak are left out of envelope fits.
pub const FIT_FLOOR: f64 = 1e-12;

/// Default highest derivative order in class diagnostics.
pub const DEFAULT_MAX_ORDER: usize = 4;

/// Partition-of-unity defect bound.
pub const PARTITION_TOL: f64 = 1e-3;

/// Budget for the relative spectral tail of each derivative (η^α â in the band
/// |η|_∞ > 3L/4). Looser than the grid's aliasing budget: the fit is a ±20%
/// quantity, and symbols with poles at distance ~1 from the real domain
/// (⟨X⟩^{-1}, rational phases) only reach ~1e-4 at desk sizes.
pub const DERIVATIVE_TAIL_BUDGET: f64 = 1e-3;

/// Smallest decay rate counted as a successful envelope fit.
pub const MIN_ENVELOPE_RATE: f64 = 0.1;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All multi-indices of length `dim` with |α| ≤ max, graded.
pub fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    for total in 0..=max {
        let mut cur = vec![0; dim];
        fill(&mut cur, 0, total, &mut out);
    }
    out
}

fn fill(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        fill(cur, pos + 1, left - k, out);
    }
    cur[pos] = 0;
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeRow {
    pub alpha: Vec<usize>,
    /// max over the central grid of |D^α a| / ω
    pub sup: f64,
    /// sup / (C h^{|α|} α!^s); at most 1 by construction of h
    pub normalized: f64,
    pub spectral_tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassDiagnostic {
    pub weight: String,
    pub s: f64,
    /// Envelope constant: sup |a|/ω over the central grid.
    pub c: f64,
    /// Least h with sup|D^α a|/ω ≤ C h^{|α|} α!^s for 1 ≤ |α| ≤ max_order; 0 when
    /// every derivative vanishes (any h > 0 fits).
    pub h: f64,
    pub max_order: usize,
    pub rows: Vec<DerivativeRow>,
}

/// Fits the Gevrey envelope |D^α a| ≤ C h^{|α|} (α!)^s ω on the central grid.
/// C is sup |a|/ω, so h does not change when a is rescaled. Derivatives are
/// spectral (exactly zero for a grid constant); each must keep its spectral tail
/// within [`DERIVATIVE_TAIL_BUDGET`].
pub fn class_diagnostic(a: &SampledSymbol, omega: &Weight, s: f64, max_order: usize) -> Result<ClassDiagnostic> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("Gevrey order s must be positive, got {s}")));
    }
    let dom = *a.domain();
    let budget = DERIVATIVE_TAIL_BUDGET;
    let central = dom.central_indices();
    let w: Vec<f64> = central.iter().map(|&i| omega.eval(&dom.point(i))).collect();
    let alphas = multi_indices(dom.ndim, max_order);
    let constant = a.values().iter().all(|v| *v == a.values()[0]);
    let measured: Vec<(Vec<usize>, f64, f64)> = alphas
        .into_par_iter()
        .map(|alpha| {
            if constant {
                let sup = if alpha.iter().any(|&k| k > 0) { 0.0 } else { central.iter().zip(&w).map(|(&i, wi)| a.get(i).norm() / wi).fold(0.0, f64::max) };
                return Ok((alpha, sup, 0.0));
            }
            let (da, tail) = spectral_derivative(a, &alpha)?;
            if tail > budget && da.sup_norm() > 0.0 {
                return Err(Error::DerivativeAliasing { alpha, tail });
            }
            let sup = central.iter().zip(&w).map(|(&i, wi)| da.get(i).norm() / wi).fold(0.0, f64::max);
            Ok((alpha, sup, tail))
        })
        .collect::<Result<_>>()?;
    let c = measured[0].1;
    if c == 0.0 {
        return Err(Error::Empty("symbol vanishes on the central grid".into()));
    }
    let gevrey = |alpha: &[usize]| alpha.iter().map(|&k| factorial(k)).product::<f64>().powf(s);
    let h = measured
        .iter()
        .filter(|(al, _, _)| al.iter().sum::<usize>() > 0)
        .map(|(al, sup, _)| (sup / (c * gevrey(al))).powf(1.0 / al.iter().sum::<usize>() as f64))
        .fold(0.0, f64::max);
    let rows = measured
        .into_iter()
        .map(|(alpha, sup, spectral_tail)| {
            let k = alpha.iter().sum::<usize>() as i32;
            let bound = c * h.powi(k) * gevrey(&alpha);
            let normalized = if bound > 0.0 { sup / bound } else { 0.0 };
            DerivativeRow { alpha, sup, normalized, spectral_tail }
        })
        .collect();
    Ok(ClassDiagnostic { weight: omega.label().to_string(), s, c, h, max_order, rows })
}

/// Fitted h at two resolutions. A decrease is reported, not read as the
/// every-h (Beurling) property.
#[derive(Clone, Debug, Serialize)]
pub struct ResolutionTrend {
    pub h_coarse: f64,
    pub h_fine: f64,
    /// |h_fine / h_coarse − 1|
    pub relative_change: f64,
    pub decreased: bool,
}

pub fn resolution_trend(coarse: &ClassDiagnostic, fine: &ClassDiagnostic) -> ResolutionTrend {
    let (a, b) = (coarse.h, fine.h);
    let relative_change = if a > 0.0 { (b / a - 1.0).abs() } else if b == 0.0 { 0.0 } else { f64::INFINITY };
    ResolutionTrend { h_coarse: a, h_fine: b, relative_change, decreased: b < a }
}

/// Least-squares fit of ln v ≈ ln C − r·x; returns (ln C, r).
pub fn fit_log_linear(x: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x.iter().zip(v).filter(|(_, v)| **v > 0.0).map(|(x, v)| (*x, v.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Empty("fewer than two points above the fit floor".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("envelope fit needs at least two distinct distances".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((my - slope * mx, -slope))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn node_offset(dom: &Domain, steps: &[i64]) -> Vec<f64> {
    steps.iter().map(|&k| k as f64 * dom.h()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfinedProfile {
    /// Least-squares decay rate in |X−Y|^{1/s} + |X−Z|^{1/s} + |Y−Z|^{1/s}.
    pub r: f64,
    /// Smallest C making the envelope with rate r an upper bound on the fitted nodes.
    pub c: f64,
    pub peak: f64,
    pub points: usize,
    #[serde(skip)]
    pub product: SampledSymbol,
}

/// (φ_Y a₁)#(ψ_Z a₂) for grid offsets Y, Z (in nodes) and its decay envelope
/// C·e^{−r(|X−Y|^{1/s} + |X−Z|^{1/s} + |Y−Z|^{1/s})}/ω(X), fitted over central
/// nodes above the fit floor.
#[allow(clippy::too_many_arguments)]
pub fn confined_product_profile(
    phi: &SampledSymbol,
    psi: &SampledSymbol,
    a1: &SampledSymbol,
    a2: &SampledSymbol,
    y: &[i64],
    z: &[i64],
    s: f64,
    omega: Option<&Weight>,
) -> Result<ConfinedProfile> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("Gevrey order s must be positive, got {s}")));
    }
    let dom = *phi.domain();
    let left = phi.translate(y)?.mul(a1)?;
    let right = psi.translate(z)?.mul(a2)?;
    let product = weyl_product(&left, &right, &Quantization::weyl(dom.ndim / 2))?;
    let (yp, zp) = (node_offset(&dom, y), node_offset(&dom, z));
    let yz = distance(&yp, &zp).powf(1.0 / s);
    let central = dom.central_indices();
    let mut vals = Vec::with_capacity(central.len());
    let mut dist = Vec::with_capacity(central.len());
    for &i in &central {
        let x = dom.point(i);
        let w = omega.map_or(1.0, |o| o.eval(&x));
        vals.push(product.get(i).norm() / w);
        dist.push(distance(&x, &yp).powf(1.0 / s) + distance(&x, &zp).powf(1.0 / s) + yz);
    }
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > FIT_FLOOR * peak).collect();
    let xs: Vec<f64> = keep.iter().map(|&k| dist[k]).collect();
    let vs: Vec<f64> = keep.iter().map(|&k| vals[k]).collect();
    let (_, r) = fit_log_linear(&xs, &vs)?;
    let c = xs.iter().zip(&vs).map(|(x, v)| v * (r * x).exp()).fold(0.0, f64::max);
    Ok(ConfinedProfile { r, c, peak, points: keep.len(), product })
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionOfUnity {
    #[serde(skip)]
    pub phi: SampledSymbol,
    #[serde(skip)]
    pub psi: SampledSymbol,
    /// lattice step in grid nodes
    pub step_nodes: usize,
    /// max over central X of |Σ_Y (ψ_Y#φ_Y)(X)·step^{2d} − 1|
    pub defect: f64,
    pub pass: bool,
    /// κ in φ#φ = κφ, by least squares
    pub projector_scale: f64,
    /// φ#φ against κφ
    pub idempotence: RouteResidual,
}

/// φ = (2π)^{d/2}W_{g,g} (the Weyl symbol of the projector onto g), ψ = φ/Σφh^{2d},
/// and the lattice sum Σ_Y (ψ_Y#φ_Y)·step^{2d} over the periodic lattice of the
/// given step. The step must be a grid multiple that divides the period.
/// ψ_Y#φ_Y is the Y-translate of ψ#φ, which is exact for grid-aligned Y.
pub fn partition_of_unity(g: &SampledFunction, lattice_step: f64) -> Result<PartitionOfUnity> {
    let cfg = *g.domain();
    let h = cfg.h();
    let m = (lattice_step / h).round();
    if !(m >= 1.0) || (lattice_step / h - m).abs() > 1e-9 * m {
        return Err(Error::InvalidArgument(format!("lattice step {lattice_step} is not a multiple of the grid step {h}")));
    }
    let m = m as usize;
    let n = cfg.n();
    if n % m != 0 {
        return Err(Error::InvalidArgument(format!("lattice step {m}h does not tile the period {n}h")));
    }
    let g = g.normalized()?;
    let q = Quantization::weyl(cfg.ndim);
    let phi = rank_one_symbol(&g, &g, &q)?;
    let dom = *phi.domain();
    let mass: C64 = phi.values().iter().sum::<C64>() * dom.cell();
    let psi = phi.scale(C64::new(1.0, 0.0) / mass);
    let pp = weyl_product(&psi, &phi, &q)?;
    let step_cell = (m as f64 * h).powi(dom.ndim as i32);
    let lattice: Vec<Vec<usize>> = (0..dom.len())
        .map(|i| dom.multi_index(i))
        .filter(|mi| mi.iter().all(|&k| (k + n - n / 2) % m == 0))
        .collect();
    let defect = dom
        .central_indices()
        .par_iter()
        .map(|&i| {
            let mx = dom.multi_index(i);
            let mut src = vec![0usize; dom.ndim];
            let mut acc = C64::new(0.0, 0.0);
            for my in &lattice {
                // (ψ#φ)(X − Y) with Y = (my − N/2)h
                for ax in 0..dom.ndim {
                    src[ax] = (mx[ax] + n + n / 2 - my[ax]) % n;
                }
                acc += pp.get(dom.flat_index(&src));
            }
            (acc * step_cell - 1.0).norm()
        })
        .reduce(|| 0.0, f64::max);
    let sq = weyl_product(&phi, &phi, &q)?;
    let num: C64 = sq.values().iter().zip(phi.values()).map(|(a, b)| a * b.conj()).sum();
    let den: f64 = phi.values().iter().map(|b| b.norm_sqr()).sum();
    let projector_scale = (num / den).re;
    let idempotence = central_residual("φ#φ = κφ", &sq, &phi.scale(C64::new(projector_scale, 0.0)), 1e-8)?;
    Ok(PartitionOfUnity { phi, psi, step_nodes: m, defect, pass: defect <= PARTITION_TOL, projector_scale, idempotence })
}

#[derive(Clone, Debug, Serialize)]
pub struct MInftyEnvelope {
    /// |Y| for every frequency node
    pub y: Vec<f64>,
    /// sup over central X of |V_Φa(X,Y)|/ω₀(X)
    pub envelope: Vec<f64>,
    /// fitted rate in e^{−r|Y|^{1/s}}
    pub r: f64,
    /// sup over X, Y of |V_Φa|/ω₀
    pub c: f64,
    pub decays: bool,
}

/// Phase-space STFT of a with the Gaussian window on ℝ^{2d}; the sup over
/// central X of |V_Φa(X,Y)|/ω₀(X) is fitted to C e^{−r|Y|^{1/s}} over the Y
/// nodes above the fit floor. a ∈ Γ^{(ω₀)}_s shows as r > 0.
pub fn minfty1_envelope(a: &SampledSymbol, omega0: &Weight, s: f64) -> Result<MInftyEnvelope> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("Gevrey order s must be positive, got {s}")));
    }
    let dom = *a.domain();
    let v = stft_unchecked(a, &standard_gaussian(dom))?;
    let ny = dom.len();
    let central = dom.central_indices();
    let w: Vec<f64> = central.iter().map(|&i| omega0.eval(&dom.point(i))).collect();
    let envelope: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|iy| central.iter().zip(&w).map(|(&ix, wx)| v.get(ix * ny + iy).norm() / wx).fold(0.0, f64::max))
        .collect();
    let y: Vec<f64> = (0..ny).map(|i| distance(&dom.point(i), &vec![0.0; dom.ndim])).collect();
    let c = envelope.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..ny).filter(|&i| envelope[i] > FIT_FLOOR * c).collect();
    let xs: Vec<f64> = keep.iter().map(|&i| y[i].powf(1.0 / s)).collect();
    let vs: Vec<f64> = keep.iter().map(|&i| envelope[i]).collect();
    let (_, r) = fit_log_linear(&xs, &vs)?;
    Ok(MInftyEnvelope { y, envelope, r, c, decays: r > MIN_ENVELOPE_RATE })
}

#[derive(Clone, Debug, Serialize)]
pub struct LogRatioFamily {
    /// sup over X of |log(ω(X+Y)/ω(Y))| / (1 + |log v(X)|), per Y
    pub per_y: Vec<f64>,
    pub max: f64,
    /// max(1, log C) for the moderation constant C of ω with respect to v
    pub bound: f64,
    pub bounded: bool,
}

/// The family c_Y(X) = log(ω(X+Y)/ω(Y)) against C·(1 + |log v(X)|) at the given points.
pub fn log_ratio_family(omega: &Weight, v: &Weight, moderation: f64, ys: &[Vec<f64>], points: &[Vec<f64>]) -> Result<LogRatioFamily> {
    if ys.is_empty() || points.is_empty() {
        return Err(Error::Empty("log-ratio family needs shifts and points".into()));
    }
    let per_y: Vec<f64> = ys
        .iter()
        .map(|y| {
            let ly = omega.ln_eval(y);
            points
                .iter()
                .map(|x| {
                    let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                    (omega.ln_eval(&s) - ly).abs() / (1.0 + v.ln_eval(x).abs())
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let max = per_y.iter().cloned().fold(0.0, f64::max);
    let bound = moderation.ln().max(1.0);
    Ok(LogRatioFamily { per_y, max, bound, bounded: max <= bound * (1.0 + 1e-12) })
}
