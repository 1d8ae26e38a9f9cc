//! Toeplitz (localization) operators
//! (Tp_φ(a)f, g) = (a V_φf, V_φg) = ((2π)^{-d/2} Op^w(a ∗ W_{φ,φ}) f, g),
//! and the Gaussian factorisations that turn Weyl operators into Toeplitz ones.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Domain, SampledFunction, SampledSymbol};
use crate::linalg::{self, CMatrix};
use crate::modspace::{modulation_norm, MixedNormSpec, RatioStats};
use crate::quantize::{op_weyl, OperatorMatrix};
use crate::tfa;
use crate::weights::Weight;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

fn config_of(phase: &Domain) -> Result<Domain> {
    if phase.ndim == 0 || phase.ndim % 2 != 0 {
        return Err(Error::GridMismatch(format!("expected a phase-space symbol, got dimension {}", phase.ndim)));
    }
    Ok(Domain::new(phase.axis, phase.ndim / 2))
}

fn check_window(a: &SampledSymbol, window: &SampledFunction) -> Result<Domain> {
    let cfg = config_of(a.domain())?;
    cfg.ensure_same(window.domain(), "toeplitz window")?;
    if window.sup_norm() == 0.0 {
        return Err(Error::InvalidArgument("Toeplitz window is identically zero".into()));
    }
    window.check_alias_budget("toeplitz window")?;
    Ok(cfg)
}

/// STFTs of all grid deltas as columns: S[X, n] = V_φ δ_n (X).
fn delta_stfts(window: &SampledFunction) -> Result<CMatrix> {
    let cfg = *window.domain();
    let cols: Vec<SampledSymbol> = (0..cfg.len())
        .into_par_iter()
        .map(|n| tfa::stft_unchecked(&SampledFunction::delta(cfg, n), window))
        .collect::<Result<_>>()?;
    let rows = cols[0].domain().len();
    Ok(CMatrix::from_fn(rows, cfg.len(), |x, n| cols[n].get(x)))
}

/// Tp_φ(a) from the sesquilinear form applied to grid deltas:
/// M[m, n] = h^{-d} · h^{2d} Σ_X a(X) V_φδ_n(X) conj(V_φδ_m(X)).
pub fn toeplitz_stft_form(a: &SampledSymbol, window: &SampledFunction) -> Result<OperatorMatrix> {
    let cfg = check_window(a, window)?;
    let s = delta_stfts(window)?;
    let d = cfg.ndim;
    let h = cfg.h();
    let cell = h.powi(d as i32);
    let weighted = CMatrix::from_fn(s.nrows(), s.ncols(), |x, n| s[(x, n)] * a.get(x) * cell);
    OperatorMatrix::new(s.adjoint() * weighted, cfg.axis, d, None)
}

/// h^{2d} Σ_Y a(X - Y) b(Y) with periodic wrap.
pub fn phase_convolve(a: &SampledSymbol, b: &SampledSymbol) -> Result<SampledSymbol> {
    a.domain().ensure_same(b.domain(), "phase-space convolution")?;
    let dom = *a.domain();
    let mut v = fft::periodic_convolve(a.values(), b.values(), dom.n(), dom.ndim);
    let cell = dom.cell();
    for x in v.iter_mut() {
        *x *= cell;
    }
    SampledFunction::from_values(dom, v)
}

/// Tp_φ(a) = (2π)^{-d/2} Op^w(a ∗ W_{φ,φ}): one convolution and one quantization.
pub fn toeplitz_weyl_form(a: &SampledSymbol, window: &SampledFunction) -> Result<OperatorMatrix> {
    let cfg = check_window(a, window)?;
    let w = tfa::cross_wigner(window, window)?;
    let d = cfg.ndim as f64;
    let sym = phase_convolve(a, &w)?.scale(C64::new((2.0 * PI).powf(-d / 2.0), 0.0));
    op_weyl(&sym)
}

/// Production path: the Weyl form.
pub fn toeplitz(a: &SampledSymbol, window: &SampledFunction) -> Result<OperatorMatrix> {
    toeplitz_weyl_form(a, window)
}

#[derive(Clone, Debug, Serialize)]
pub struct FormComparison {
    /// ‖Weyl form − STFT form‖₂ / ‖STFT form‖₂
    pub relative: f64,
    pub scale: f64,
    pub hermitian_defect: f64,
    pub min_eigenvalue: f64,
}

pub fn compare_forms(a: &SampledSymbol, window: &SampledFunction) -> Result<FormComparison> {
    let s = toeplitz_stft_form(a, window)?;
    let w = toeplitz_weyl_form(a, window)?;
    let scale = s.operator_norm_2();
    let diff = linalg::spectral_norm(&(w.entries() - s.entries()));
    Ok(FormComparison {
        relative: if scale > 0.0 { diff / scale } else { diff },
        scale,
        hermitian_defect: s.hermitian_defect(),
        min_eigenvalue: s.min_eigenvalue(),
    })
}

/// Φ_λ(x, ξ) = C·e^{-(λ1|x|² + λ2|ξ|²)}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianPhaseWeight {
    pub lambda: [f64; 2],
    pub amplitude: f64,
}

impl GaussianPhaseWeight {
    pub fn new(lambda: [f64; 2], amplitude: f64) -> Result<Self> {
        if !(lambda[0] > 0.0 && lambda[1] > 0.0) {
            return Err(Error::InvalidArgument(format!("Gaussian parameters must be positive, got {lambda:?}")));
        }
        Ok(Self { lambda, amplitude })
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        let d = p.len() / 2;
        let x2: f64 = p[..d].iter().map(|v| v * v).sum();
        let xi2: f64 = p[d..].iter().map(|v| v * v).sum();
        self.amplitude * (-(self.lambda[0] * x2 + self.lambda[1] * xi2)).exp()
    }

    pub fn sample(&self, dom: Domain) -> SampledSymbol {
        let g = *self;
        SampledFunction::from_real_fn(dom, move |p| g.eval(p))
    }
}

#[derive(Clone, Debug)]
pub struct GaussianSplit {
    pub lambda: GaussianPhaseWeight,
    /// Unit amplitude, μ1μ2 = 1.
    pub mu: GaussianPhaseWeight,
    /// Unit amplitude; Φ_λ = Φ_μ ∗ Φ_ν.
    pub nu: GaussianPhaseWeight,
    /// φ(x) = e^{-μ1|x|²/2} (not normalised).
    pub window: SampledFunction,
    /// Φ_μ = c·W_{φ,φ}, measured from the sampled Wigner distribution at the origin.
    pub c: f64,
    /// c = (μ1/2)^{d/2} from the closed form of W_{φ,φ}.
    pub c_exact: f64,
    /// sup |Φ_μ ∗ Φ_ν − Φ_λ| / sup |Φ_λ| by FFT convolution.
    pub convolution_residual: f64,
}

/// μ_i = λ_i/√(λ1λ2), ν_i = λ_iμ_i/(μ_i − λ_i), and Φ_λ carries the amplitude
/// Π (π/(μ_i + ν_i))^{d/2} that makes Φ_λ = Φ_μ ∗ Φ_ν exactly.
pub fn gaussian_split(lambda: [f64; 2], cfg: Domain) -> Result<GaussianSplit> {
    GaussianPhaseWeight::new(lambda, 1.0)?;
    let prod = lambda[0] * lambda[1];
    if prod >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Gaussian splitting needs λ1·λ2 < 1 (got {prod}); then μ_i > λ_i with μ1μ2 = 1 exists"
        )));
    }
    let d = cfg.ndim as f64;
    let s = prod.sqrt();
    let mu = [lambda[0] / s, lambda[1] / s];
    let nu = [lambda[0] * mu[0] / (mu[0] - lambda[0]), lambda[1] * mu[1] / (mu[1] - lambda[1])];
    let amp = (0..2).map(|i| (PI / (mu[i] + nu[i])).powf(d / 2.0)).product();
    let phase = Domain::new(cfg.axis, 2 * cfg.ndim);
    let lam = GaussianPhaseWeight::new(lambda, amp)?;
    let mu_w = GaussianPhaseWeight::new(mu, 1.0)?;
    let nu_w = GaussianPhaseWeight::new(nu, 1.0)?;
    let m1 = mu[0];
    let window = SampledFunction::from_real_fn(cfg, move |p| (-m1 * p.iter().map(|v| v * v).sum::<f64>() / 2.0).exp())
        .with_label(format!("e^(-{m1}|x|²/2)"));
    let w = tfa::cross_wigner(&window, &window)?;
    let origin = phase.flat_index(&vec![phase.n() / 2; phase.ndim]);
    let c = 1.0 / w.get(origin).re;
    let conv = phase_convolve(&mu_w.sample(phase), &nu_w.sample(phase))?;
    let target = lam.sample(phase);
    let convolution_residual = conv.sub(&target)?.sup_norm() / target.sup_norm();
    Ok(GaussianSplit {
        lambda: lam,
        mu: mu_w,
        nu: nu_w,
        window,
        c,
        c_exact: (m1 / 2.0).powf(d / 2.0),
        convolution_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolIdentity {
    /// ‖Op^w(ω0∗Φ_λ)/(c(2π)^{d/2}) − Tp_φ(ω0∗Φ_ν)‖₂ / ‖Tp_φ(ω0∗Φ_ν)‖₂
    pub relative: f64,
    pub c: f64,
    pub weight: String,
    pub pass: bool,
}

pub const GAUSSIAN_IDENTITY_TOL: f64 = 1e-6;

/// Op^w(ω0 ∗ Φ_λ) = c(2π)^{d/2} Tp_φ(ω0 ∗ Φ_ν), with the Toeplitz side from the
/// STFT form. ω0 is sampled on the grid and both convolutions are periodic.
pub fn toeplitz_weyl_symbol_identity(split: &GaussianSplit, omega0: &Weight) -> Result<SymbolIdentity> {
    let cfg = *split.window.domain();
    let phase = Domain::new(cfg.axis, 2 * cfg.ndim);
    let w0 = omega0.sample(phase);
    let d = cfg.ndim as f64;
    let lhs_sym = phase_convolve(&w0, &split.lambda.sample(phase))?;
    let lhs = op_weyl(&lhs_sym)?;
    let rhs = toeplitz_stft_form(&phase_convolve(&w0, &split.nu.sample(phase))?, &split.window)?;
    let k = C64::new(1.0 / (split.c * (2.0 * PI).powf(d / 2.0)), 0.0);
    let diff = lhs.entries() * k - rhs.entries();
    let relative = linalg::spectral_norm(&diff) / rhs.operator_norm_2();
    Ok(SymbolIdentity { relative, c: split.c, weight: omega0.label().to_string(), pass: relative <= GAUSSIAN_IDENTITY_TOL })
}

/// ϑ = ω^{1/2}, inheriting the class.
pub fn sqrt_weight(omega: &Weight) -> Weight {
    let w = omega.clone();
    let mut params = omega.params();
    params.t = params.t.map(|t| t / 2.0);
    params.r = params.r.map(|r| r / 2.0);
    Weight::from_ln(format!("({})^(1/2)", omega.label()), omega.class(), params, move |p| 0.5 * w.ln_eval(p))
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEquivalence {
    pub stats: RatioStats,
    pub k: f64,
    pub pass: bool,
    /// (Tp_φ(ω)f, f) for every kept member; all must be ≥ 0.
    pub diagonal: Vec<f64>,
    pub diagonal_nonnegative: bool,
    pub skipped: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Ratios ‖Tp_φ(ω)f‖_{M²_{(1/ϑ)}} / ‖f‖_{M²_{(ϑ)}} with ϑ = ω^{1/2}.
pub fn toeplitz_norm_equivalence(
    omega: &Weight,
    window: &SampledFunction,
    ensemble: &[SampledFunction],
    k: f64,
) -> Result<NormEquivalence> {
    if ensemble.is_empty() {
        return Err(Error::Empty("toeplitz norm-equivalence ensemble".into()));
    }
    let cfg = *window.domain();
    let phase = Domain::new(cfg.axis, 2 * cfg.ndim);
    let tp = toeplitz(&omega.sample(phase), window)?;
    let theta = sqrt_weight(omega);
    let inv_theta = theta.reciprocal();
    let spec = MixedNormSpec::lp(2.0, 2.0)?;
    let mut skipped = vec![];
    let mut warnings = vec![];
    let mut ratios = vec![];
    let mut diagonal = vec![];
    for (i, f) in ensemble.iter().enumerate() {
        if f.sup_norm() == 0.0 {
            skipped.push(i);
            warnings.push(format!("ensemble member {i} is identically zero; skipped"));
            continue;
        }
        let tf = tp.apply(f)?;
        diagonal.push(tf.inner(f)?.re);
        let num = modulation_norm(&tf, window, &inv_theta, &spec)?.value;
        let den = modulation_norm(f, window, &theta, &spec)?.value;
        ratios.push(num / den);
    }
    let stats = RatioStats::from_ratios(ratios)?;
    let scale = diagonal.iter().cloned().fold(0.0, f64::max);
    let diagonal_nonnegative = diagonal.iter().all(|&v| v >= -1e-12 * scale);
    let pass = stats.spread <= k;
    Ok(NormEquivalence { stats, k, pass, diagonal, diagonal_nonnegative, skipped, warnings })
}

/// Smallest singular value of `op` restricted to the span of `basis`
/// (orthonormalised internally).
pub fn restricted_min_singular_value(op: &OperatorMatrix, basis: &[SampledFunction]) -> Result<f64> {
    if basis.is_empty() {
        return Err(Error::Empty("restriction basis".into()));
    }
    let nd = op.entries().nrows();
    let b = CMatrix::from_fn(nd, basis.len(), |i, j| basis[j].get(i));
    let q = b.qr().q();
    Ok(linalg::min_singular_value(&(op.entries() * q)))
}
