//! One-parameter symbol groups: ∂_t a = (b + log ϑ)#a, a(0) = a₀.
//!
//! The evolution is linear at the operator level, Op^w(a(t)) = e^{tC}Op^w(a₀)
//! with C = Op^w(b + log ϑ), so the matrix exponential is the production route
//! and a symbol-level RK4 integration is its independent check.

use crate::error::{Error, Result};
use crate::functions::{central_cutoff, gaussian_bump};
use crate::grid::{Domain, SampledFunction, SampledSymbol};
use crate::linalg::{expm, spectral_norm};
use crate::modspace::{modulation_norm, MixedNormSpec, RatioStats};
use crate::quantize::{op_weyl, symbol_from_matrix, OperatorMatrix};
use crate::tfa::spectral_derivative;
use crate::weights::{mollify, Weight};
use crate::weylalg::{central_residual, RouteResidual};
use crate::Quantization;
use num_complex::Complex64 as C64;
use serde::Serialize;

/// Tolerance for route agreement, group law and inverse pairs.
pub const GROUP_TOL: f64 = 1e-6;

/// Tolerance for the centred-difference ODE residual.
pub const ODE_TOL: f64 = 1e-5;

/// Nominal RK4 step at t_max = 1.
pub const RK4_STEP: f64 = 1.0 / 64.0;

/// The RK4 step is halved until step·‖C‖₂ stays below this.
pub const RK4_STEP_NORM: f64 = 0.05;

/// Budget for the relative spectral tail (|η|_∞ > 3L/4) of the windowed generator.
/// The generator does not decay, so the spatial tail-band test does not apply;
/// smoothness on the torus is what the quantization needs.
pub const GENERATOR_TAIL_BUDGET: f64 = 1e-3;

const CONSTANT_LN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MatrixExp,
    Rk4,
}

/// How ϑ was turned into the generator; recorded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct GeneratorInfo {
    pub weight: String,
    /// Mollified with a unit Gaussian bump (skipped for constant ϑ).
    pub mollified: bool,
    /// Multiplied by the central cutoff (skipped when log ϑ is constant on the grid).
    pub windowed: bool,
    pub spectral_tail: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionProblem {
    pub theta: Weight,
    pub b: SampledSymbol,
    pub a0: SampledSymbol,
    pub t_max: f64,
    generator: SampledSymbol,
    c: OperatorMatrix,
    info: GeneratorInfo,
}

fn is_constant(a: &SampledSymbol) -> bool {
    let v = a.values();
    v.iter().all(|x| *x == v[0])
}

fn ln_samples(w: &Weight, dom: &Domain) -> Vec<f64> {
    (0..dom.len()).map(|i| w.ln_eval(&dom.point(i))).collect()
}

/// Unit-mass Gaussian e^{-|X|²}/π^d used to regularise user weights.
pub fn mollifier(dom: Domain) -> SampledFunction {
    let d = dom.ndim as f64 / 2.0;
    gaussian_bump(dom, vec![0.0; dom.ndim], 1.0 / 2f64.sqrt(), C64::new(std::f64::consts::PI.powf(-d), 0.0))
}

impl EvolutionProblem {
    /// Problem with b = 0 and a₀ ≡ 1 on the phase grid `dom`.
    pub fn new(theta: &Weight, dom: Domain, t_max: f64) -> Result<Self> {
        let one = SampledFunction::constant(dom, C64::new(1.0, 0.0));
        Self::with_data(theta, SampledFunction::zeros(dom), one, t_max)
    }

    /// General problem. ϑ is mollified and log ϑ windowed by the central cutoff
    /// unless it is constant on the grid.
    pub fn with_data(theta: &Weight, b: SampledSymbol, a0: SampledSymbol, t_max: f64) -> Result<Self> {
        b.domain().ensure_same(a0.domain(), "evolution problem")?;
        let dom = *b.domain();
        if dom.ndim % 2 != 0 {
            return Err(Error::GridMismatch(format!("symbol evolution needs phase-space data, got dimension {}", dom.ndim)));
        }
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
        }
        for (s, what) in [(&b, "b"), (&a0, "a0")] {
            if !is_constant(s) {
                s.check_alias_budget(what)?;
            }
        }
        let raw = ln_samples(theta, &dom);
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("ϑ = {} is not positive and finite on the grid", theta.label())));
        }
        let constant = raw.iter().all(|v| (v - raw[0]).abs() <= CONSTANT_LN_TOL);
        let (theta, ln, mollified) = if constant {
            (theta.clone(), vec![raw[0]; raw.len()], false)
        } else {
            let m = mollify(theta, &mollifier(dom))?;
            let ln = m.samples.values().iter().map(|v| v.re.ln()).collect();
            (m.weight, ln, true)
        };
        let l = dom.axis.half_width();
        let gen_vals: Vec<C64> = ln
            .iter()
            .enumerate()
            .map(|(i, &v)| C64::new(if constant { v } else { central_cutoff(&dom.point(i), l) * v }, 0.0))
            .collect();
        let generator = SampledFunction::from_values(dom, gen_vals)?.add(&b)?;
        let spectral_tail = if is_constant(&generator) { 0.0 } else { spectral_derivative(&generator, &vec![0; dom.ndim])?.1 };
        if spectral_tail > GENERATOR_TAIL_BUDGET {
            return Err(Error::Aliasing { what: "windowed generator b + log ϑ (spectral)".into(), tail: spectral_tail, budget: GENERATOR_TAIL_BUDGET });
        }
        let c = op_weyl(&generator)?;
        let info = GeneratorInfo { weight: theta.label().to_string(), mollified, windowed: !constant, spectral_tail, norm: c.operator_norm_2() };
        Ok(Self { theta, b, a0, t_max, generator, c, info })
    }

    /// b + χ·log ϑ as sampled.
    pub fn generator(&self) -> &SampledSymbol {
        &self.generator
    }

    pub fn generator_info(&self) -> &GeneratorInfo {
        &self.info
    }

    pub fn domain(&self) -> Domain {
        *self.a0.domain()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t.abs() > self.t_max * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("|t| = {} exceeds t_max = {}", t.abs(), self.t_max)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GroupElement {
    pub t: f64,
    pub symbol: SampledSymbol,
    pub method: Method,
    /// Filled by the checks that compare routes; empty after a plain [`evolve`].
    pub residuals: Vec<RouteResidual>,
}

fn weyl(dom: &Domain) -> Quantization {
    Quantization::weyl(dom.ndim / 2)
}

/// e^{tC} as an operator.
pub fn propagator(problem: &EvolutionProblem, t: f64) -> Result<OperatorMatrix> {
    problem.check_time(t)?;
    let tc = problem.c.entries() * C64::new(t, 0.0);
    let e = expm(&tc).map_err(|e| match e {
        Error::ExpOverflow { norm } => Error::InvalidArgument(format!(
            "matrix exponential overflow: ‖tC‖₂ = {norm:.3e}; use a smaller t or a windowed ϑ"
        )),
        other => other,
    })?;
    OperatorMatrix::new(e, problem.c.axis(), problem.c.d(), Some(weyl(&problem.domain())))
}

fn rk4(problem: &EvolutionProblem, t: f64) -> Result<SampledSymbol> {
    let dom = problem.domain();
    let q = weyl(&dom);
    let norm = spectral_norm(problem.c.entries());
    let mut step = RK4_STEP * problem.t_max;
    while step * norm > RK4_STEP_NORM {
        step /= 2.0;
    }
    let steps = (t.abs() / step).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { t / steps as f64 };
    let c = &problem.c;
    // gen # a, read back as a symbol at every stage
    let rhs = |a: &SampledSymbol| -> Result<SampledSymbol> { symbol_from_matrix(&c.compose(&op_weyl(a)?)?, &q) };
    let mut a = problem.a0.clone();
    let (half, full) = (C64::new(dt / 2.0, 0.0), C64::new(dt, 0.0));
    for _ in 0..steps {
        let k1 = rhs(&a)?;
        let k2 = rhs(&a.add(&k1.scale(half))?)?;
        let k3 = rhs(&a.add(&k2.scale(half))?)?;
        let k4 = rhs(&a.add(&k3.scale(full))?)?;
        let incr = k1.add(&k2.scale(C64::new(2.0, 0.0)))?.add(&k3.scale(C64::new(2.0, 0.0)))?.add(&k4)?;
        a = a.add(&incr.scale(C64::new(dt / 6.0, 0.0)))?;
    }
    Ok(a)
}

/// a(t) by the requested route. t = 0 returns a₀ unchanged.
pub fn evolve(problem: &EvolutionProblem, t: f64, method: Method) -> Result<GroupElement> {
    problem.check_time(t)?;
    let symbol = if t == 0.0 {
        problem.a0.clone()
    } else {
        match method {
            Method::MatrixExp => {
                let m = propagator(problem, t)?.compose(&op_weyl(&problem.a0)?)?;
                symbol_from_matrix(&m, &weyl(&problem.domain()))?
            }
            Method::Rk4 => rk4(problem, t)?,
        }
    };
    Ok(GroupElement { t, symbol, method, residuals: vec![] })
}

/// Both routes at t; the matrix-exponential element carries the agreement residual.
pub fn route_agreement(problem: &EvolutionProblem, t: f64) -> Result<(GroupElement, GroupElement)> {
    let mut m = evolve(problem, t, Method::MatrixExp)?;
    let r = evolve(problem, t, Method::Rk4)?;
    m.residuals.push(central_residual(&format!("matrix_exp vs rk4 at t = {t}"), &m.symbol, &r.symbol, GROUP_TOL)?);
    Ok((m, r))
}

fn sharp(a: &SampledSymbol, b: &SampledSymbol) -> Result<SampledSymbol> {
    let q = weyl(a.domain());
    symbol_from_matrix(&op_weyl(a)?.compose(&op_weyl(b)?)?, &q)
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupLaw {
    /// a(t1)#a(t2) against a(t1 + t2).
    pub law: RouteResidual,
    /// ∂_t a − a#(b + log ϑ) at t = 1/2 by centred differences.
    pub right_ode: RouteResidual,
    pub pass: bool,
}

/// Centred-difference step for the ODE residual.
const ODE_DT: f64 = 1e-3;

/// Group law and the right-sided equation; requires a₀ ≡ 1 (ω ≡ 1).
pub fn group_law_check(problem: &EvolutionProblem, t1: f64, t2: f64) -> Result<GroupLaw> {
    let v = problem.a0.values();
    if !is_constant(&problem.a0) || v[0] != C64::new(1.0, 0.0) {
        return Err(Error::InvalidArgument("the group law needs a0 ≡ 1".into()));
    }
    let a1 = evolve(problem, t1, Method::MatrixExp)?.symbol;
    let a2 = evolve(problem, t2, Method::MatrixExp)?.symbol;
    let a12 = evolve(problem, t1 + t2, Method::MatrixExp)?.symbol;
    let law = central_residual(&format!("a({t1})#a({t2}) = a({})", t1 + t2), &sharp(&a1, &a2)?, &a12, GROUP_TOL)?;
    let t = 0.5f64.min(problem.t_max - ODE_DT);
    let ap = evolve(problem, t + ODE_DT, Method::MatrixExp)?.symbol;
    let am = evolve(problem, t - ODE_DT, Method::MatrixExp)?.symbol;
    let at = evolve(problem, t, Method::MatrixExp)?.symbol;
    let dot = ap.sub(&am)?.scale(C64::new(1.0 / (2.0 * ODE_DT), 0.0));
    let right = sharp(&at, &problem.generator)?;
    let right_ode = central_residual(&format!("∂t a = a#(b + log ϑ) at t = {t}"), &dot, &right, ODE_TOL)?;
    let pass = law.pass && right_ode.pass;
    Ok(GroupLaw { law, right_ode, pass })
}

#[derive(Clone, Debug)]
pub struct InversePair {
    /// a(1)
    pub a: SampledSymbol,
    /// a(−1)
    pub b: SampledSymbol,
    pub a_op: OperatorMatrix,
    pub b_op: OperatorMatrix,
    pub ab: RouteResidual,
    pub ba: RouteResidual,
    pub info: GeneratorInfo,
    pub pass: bool,
}

/// a = a(1), b = a(−1) for ϑ = ω₀, b = 0, a₀ ≡ 1 on the phase grid `dom`.
pub fn inverse_pair(omega0: &Weight, dom: Domain) -> Result<InversePair> {
    let problem = EvolutionProblem::new(omega0, dom, 1.0)?;
    let a_op = propagator(&problem, 1.0)?;
    let b_op = propagator(&problem, -1.0)?;
    let q = weyl(&dom);
    let a = symbol_from_matrix(&a_op, &q)?;
    let b = symbol_from_matrix(&b_op, &q)?;
    let one = SampledFunction::constant(dom, C64::new(1.0, 0.0));
    let ab = central_residual("a#b = 1", &sharp(&a, &b)?, &one, GROUP_TOL)?;
    let ba = central_residual("b#a = 1", &sharp(&b, &a)?, &one, GROUP_TOL)?;
    let pass = ab.pass && ba.pass;
    Ok(InversePair { a, b, a_op, b_op, ab, ba, info: problem.info, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftingReport {
    pub spec: MixedNormSpec,
    pub stats: RatioStats,
    pub k: f64,
    pub pass: bool,
    pub skipped: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Ratios ‖Op(a)f‖_{M^{p,q}_{(ω/ω₀)}} / ‖f‖_{M^{p,q}_{(ω)}} over the ensemble;
/// passes when max/min ≤ k.
pub fn lifting_report(
    op: &OperatorMatrix,
    omega: &Weight,
    omega0: &Weight,
    spec: &MixedNormSpec,
    ensemble: &[SampledFunction],
    window: &SampledFunction,
    k: f64,
) -> Result<LiftingReport> {
    if ensemble.is_empty() {
        return Err(Error::Empty("lifting ensemble".into()));
    }
    let target = omega.product(&omega0.reciprocal());
    let mut skipped = vec![];
    let mut warnings = vec![];
    let mut ratios = vec![];
    for (i, f) in ensemble.iter().enumerate() {
        if f.sup_norm() == 0.0 {
            skipped.push(i);
            warnings.push(format!("ensemble member {i} is identically zero; skipped"));
            continue;
        }
        let num = modulation_norm(&op.apply(f)?, window, &target, spec)?.value;
        let den = modulation_norm(f, window, omega, spec)?.value;
        ratios.push(num / den);
    }
    let stats = RatioStats::from_ratios(ratios)?;
    let pass = stats.spread <= k;
    Ok(LiftingReport { spec: *spec, stats, k, pass, skipped, warnings })
}

/// Largest relative ℓ² error of Op(a)Op(b)f ≈ f and Op(b)Op(a)f ≈ f over the ensemble.
pub fn round_trip(pair: &InversePair, ensemble: &[SampledFunction]) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in ensemble {
        let nf = f.l2_norm();
        if nf == 0.0 {
            continue;
        }
        for (first, second) in [(&pair.b_op, &pair.a_op), (&pair.a_op, &pair.b_op)] {
            let g = second.apply(&first.apply(f)?)?;
            worst = worst.max(g.sub(f)?.l2_norm() / nf);
        }
    }
    Ok(worst)
}
