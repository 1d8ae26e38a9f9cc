//! Weights on phase space: builtin families, moderation and Gevrey-moderation
//! certificates, mollification and log-weights.
//!
//! Weights are stored through their logarithm so that subexponential weights
//! can be compared far out (|X| ~ 10⁴) without overflow.

use crate::error::{Error, Result};
use crate::grid::{Domain, SampledFunction};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Claimed class. Ordered by inclusion: P ⊆ P⁰_{E,s} ⊆ P_{E,s} ⊆ P_E.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeightClass {
    P,
    P0Es,
    PEs,
    PE,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct WeightParams {
    /// Gevrey order.
    pub s: Option<f64>,
    /// Growth rate.
    pub r: Option<f64>,
    /// Polynomial power.
    pub t: Option<f64>,
}

/// Config-level description of a builtin weight, e.g.
/// `{"kind": "bracket_power", "params": {"t": 2}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    BracketPower {
        t: f64,
    },
    Subexp {
        r: f64,
        s: f64,
        /// Claim P⁰_{E,s} ("every r") instead of P_{E,s}.
        #[serde(default)]
        every_rate: bool,
    },
    Product {
        left: Box<WeightSpec>,
        right: Box<WeightSpec>,
    },
    Reciprocal {
        of: Box<WeightSpec>,
    },
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

type LnFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A positive function on ℝ^n, held as X ↦ ln ω(X).
#[derive(Clone)]
pub struct Weight {
    ln: LnFn,
    class: WeightClass,
    params: WeightParams,
    label: String,
    warnings: Vec<String>,
    moderation: Option<Arc<(Weight, f64)>>,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("label", &self.label)
            .field("class", &self.class)
            .field("params", &self.params)
            .field("moderation", &self.moderation.as_ref().map(|m| (m.0.label.clone(), m.1)))
            .finish()
    }
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl Weight {
    /// Custom weight from its logarithm.
    pub fn from_ln<F>(label: impl Into<String>, class: WeightClass, params: WeightParams, ln: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { ln: Arc::new(ln), class, params, label: label.into(), warnings: vec![], moderation: None }
    }

    pub fn bracket_power(t: f64) -> Self {
        Self::from_ln(format!("<X>^{t}"), WeightClass::P, WeightParams { t: Some(t), ..Default::default() }, move |p| {
            0.5 * t * (1.0 + p.iter().map(|v| v * v).sum::<f64>()).ln()
        })
    }

    /// e^{r|X|^{1/s}}; s < 1 is accepted with a recorded warning.
    pub fn subexp(r: f64, s: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("subexp rate r must be ≥ 0, got {r}")));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!("subexp order s must be positive, got {s}")));
        }
        let mut w = Self::from_ln(
            format!("exp({r}|X|^(1/{s}))"),
            WeightClass::PEs,
            WeightParams { s: Some(s), r: Some(r), t: None },
            move |p| r * norm(p).powf(1.0 / s),
        );
        if s < 1.0 {
            w.warnings.push(format!("subexp with s = {s} < 1 lies outside the s ≥ 1 range used for symbol groups"));
        }
        Ok(w)
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("constant weight must be positive and finite, got {c}")));
        }
        let lc = c.ln();
        Ok(Self::from_ln(format!("{c}"), WeightClass::P, WeightParams { t: Some(0.0), ..Default::default() }, move |_| lc))
    }

    /// Pointwise product; the class is the larger of the two.
    pub fn product(&self, other: &Weight) -> Weight {
        let (a, b) = (self.ln.clone(), other.ln.clone());
        let pick = |x: Option<f64>, y: Option<f64>, f: fn(f64, f64) -> f64| match (x, y) {
            (Some(x), Some(y)) => Some(f(x, y)),
            (x, None) => x,
            (None, y) => y,
        };
        let params = WeightParams {
            s: pick(self.params.s, other.params.s, f64::min),
            r: pick(self.params.r, other.params.r, |x, y| x + y),
            t: pick(self.params.t, other.params.t, |x, y| x.abs() + y.abs()),
        };
        let mut w = Self::from_ln(format!("({})·({})", self.label, other.label), self.class.max(other.class), params, move |p| {
            a(p) + b(p)
        });
        w.warnings = self.warnings.iter().chain(&other.warnings).cloned().collect();
        w
    }

    pub fn reciprocal(&self) -> Weight {
        let a = self.ln.clone();
        let mut params = self.params;
        params.t = params.t.map(|t| -t);
        let mut w = Self::from_ln(format!("1/({})", self.label), self.class, params, move |p| -a(p));
        w.warnings = self.warnings.clone();
        w
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.ln)(p).exp()
    }

    pub fn ln_eval(&self, p: &[f64]) -> f64 {
        (self.ln)(p)
    }

    pub fn class(&self) -> WeightClass {
        self.class
    }

    pub fn params(&self) -> WeightParams {
        self.params
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Attached moderation data (v, C): ω(x+y) ≤ C ω(x) v(y).
    pub fn moderation(&self) -> Option<(&Weight, f64)> {
        self.moderation.as_ref().map(|m| (&m.0, m.1))
    }

    pub fn with_moderation(mut self, v: &Weight, c: f64) -> Self {
        self.moderation = Some(Arc::new((v.clone(), c)));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Node values as a (real) sampled function.
    pub fn sample(&self, dom: Domain) -> SampledFunction {
        let ln = self.ln.clone();
        SampledFunction::from_real_fn(dom, move |p| ln(p).exp()).with_label(self.label.clone())
    }
}

pub fn builtin_weight(spec: &WeightSpec) -> Result<Weight> {
    match spec {
        WeightSpec::BracketPower { t } => {
            if !t.is_finite() {
                return Err(Error::InvalidArgument("bracket_power exponent must be finite".into()));
            }
            Ok(Weight::bracket_power(*t))
        }
        WeightSpec::Subexp { r, s, every_rate } => {
            let mut w = Weight::subexp(*r, *s)?;
            if *every_rate {
                w.class = WeightClass::P0Es;
            }
            Ok(w)
        }
        WeightSpec::Product { left, right } => Ok(builtin_weight(left)?.product(&builtin_weight(right)?)),
        WeightSpec::Reciprocal { of } => Ok(builtin_weight(of)?.reciprocal()),
        WeightSpec::Constant { value } => Weight::constant(*value),
    }
}

/// Sample pairs for moderation certificates: all pairs of central phase-grid
/// nodes plus seeded uniform random pairs from the grid box.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub random_pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub seed: u64,
}

pub const RANDOM_PAIRS: usize = 1000;

impl SampleSet {
    pub fn standard(dom: &Domain, seed: u64) -> Self {
        let points = dom.central_indices().into_iter().map(|i| dom.point(i)).collect();
        let l = dom.axis.half_width();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || (0..dom.ndim).map(|_| rng.gen_range(-l..l)).collect::<Vec<f64>>();
        let random_pairs = (0..RANDOM_PAIRS).map(|_| (draw(), draw())).collect();
        Self { points, random_pairs, seed }
    }

    /// Arbitrary explicit pairs (no node grid).
    pub fn from_pairs(pairs: Vec<(Vec<f64>, Vec<f64>)>, seed: u64) -> Self {
        Self { points: vec![], random_pairs: pairs, seed }
    }

    pub fn pair_count(&self) -> usize {
        self.points.len() * self.points.len() + self.random_pairs.len()
    }

    /// Max over all pairs of f(x, y), with the maximizing pair; parallel, order-independent.
    fn max_over<F>(&self, f: F) -> (f64, Vec<f64>, Vec<f64>)
    where
        F: Fn(&[f64], &[f64]) -> f64 + Sync,
    {
        let better = |a: (f64, usize, usize), b: (f64, usize, usize)| {
            // ties broken by index so the reported pair does not depend on scheduling
            if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) || a.0.is_nan() {
                b
            } else {
                a
            }
        };
        let np = self.points.len();
        let init = (f64::NEG_INFINITY, usize::MAX, usize::MAX);
        let grid = (0..np)
            .into_par_iter()
            .map(|i| (0..np).fold(init, |acc, j| better(acc, (f(&self.points[i], &self.points[j]), i, j))))
            .reduce(|| init, better);
        let rand = (0..self.random_pairs.len())
            .into_par_iter()
            .map(|k| {
                let (x, y) = &self.random_pairs[k];
                (f(x, y), np + k, 0)
            })
            .reduce(|| init, better);
        let best = better(grid, rand);
        if best.1 == usize::MAX {
            return (best.0, vec![], vec![]);
        }
        if best.1 < np {
            (best.0, self.points[best.1].clone(), self.points[best.2].clone())
        } else {
            let (x, y) = &self.random_pairs[best.1 - np];
            (best.0, x.clone(), y.clone())
        }
    }

    fn max_pair_norm(&self) -> f64 {
        let pn = self.points.iter().map(|p| norm(p)).fold(0.0, f64::max);
        let rn = self.random_pairs.iter().map(|(x, y)| norm(x).max(norm(y))).fold(0.0, f64::max);
        pn.max(rn)
    }
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// Best constant in ω(x+y) ≤ C ω(x) v(y) over the sample pairs (no conditions on v).
pub fn moderation_constant(omega: &Weight, v: &Weight, samples: &SampleSet) -> f64 {
    samples.max_over(|x, y| (omega.ln_eval(&add(x, y)) - omega.ln_eval(x) - v.ln_eval(y)).exp()).0
}

#[derive(Clone, Debug, Serialize)]
pub struct ModerationCertificate {
    /// max of ω(x+y)/(ω(x)v(y)) and ω(x)/(ω(x+y)v(y)) over the sample pairs.
    pub c_hat: f64,
    /// The upper-chain part alone.
    pub c_upper: f64,
    /// The lower-chain part alone: max ω(x)/(ω(x+y)v(y)).
    pub c_lower: f64,
    pub sample_count: usize,
    pub max_pair_norm: f64,
    pub seed: u64,
}

pub const SUBMULTIPLICATIVE_SLACK: f64 = 1e-12;

/// Checks that v is even, ≥ 1 and submultiplicative on the sample set.
pub fn check_submultiplicative(v: &Weight, samples: &SampleSet) -> Result<()> {
    let slack = SUBMULTIPLICATIVE_SLACK;
    let (worst, x, y) = samples.max_over(|x, y| v.ln_eval(&add(x, y)) - v.ln_eval(x) - v.ln_eval(y));
    if worst > slack {
        return Err(Error::Submultiplicative { x, y, detail: format!("v(x+y)/(v(x)v(y)) = {:.6}", worst.exp()) });
    }
    let (worst, x, _) = samples.max_over(|x, _| {
        let neg: Vec<f64> = x.iter().map(|c| -c).collect();
        (v.ln_eval(x) - v.ln_eval(&neg)).abs()
    });
    if worst > slack {
        return Err(Error::Submultiplicative { x: x.clone(), y: x, detail: "v(-x) ≠ v(x)".into() });
    }
    let (worst, x, _) = samples.max_over(|x, _| -v.ln_eval(x));
    if worst > slack {
        return Err(Error::Submultiplicative { x: x.clone(), y: vec![], detail: format!("v(x) = {:.6} < 1", (-worst).exp()) });
    }
    Ok(())
}

/// Moderation certificate for the chain C⁻¹ω(x)/v(y) ≤ ω(x+y) ≤ Cω(x)v(y)
/// with v submultiplicative.
pub fn certify_moderate(omega: &Weight, v: &Weight, samples: &SampleSet) -> Result<ModerationCertificate> {
    check_submultiplicative(v, samples)?;
    let c_upper = moderation_constant(omega, v, samples);
    let c_lower = samples.max_over(|x, y| (omega.ln_eval(x) - omega.ln_eval(&add(x, y)) - v.ln_eval(y)).exp()).0;
    Ok(ModerationCertificate {
        c_hat: c_upper.max(c_lower),
        c_upper,
        c_lower,
        sample_count: samples.pair_count(),
        max_pair_norm: samples.max_pair_norm(),
        seed: samples.seed,
    })
}

/// Radial scan used for the "some/every r" and polynomial-moderation claims:
/// points 0 and ρ·u for log-uniform radii in [r_min, r_max] and a fixed set of
/// directions. C(R) is the sup of the ratio over pairs with |x|, |y| ≤ R; a
/// claim passes when C(R) has saturated, i.e. C(r_max) ≤ (1 + tol)·C(r_max/√10).
#[derive(Clone, Debug, Serialize)]
pub struct ScanOptions {
    pub dim: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub radii_per_decade: usize,
    pub directions: usize,
    pub seed: u64,
    pub saturation_tol: f64,
}

impl ScanOptions {
    pub fn new(dim: usize) -> Self {
        Self { dim, r_min: 1e-2, r_max: 1e4, radii_per_decade: 8, directions: 16, seed: 7, saturation_tol: 1e-2 }
    }

    fn radii(&self) -> Vec<f64> {
        let decades = (self.r_max / self.r_min).log10();
        let count = (decades * self.radii_per_decade as f64).round() as usize;
        (0..=count).map(|k| self.r_min * 10f64.powf(k as f64 / self.radii_per_decade as f64)).collect()
    }

    fn unit_directions(&self) -> Vec<Vec<f64>> {
        let dim = self.dim;
        if dim == 1 {
            return vec![vec![1.0], vec![-1.0]];
        }
        if dim == 2 {
            let m = self.directions.max(4);
            return (0..m)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect();
        }
        let mut out = vec![];
        for i in 0..dim {
            for sgn in [1.0, -1.0] {
                let mut e = vec![0.0; dim];
                e[i] = sgn;
                out.push(e);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        while out.len() < self.directions.max(2 * dim) {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm(&v);
            if n > 1e-3 {
                out.push(v.iter().map(|c| c / n).collect());
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    /// Radii R_k and C(R_k) (as ln C to survive overflow).
    pub radii: Vec<f64>,
    pub ln_c: Vec<f64>,
    pub c_hat: f64,
    pub saturated: bool,
}

/// Sup-profile of exp(g(x, y)) over the radial scan.
pub fn radial_scan<F>(opts: &ScanOptions, g: F) -> ScanResult
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let radii = opts.radii();
    let dirs = opts.unit_directions();
    // point list: (radius index or None for the origin, coordinates)
    let mut pts: Vec<(usize, Vec<f64>)> = vec![(0, vec![0.0; opts.dim])];
    for (k, &r) in radii.iter().enumerate() {
        for u in &dirs {
            pts.push((k, u.iter().map(|c| c * r).collect()));
        }
    }
    let nr = radii.len();
    let per_radius: Vec<f64> = pts
        .par_iter()
        .map(|(kx, x)| {
            let mut best = vec![f64::NEG_INFINITY; nr];
            for (ky, y) in &pts {
                let v = g(x, y);
                let k = (*kx).max(*ky);
                if v > best[k] || v.is_nan() {
                    best[k] = if v.is_nan() { f64::INFINITY } else { v };
                }
            }
            best
        })
        .reduce(|| vec![f64::NEG_INFINITY; nr], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect());
    let mut ln_c = Vec::with_capacity(nr);
    let mut run = f64::NEG_INFINITY;
    for v in per_radius {
        run = run.max(v);
        ln_c.push(run);
    }
    let back = (opts.radii_per_decade / 2).max(1);
    let last = ln_c[nr - 1];
    let earlier = ln_c[nr.saturating_sub(1 + back)];
    let saturated = last.is_finite() && last - earlier <= (1.0 + opts.saturation_tol).ln();
    ScanResult { radii, c_hat: last.exp(), ln_c, saturated }
}

#[derive(Clone, Debug, Serialize)]
pub struct RateResult {
    pub r: f64,
    pub c_hat: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GevreyCertificate {
    pub s: f64,
    pub rates: Vec<RateResult>,
    /// Required for a P⁰_{E,s} claim.
    pub every_rate: bool,
    /// Required for a P_{E,s} claim.
    pub some_rate: bool,
}

/// For each r: the best constant in ω(x+y) ≤ C ω(x) e^{r|y|^{1/s}} on the radial scan.
pub fn certify_gevrey_moderate(omega: &Weight, s: f64, rates: &[f64], opts: &ScanOptions) -> Result<GevreyCertificate> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("Gevrey order must be positive, got {s}")));
    }
    let rates: Vec<RateResult> = rates
        .iter()
        .map(|&r| {
            let res = radial_scan(opts, |x, y| omega.ln_eval(&add(x, y)) - omega.ln_eval(x) - r * norm(y).powf(1.0 / s));
            RateResult { r, c_hat: res.c_hat, pass: res.saturated }
        })
        .collect();
    let every_rate = !rates.is_empty() && rates.iter().all(|r| r.pass);
    let some_rate = rates.iter().any(|r| r.pass);
    Ok(GevreyCertificate { s, rates, every_rate, some_rate })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassCertificate {
    pub claimed: WeightClass,
    pub pass: bool,
    pub detail: String,
}

/// Checks the weight's claimed class: P via polynomial moderation against
/// ⟨·⟩^{|t|}, the Gevrey classes via [`certify_gevrey_moderate`] over `rates`,
/// P_E via moderation against e^{r|y|} for some listed r.
pub fn certify_class(omega: &Weight, rates: &[f64], opts: &ScanOptions) -> Result<ClassCertificate> {
    let claimed = omega.class();
    let (pass, detail) = match claimed {
        WeightClass::P => match omega.params().t {
            Some(t) => {
                let t = t.abs();
                let res = radial_scan(opts, |x, y| {
                    omega.ln_eval(&add(x, y)) - omega.ln_eval(x) - 0.5 * t * (1.0 + norm(y).powi(2)).ln()
                });
                (res.saturated, format!("moderate w.r.t. <y>^{t}: C = {:.6e}", res.c_hat))
            }
            None => (false, "no polynomial order recorded for a P claim".into()),
        },
        WeightClass::P0Es | WeightClass::PEs => {
            let s = omega.params().s.unwrap_or(1.0);
            let cert = certify_gevrey_moderate(omega, s, rates, opts)?;
            let pass = if claimed == WeightClass::P0Es { cert.every_rate } else { cert.some_rate };
            (pass, format!("s = {s}: {:?}", cert.rates.iter().map(|r| (r.r, r.pass)).collect::<Vec<_>>()))
        }
        WeightClass::PE => {
            let cert = certify_gevrey_moderate(omega, 1.0, rates, opts)?;
            (cert.some_rate, format!("exponential rates: {:?}", cert.rates.iter().map(|r| (r.r, r.pass)).collect::<Vec<_>>()))
        }
    };
    Ok(ClassCertificate { claimed, pass, detail })
}

/// Result of [`mollify`]: the weight ω₀ = ω ∗ φ, its node values, and the
/// equivalence ratios c₁ = min ω₀/ω, c₂ = max ω₀/ω over the nodes.
#[derive(Clone, Debug)]
pub struct Mollified {
    pub weight: Weight,
    pub samples: SampledFunction,
    pub c1: f64,
    pub c2: f64,
}

/// Bump entries below this fraction of the peak are dropped from the quadrature.
const BUMP_CUTOFF: f64 = 1e-17;

/// ω₀(X) = ∫ ω(X - Y) φ(Y) dY with φ normalised to unit integral, by
/// rectangle-rule quadrature over the bump's grid nodes (linear, not periodic,
/// convolution). The sum is done directly rather than by FFT: a growing ω has
/// a dynamic range on the extended grid that would swamp an FFT's relative
/// accuracy where ω is small. Off-grid evaluation uses the same quadrature.
pub fn mollify(omega: &Weight, bump: &SampledFunction) -> Result<Mollified> {
    let dom = *bump.domain();
    let peak = bump.sup_norm();
    if peak == 0.0 {
        return Err(Error::InvalidArgument("mollifier bump is identically zero".into()));
    }
    if let Some((i, v)) = bump.values().iter().enumerate().find(|(_, v)| v.re < -1e-14 * peak || v.im.abs() > 1e-14 * peak) {
        return Err(Error::InvalidArgument(format!("mollifier bump must be nonnegative; value {v} at node {:?}", dom.point(i))));
    }
    bump.check_alias_budget("mollifier bump")?;
    let mass: f64 = bump.values().iter().map(|v| v.re).sum::<f64>() * dom.cell();
    let terms: Vec<(Vec<f64>, f64)> = bump
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.re > BUMP_CUTOFF * peak)
        .map(|(i, v)| (dom.point(i), (v.re * dom.cell() / mass).ln()))
        .collect();
    let terms = Arc::new(terms);
    let inner = omega.ln.clone();
    let ln_conv = {
        let terms = terms.clone();
        move |x: &[f64]| {
            let mut buf = vec![0.0; x.len()];
            let vals: Vec<f64> = terms
                .iter()
                .map(|(y, lw)| {
                    for i in 0..x.len() {
                        buf[i] = x[i] - y[i];
                    }
                    inner(&buf) + lw
                })
                .collect();
            let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
        }
    };
    let mut weight = Weight::from_ln(format!("({})∗bump", omega.label), omega.class, omega.params, ln_conv);
    weight.warnings = omega.warnings.clone();
    let node_ln: Vec<f64> = (0..dom.len()).into_par_iter().map(|i| weight.ln_eval(&dom.point(i))).collect();
    let ratios: Vec<f64> = node_ln.iter().enumerate().map(|(i, l)| (l - omega.ln_eval(&dom.point(i))).exp()).collect();
    let c1 = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let c2 = ratios.iter().cloned().fold(0.0, f64::max);
    let samples = SampledFunction::from_values(dom, node_ln.iter().map(|l| C64::new(l.exp(), 0.0)).collect())?;
    Ok(Mollified { weight, samples, c1, c2 })
}

/// ϑ₀ = 1 + |log ω|. If ω carries moderation data (v, C) the result carries
/// (1 + |log v|, max(1, 1 + log C)).
pub fn log_weight(omega: &Weight) -> Weight {
    let inner = omega.ln.clone();
    let mut w = Weight::from_ln(
        format!("1+|log({})|", omega.label),
        WeightClass::P,
        WeightParams { t: Some(1.0), ..Default::default() },
        move |p| (1.0 + inner(p).abs()).ln(),
    );
    if let Some((v, c)) = omega.moderation() {
        let v1 = log_weight(v);
        w = w.with_moderation(&v1, (1.0 + c.ln()).max(1.0));
    }
    w
}

/// Central finite-difference gradient of ω at p with step `step`.
pub fn gradient_fd(omega: &Weight, p: &[f64], step: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    (0..p.len())
        .map(|i| {
            q[i] = p[i] + step;
            let up = omega.eval(&q);
            q[i] = p[i] - step;
            let dn = omega.eval(&q);
            q[i] = p[i];
            (up - dn) / (2.0 * step)
        })
        .collect()
}

/// max over points of ω(X)e^{-r|X|} and e^{-r|X|}/ω(X); both ≤ 1 means
/// e^{-r|X|} ≤ ω(X) ≤ e^{r|X|} holds on the points.
pub fn exponential_bounds(omega: &Weight, r: f64, points: &[Vec<f64>]) -> (f64, f64) {
    points.iter().fold((0.0f64, 0.0f64), |(up, lo), p| {
        let l = omega.ln_eval(p);
        let rn = r * norm(p);
        (up.max((l - rn).exp()), lo.max((-rn - l).exp()))
    })
}
