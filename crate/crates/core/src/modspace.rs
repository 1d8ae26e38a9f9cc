//! Weighted mixed quasi-norms on the TF grid and modulation quasi-norms
//! ‖f‖_{M^{p,q}_{(ω)}} = ‖V_φ f · ω‖_{L^{p,q}}.

use crate::error::{Error, Result};
use crate::grid::{SampledFunction, SampledSymbol};
use crate::tfa;
use crate::weights::Weight;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormOrder {
    /// L^{p,q}_1: inner L^p in x, outer L^q in ξ.
    XThenXi,
    /// L^{p,q}_2: inner L^p in ξ, outer L^q in x.
    XiThenX,
}

/// Exponents in (0, ∞]; ∞ is written as `"inf"` in JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    #[serde(serialize_with = "ser_exp", deserialize_with = "de_exp")]
    pub p: f64,
    #[serde(serialize_with = "ser_exp", deserialize_with = "de_exp")]
    pub q: f64,
    #[serde(default = "default_order")]
    pub order: NormOrder,
}

fn default_order() -> NormOrder {
    NormOrder::XThenXi
}

fn ser_exp<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_exp<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Exp {
        Num(f64),
        Text(String),
    }
    match Exp::deserialize(d)? {
        Exp::Num(v) => Ok(v),
        Exp::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(f64::INFINITY),
        Exp::Text(s) => Err(serde::de::Error::custom(format!("exponent must be a number or \"inf\", got {s:?}"))),
    }
}

/// Smallest exponent accepted in experiments (x^{1/q} overflows below it).
pub const MIN_EXPERIMENT_EXPONENT: f64 = 0.1;

impl MixedNormSpec {
    pub fn new(p: f64, q: f64, order: NormOrder) -> Result<Self> {
        let s = Self { p, q, order };
        s.validate()?;
        Ok(s)
    }

    pub fn lp(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, NormOrder::XThenXi)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("mixed-norm exponent {name} must lie in (0, ∞], got {v}")));
            }
        }
        Ok(())
    }

    pub fn validate_for_experiment(&self) -> Result<()> {
        self.validate()?;
        if self.p < MIN_EXPERIMENT_EXPONENT || self.q < MIN_EXPERIMENT_EXPONENT {
            return Err(Error::InvalidArgument(format!(
                "exponents below {MIN_EXPERIMENT_EXPONENT} are rejected in experiments (p = {}, q = {})",
                self.p, self.q
            )));
        }
        Ok(())
    }

    /// Quasi-norm exponent r = min(1, p, q).
    pub fn r(&self) -> f64 {
        1f64.min(self.p).min(self.q)
    }
}

/// (cell · Σ v^p)^{1/p}, or max v for p = ∞, scaled by the max to avoid overflow.
fn lp_norm(vals: &[f64], p: f64, cell: f64) -> f64 {
    let m = vals.iter().cloned().fold(0.0, f64::max);
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    let s: f64 = vals.iter().map(|v| (v / m).powf(p)).sum();
    m * (cell * s).powf(1.0 / p)
}

/// Iterated quasi-norm of |F·ω| with quadrature factors h^d on each block of d variables.
pub fn mixed_norm(f: &SampledSymbol, omega: &Weight, spec: &MixedNormSpec) -> Result<f64> {
    spec.validate()?;
    let dom = *f.domain();
    if dom.ndim == 0 || dom.ndim % 2 != 0 {
        return Err(Error::GridMismatch(format!("mixed norms need phase-space data, got dimension {}", dom.ndim)));
    }
    let d = dom.ndim / 2;
    let nd = dom.n().pow(d as u32);
    let cell = dom.h().powi(d as i32);
    let mut p = vec![0.0; dom.ndim];
    let abs: Vec<f64> = (0..dom.len())
        .map(|i| {
            dom.point_into(i, &mut p);
            f.get(i).norm() * omega.eval(&p)
        })
        .collect();
    // flat index = ix·N^d + iξ
    let inner: Vec<f64> = (0..nd)
        .map(|outer| {
            let line: Vec<f64> = match spec.order {
                NormOrder::XThenXi => (0..nd).map(|ix| abs[ix * nd + outer]).collect(),
                NormOrder::XiThenX => (0..nd).map(|ixi| abs[outer * nd + ixi]).collect(),
            };
            lp_norm(&line, spec.p, cell)
        })
        .collect();
    Ok(lp_norm(&inner, spec.q, cell))
}

#[derive(Clone, Debug, Serialize)]
pub struct ModNormResult {
    pub value: f64,
    pub window_id: String,
    pub weight_id: String,
    pub spec: MixedNormSpec,
}

/// ‖V_φ f · ω‖_{L^{p,q}} with φ normalised to ‖φ‖₂ = 1.
pub fn modulation_norm(f: &SampledFunction, window: &SampledFunction, omega: &Weight, spec: &MixedNormSpec) -> Result<ModNormResult> {
    spec.validate_for_experiment()?;
    let phi = window.normalized()?;
    let v = tfa::stft(f, &phi)?;
    Ok(ModNormResult {
        value: mixed_norm(&v, omega, spec)?,
        window_id: window.label().unwrap_or("window").to_string(),
        weight_id: omega.label().to_string(),
        spec: *spec,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioStats {
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// max / min
    pub spread: f64,
}

impl RatioStats {
    pub fn from_ratios(ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::Empty("no ratios to summarise".into()));
        }
        let mut sorted = ratios.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len();
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        let (min, max) = (sorted[0], sorted[n - 1]);
        Ok(Self { ratios, min, max, median, spread: max / min })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowEquivalence {
    pub stats: RatioStats,
    pub k: f64,
    pub pass: bool,
    /// Ensemble indices skipped as identically zero.
    pub skipped: Vec<usize>,
    pub warnings: Vec<String>,
}

pub const DEFAULT_RATIO_K: f64 = 10.0;

/// Ratios ‖f‖_{φ1}/‖f‖_{φ2} over an ensemble; passes when max/min ≤ k.
pub fn window_equivalence_report(
    ensemble: &[SampledFunction],
    phi1: &SampledFunction,
    phi2: &SampledFunction,
    omega: &Weight,
    spec: &MixedNormSpec,
    k: f64,
) -> Result<WindowEquivalence> {
    if ensemble.is_empty() {
        return Err(Error::Empty("window-equivalence ensemble".into()));
    }
    let skipped: Vec<usize> = ensemble.iter().enumerate().filter(|(_, f)| f.sup_norm() == 0.0).map(|(i, _)| i).collect();
    let warnings = skipped.iter().map(|i| format!("ensemble member {i} is identically zero; skipped")).collect();
    let ratios: Vec<f64> = ensemble
        .par_iter()
        .enumerate()
        .filter(|(i, _)| !skipped.contains(i))
        .map(|(_, f)| Ok(modulation_norm(f, phi1, omega, spec)?.value / modulation_norm(f, phi2, omega, spec)?.value))
        .collect::<Result<_>>()?;
    let stats = RatioStats::from_ratios(ratios)?;
    let pass = stats.spread <= k;
    Ok(WindowEquivalence { stats, k, pass, skipped, warnings })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiTriangle {
    pub r: f64,
    /// ‖f+g‖^r
    pub lhs: f64,
    /// ‖f‖^r + ‖g‖^r
    pub rhs: f64,
    pub holds: bool,
}

/// r-power triangle inequality with r = min(1, p, q) and relative slack 1e-9.
/// A violation is a finding to be logged, not an error.
pub fn quasi_triangle(
    f: &SampledFunction,
    g: &SampledFunction,
    window: &SampledFunction,
    omega: &Weight,
    spec: &MixedNormSpec,
) -> Result<QuasiTriangle> {
    let r = spec.r();
    let sum = f.add(g)?;
    let nf = modulation_norm(f, window, omega, spec)?.value;
    let ng = modulation_norm(g, window, omega, spec)?.value;
    let ns = modulation_norm(&sum, window, omega, spec)?.value;
    let (lhs, rhs) = (ns.powf(r), nf.powf(r) + ng.powf(r));
    Ok(QuasiTriangle { r, lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-9) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridMode};
    use num_complex::Complex64 as C64;

    #[test]
    fn constant_function_norms() {
        let g = make_grid(16, 1, GridMode::SelfDual).unwrap();
        let one = SampledFunction::constant(g.phase(), C64::new(1.0, 0.0));
        let w = Weight::constant(1.0).unwrap();
        let nh = 16.0 * g.h();
        let v = mixed_norm(&one, &w, &MixedNormSpec::lp(2.0, 2.0).unwrap()).unwrap();
        assert!((v - nh).abs() < 1e-12 * nh);
        let v = mixed_norm(&one, &w, &MixedNormSpec::lp(1.0, f64::INFINITY).unwrap()).unwrap();
        assert!((v - nh).abs() < 1e-12 * nh);
    }

    #[test]
    fn exponents_are_validated() {
        assert!(MixedNormSpec::lp(0.0, 1.0).is_err());
        assert!(MixedNormSpec::lp(1.0, -2.0).is_err());
        assert!(MixedNormSpec::lp(0.05, 1.0).unwrap().validate_for_experiment().is_err());
        let s: MixedNormSpec = serde_json::from_str(r#"{"p": "inf", "q": 0.5}"#).unwrap();
        assert!(s.p.is_infinite() && s.q == 0.5 && s.order == NormOrder::XThenXi);
        assert_eq!(s.r(), 0.5);
        assert!(serde_json::from_str::<MixedNormSpec>(r#"{"p": "big", "q": 1}"#).is_err());
    }
}
