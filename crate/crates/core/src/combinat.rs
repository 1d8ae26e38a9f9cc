//! Exact combinatorics behind the Faà di Bruno estimates: binomial sums,
//! composition counts, the S_j recursion, the multivariate Faà di Bruno
//! formula and the factorial sums Σ_k (1/k) Σ_{Ω_{k,α}} Π(β_j!)^{s₀−1}.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::collections::HashMap;

/// Largest |α| accepted by [`factorial_sum_bound`].
pub const MAX_FACTORIAL_ORDER: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(c: &[u32]) -> Self {
        Self(c.to_vec())
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// α! = Π α_j!
    pub fn factorial(&self) -> BigUint {
        self.0.iter().map(|&c| factorial(c)).product()
    }

    /// β ≤ α componentwise
    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

fn big_str<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// C(n, k), zero for k > n.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Two sides of an exact identity.
#[derive(Clone, Debug, Serialize)]
pub struct Identity {
    #[serde(serialize_with = "big_str")]
    pub lhs: BigUint,
    #[serde(serialize_with = "big_str")]
    pub rhs: BigUint,
    pub holds: bool,
}

impl Identity {
    fn new(lhs: BigUint, rhs: BigUint) -> Self {
        let holds = lhs == rhs;
        Self { lhs, rhs, holds }
    }
}

fn nonneg(v: i64, name: &str) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::InvalidArgument(format!("{name} must be nonnegative, got {v}")))
}

/// Σ_{j=0}^k C(n+j, j) against C(n+k+1, k).
pub fn binomial_sum(n: i64, k: i64) -> Result<Identity> {
    let (n, k) = (nonneg(n, "n")?, nonneg(k, "k")?);
    let lhs = (0..=k).map(|j| binomial(n + j, j)).sum();
    Ok(Identity::new(lhs, binomial(n + k + 1, k)))
}

/// |Ω_{k,α}|: k-tuples of multi-indices (zeros allowed) summing to α,
/// Π_j C(α_j + k − 1, k − 1) by stars and bars.
pub fn composition_count(alpha: &MultiIndex, k: u32) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::InvalidArgument("composition count needs k ≥ 1".into()));
    }
    Ok(alpha.0.iter().map(|&a| binomial(a as u64 + k as u64 - 1, k as u64 - 1)).product())
}

/// The count Π_j C(α_j + k, k) as stated for Ω_{k,α}; it exceeds the true count
/// (it is |Ω_{k+1,α}|) and is kept only for reporting.
pub fn stated_set_count(alpha: &MultiIndex, k: u32) -> BigUint {
    alpha.0.iter().map(|&a| binomial(a as u64 + k as u64, k as u64)).product()
}

/// S_j(γ) by S_1(γ) = γ + 1, S_{j+1}(γ) = Σ_{β≤γ} S_j(β), against C(γ + j, j).
pub fn s_recursion(gamma: u64, j: u64) -> Result<Identity> {
    if j == 0 {
        return Err(Error::InvalidArgument("the S_j recursion starts at j = 1".into()));
    }
    let mut row: Vec<BigUint> = (0..=gamma).map(|b| BigUint::from(b + 1)).collect();
    for _ in 1..j {
        let mut acc = BigUint::zero();
        for v in row.iter_mut() {
            acc += &*v;
            *v = acc.clone();
        }
    }
    Ok(Identity::new(row[gamma as usize].clone(), binomial(gamma + j, j)))
}

/// Every k-tuple (β₁, …, β_k) with Σβ_j = α, optionally with every β_j ≠ 0,
/// passed to `visit` as a slice.
pub fn for_each_composition(alpha: &MultiIndex, k: usize, nonzero: bool, visit: &mut impl FnMut(&[MultiIndex])) {
    let mut parts = vec![MultiIndex::zero(alpha.dim()); k];
    if k == 0 {
        if alpha.is_zero() {
            visit(&parts);
        }
        return;
    }
    let mut rest = alpha.clone();
    rec(&mut parts, 0, &mut rest, nonzero, visit);
}

fn rec(parts: &mut Vec<MultiIndex>, pos: usize, rest: &mut MultiIndex, nonzero: bool, visit: &mut impl FnMut(&[MultiIndex])) {
    if pos + 1 == parts.len() {
        if nonzero && rest.is_zero() {
            return;
        }
        parts[pos] = rest.clone();
        visit(parts);
        return;
    }
    // enumerate β ≤ rest as a mixed-radix counter
    let d = rest.dim();
    let mut beta = vec![0u32; d];
    loop {
        let b = MultiIndex(beta.clone());
        if !(nonzero && b.is_zero()) {
            for i in 0..d {
                rest.0[i] -= beta[i];
            }
            parts[pos] = b;
            rec(parts, pos + 1, rest, nonzero, visit);
            for i in 0..d {
                rest.0[i] += beta[i];
            }
        }
        let mut i = 0;
        while i < d {
            if beta[i] < rest.0[i] {
                beta[i] += 1;
                break;
            }
            beta[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }
}

fn ratio(n: BigUint) -> BigRational {
    BigRational::from_integer(n.into())
}

/// ∂^α f(g(x)) by the multivariate Faà di Bruno formula
/// ∂^α f(g)/α! = Σ_{1≤k≤|α|} f^{(k)}(g)/k! Σ_{β₁+…+β_k=α, β_j≠0} Π ∂^{β_j}g/β_j!.
/// `outer[k]` is f^{(k)}(g(x)); `inner` maps β to ∂^β g(x).
pub fn faa_di_bruno(outer: &[BigRational], inner: &HashMap<MultiIndex, BigRational>, alpha: &MultiIndex) -> Result<BigRational> {
    let n = alpha.order() as usize;
    if n == 0 {
        return outer.first().cloned().ok_or_else(|| Error::MissingDerivative("f^(0)".into()));
    }
    if outer.len() <= n {
        return Err(Error::MissingDerivative(format!("f^({}) (outer derivatives up to order {n} are needed)", outer.len())));
    }
    let mut missing: Option<MultiIndex> = None;
    let mut total = BigRational::zero();
    for k in 1..=n {
        let mut inner_sum = BigRational::zero();
        for_each_composition(alpha, k, true, &mut |parts| {
            let mut prod = BigRational::one();
            for b in parts {
                match inner.get(b) {
                    Some(v) => prod *= v / ratio(b.factorial()),
                    None => {
                        missing.get_or_insert_with(|| b.clone());
                        return;
                    }
                }
            }
            inner_sum += prod;
        });
        if let Some(b) = missing {
            return Err(Error::MissingDerivative(format!("∂^{:?} g", b.0)));
        }
        total += &outer[k] / ratio(factorial(k as u32)) * inner_sum;
    }
    Ok(total * ratio(alpha.factorial()))
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorialSum {
    pub alpha: MultiIndex,
    pub s0: f64,
    /// Exact value for s₀ = 1 as "p/q".
    pub exact: Option<String>,
    pub value: f64,
    /// Rigorous upper bound on the computed value (rounding accounted for).
    pub upper: f64,
    /// 16^{|α|} for d = 1, C₀^{|α|} with C₀ = 4(1 + |α|) otherwise.
    pub bound: f64,
    pub pass: bool,
}

/// Σ_{1≤k≤|α|} (1/k) Σ_{β∈Ω_{k,α}} Π(β_j!)^{s₀−1}, with Ω_{k,α} the k-tuples
/// summing to α (zeros allowed). Exact rational for s₀ = 1; otherwise f64 with
/// a summation-error bound added before the comparison.
pub fn factorial_sum_bound(alpha: &MultiIndex, s0: f64) -> Result<FactorialSum> {
    let n = alpha.order();
    if n == 0 {
        return Err(Error::InvalidArgument("factorial sums need α ≠ 0".into()));
    }
    if n > MAX_FACTORIAL_ORDER {
        return Err(Error::TooLarge(format!("|α| = {n} exceeds {MAX_FACTORIAL_ORDER} (enumeration cost)")));
    }
    if !(s0 > 0.0 && s0 <= 1.0) {
        return Err(Error::InvalidArgument(format!("s0 must lie in (0, 1], got {s0}")));
    }
    let bound = if alpha.dim() == 1 { 16f64.powi(n as i32) } else { (4.0 * (1.0 + n as f64)).powi(n as i32) };
    let (exact, value, upper) = if s0 == 1.0 {
        let mut acc = BigRational::zero();
        for k in 1..=n {
            acc += ratio(composition_count(alpha, k)?) / ratio(BigUint::from(k));
        }
        let v = acc.to_f64().unwrap_or(f64::INFINITY);
        (Some(acc.to_string()), v, v)
    } else {
        let lnfact: Vec<f64> = (0..=n).map(|m| (1..=m).map(|i| (i as f64).ln()).sum()).collect();
        let mut value = 0.0;
        let mut terms = 0u64;
        for k in 1..=n as usize {
            let mut inner = 0.0;
            for_each_composition(alpha, k, false, &mut |parts| {
                let l: f64 = parts.iter().flat_map(|b| b.0.iter()).map(|&c| lnfact[c as usize]).sum();
                inner += ((s0 - 1.0) * l).exp();
                terms += 1;
            });
            value += inner / k as f64;
        }
        // every term lies in (0, 1]; recursive summation of m positive terms has
        // relative error ≤ (m − 1)ε, and each exp/ln is within a few ulps
        let upper = value * (1.0 + (terms as f64 + 64.0) * 4.0 * f64::EPSILON);
        (None, value, upper)
    };
    Ok(FactorialSum { alpha: alpha.clone(), s0, exact, value, upper, bound, pass: upper <= bound })
}
