//! Uniform grids on ℝ^d and phase space ℝ^{2d}, sampled functions and quadrature.

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Default aliasing budget for functions supplied to experiments.
pub const DEFAULT_ALIAS_BUDGET: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GridMode {
    SelfDual,
    Custom(f64),
}

/// N equispaced nodes x_k = (k - N/2)·h.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    n: usize,
    h: f64,
    self_dual: bool,
    alias_budget: f64,
}

impl Grid1D {
    pub fn new(n: usize, mode: GridMode) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::Grid(format!("N must be even (got {n})")));
        }
        if n < 8 {
            return Err(Error::Grid(format!("N must be at least 8 (got {n})")));
        }
        match mode {
            GridMode::SelfDual => Ok(Self { n, h: (2.0 * PI / n as f64).sqrt(), self_dual: true, alias_budget: DEFAULT_ALIAS_BUDGET }),
            GridMode::Custom(h) => {
                if !(h > 0.0) || !h.is_finite() {
                    return Err(Error::Grid(format!("spacing h must be positive (got {h})")));
                }
                let self_dual = (h * h * n as f64 - 2.0 * PI).abs() < 1e-12;
                Ok(Self { n, h, self_dual, alias_budget: DEFAULT_ALIAS_BUDGET })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn is_self_dual(&self) -> bool {
        self.self_dual
    }

    /// Relative tail level tolerated outside |x| ≤ 3L/4 for functions on this grid.
    pub fn alias_budget(&self) -> f64 {
        self.alias_budget
    }

    /// Half-width L = N·h/2; the nodes cover [-L, L).
    pub fn half_width(&self) -> f64 {
        self.n as f64 * self.h / 2.0
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    /// Index of the node equal to x (within 1e-9·h), if any.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let k = (x / self.h).round() + (self.n / 2) as f64;
        if k < 0.0 || k >= self.n as f64 || (self.node(k as usize) - x).abs() > 1e-9 * self.h {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Node k lies in the central half: |x_k| ≤ L/2 = (N/4)·h.
    pub fn is_central(&self, k: usize) -> bool {
        (k as i64 - (self.n / 2) as i64).unsigned_abs() as usize * 4 <= self.n
    }

    fn same_nodes(&self, other: &Grid1D) -> bool {
        self.n == other.n && (self.h - other.h).abs() <= 1e-14 * self.h
    }
}

/// A tensor grid Π_{i<ndim} Grid1D: ℝ^d (ndim = d) or phase space (ndim = 2d).
/// Flat storage is row-major with the last coordinate fastest; phase-space
/// coordinates are ordered (x_1..x_d, ξ_1..ξ_d).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Domain {
    pub axis: Grid1D,
    pub ndim: usize,
}

impl Domain {
    pub fn new(axis: Grid1D, ndim: usize) -> Self {
        Self { axis, ndim }
    }

    pub fn n(&self) -> usize {
        self.axis.n
    }

    pub fn h(&self) -> f64 {
        self.axis.h
    }

    pub fn len(&self) -> usize {
        self.axis.n.pow(self.ndim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.axis.n; self.ndim]
    }

    /// Quadrature cell volume h^ndim.
    pub fn cell(&self) -> f64 {
        self.axis.h.powi(self.ndim as i32)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let n = self.axis.n;
        let mut out = vec![0; self.ndim];
        for i in (0..self.ndim).rev() {
            out[i] = idx % n;
            idx /= n;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &k| acc * self.axis.n + k)
    }

    pub fn point_into(&self, idx: usize, out: &mut [f64]) {
        let n = self.axis.n;
        let mut r = idx;
        for i in (0..self.ndim).rev() {
            out[i] = self.axis.node(r % n);
            r /= n;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.ndim];
        self.point_into(idx, &mut p);
        p
    }

    /// |X|_∞ ≤ L/2 at this node.
    pub fn is_central(&self, idx: usize) -> bool {
        let n = self.axis.n;
        let mut r = idx;
        for _ in 0..self.ndim {
            if !self.axis.is_central(r % n) {
                return false;
            }
            r /= n;
        }
        true
    }

    pub fn central_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_central(i)).collect()
    }

    /// Node in the outer band |X|_∞ > 3L/4 where the aliasing budget is measured.
    pub fn is_tail(&self, idx: usize) -> bool {
        let n = self.axis.n as i64;
        let mut r = idx;
        for _ in 0..self.ndim {
            let k = (r % self.axis.n) as i64 - n / 2;
            if 8 * k.abs() > 3 * n {
                return true;
            }
            r /= self.axis.n;
        }
        false
    }

    /// Index of -X (the reflection k ↦ N - k mod N on every axis).
    pub fn reflect_index(&self, idx: usize) -> usize {
        let n = self.axis.n;
        let mut out = 0;
        let mut mul = 1;
        let mut r = idx;
        for _ in 0..self.ndim {
            let k = r % n;
            out += ((n - k) % n) * mul;
            mul *= n;
            r /= n;
        }
        out
    }

    pub fn same_as(&self, other: &Domain) -> bool {
        self.ndim == other.ndim && self.axis.same_nodes(&other.axis)
    }

    pub fn ensure_same(&self, other: &Domain, what: &str) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: (N={}, h={}, dim={}) vs (N={}, h={}, dim={})",
                self.axis.n, self.axis.h, self.ndim, other.axis.n, other.axis.h, other.ndim
            )))
        }
    }
}

/// Phase-space grid for ℝ^{2d}; every component grid shares N and h.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseGrid {
    axis: Grid1D,
    d: usize,
}

impl PhaseGrid {
    pub fn axis(&self) -> Grid1D {
        self.axis
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.axis.n
    }

    pub fn h(&self) -> f64 {
        self.axis.h
    }

    /// Configuration space ℝ^d.
    pub fn config(&self) -> Domain {
        Domain::new(self.axis, self.d)
    }

    /// Phase space ℝ^{2d}.
    pub fn phase(&self) -> Domain {
        Domain::new(self.axis, 2 * self.d)
    }

    pub fn alias_budget(&self) -> f64 {
        self.axis.alias_budget
    }

    pub fn with_alias_budget(mut self, eps: f64) -> Self {
        self.axis.alias_budget = eps;
        self
    }

    pub fn from_phase_domain(dom: &Domain) -> Result<Self> {
        if dom.ndim == 0 || dom.ndim % 2 != 0 {
            return Err(Error::GridMismatch(format!("expected a phase-space domain, got dimension {}", dom.ndim)));
        }
        Ok(Self { axis: dom.axis, d: dom.ndim / 2 })
    }
}

pub fn make_grid(n: usize, d: usize, mode: GridMode) -> Result<PhaseGrid> {
    if d < 1 {
        return Err(Error::Grid("dimension d must be at least 1".into()));
    }
    Ok(PhaseGrid { axis: Grid1D::new(n, mode)?, d })
}

pub type Analytic = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;

/// Complex samples on a Domain, with an optional exact evaluator for off-grid points.
#[derive(Clone)]
pub struct SampledFunction {
    domain: Domain,
    values: Vec<C64>,
    analytic: Option<Analytic>,
    label: Option<String>,
}

/// Sampled function on phase space.
pub type SampledSymbol = SampledFunction;

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("domain", &self.domain)
            .field("label", &self.label)
            .field("analytic", &self.analytic.is_some())
            .field("len", &self.values.len())
            .finish()
    }
}

impl SampledFunction {
    /// Sample an analytic function; the evaluator is kept for off-grid use.
    pub fn from_fn<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(&[f64]) -> C64 + Send + Sync + 'static,
    {
        let mut p = vec![0.0; domain.ndim];
        let values = (0..domain.len())
            .map(|i| {
                domain.point_into(i, &mut p);
                f(&p)
            })
            .collect();
        Self { domain, values, analytic: Some(Arc::new(f)), label: None }
    }

    pub fn from_real_fn<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(domain, move |p| C64::new(f(p), 0.0))
    }

    pub fn from_values(domain: Domain, values: Vec<C64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "value array has length {} but the grid has {} nodes",
                values.len(),
                domain.len()
            )));
        }
        Ok(Self { domain, values, analytic: None, label: None })
    }

    pub fn constant(domain: Domain, c: C64) -> Self {
        Self::from_fn(domain, move |_| c)
    }

    pub fn zeros(domain: Domain) -> Self {
        Self::constant(domain, C64::new(0.0, 0.0))
    }

    /// Grid delta: value 1 at node `idx`, 0 elsewhere.
    pub fn delta(domain: Domain, idx: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); domain.len()];
        v[idx] = C64::new(1.0, 0.0);
        Self { domain, values: v, analytic: None, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn analytic(&self) -> Option<&Analytic> {
        self.analytic.as_ref()
    }

    pub fn has_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    /// Drop the analytic evaluator (forces interpolation off-grid).
    pub fn without_analytic(mut self) -> Self {
        self.analytic = None;
        self
    }

    pub fn get(&self, idx: usize) -> C64 {
        self.values[idx]
    }

    /// Pointwise map of the samples; the analytic evaluator is dropped.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { domain: self.domain, values: self.values.iter().map(|&v| f(v)).collect(), analytic: None, label: None }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.domain.ensure_same(&other.domain, "zip_with")?;
        Ok(Self {
            domain: self.domain,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            analytic: None,
            label: None,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.map(|v| v * c);
        if let Some(g) = &self.analytic {
            let g = g.clone();
            out.analytic = Some(Arc::new(move |p: &[f64]| g(p) * c));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a + b)?;
        if let (Some(f), Some(g)) = (&self.analytic, &other.analytic) {
            let (f, g) = (f.clone(), g.clone());
            out.analytic = Some(Arc::new(move |p: &[f64]| f(p) + g(p)));
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn conj(&self) -> Self {
        let mut out = self.map(|v| v.conj());
        if let Some(g) = &self.analytic {
            let g = g.clone();
            out.analytic = Some(Arc::new(move |p: &[f64]| g(p).conj()));
        }
        out
    }

    /// X ↦ f(-X) on the grid (index reflection).
    pub fn reflect(&self) -> Self {
        let values = (0..self.values.len()).map(|i| self.values[self.domain.reflect_index(i)]).collect();
        Self { domain: self.domain, values, analytic: None, label: None }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max |f| over the central half-grid.
    pub fn central_sup(&self) -> f64 {
        self.domain.central_indices().iter().map(|&i| self.values[i].norm()).fold(0.0, f64::max)
    }

    /// (f, g)_{L²} = h^ndim Σ f·conj(g).
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.domain.ensure_same(&other.domain, "inner product")?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<C64>() * self.domain.cell())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.domain.cell()).sqrt()
    }

    /// Scale to unit L² norm (error for the zero function).
    pub fn normalized(&self) -> Result<Self> {
        let n = self.l2_norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero function".into()));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)).relabel(self.label.clone()))
    }

    fn relabel(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }

    /// Largest |f| in the outer band |X|_∞ > 3L/4 relative to max |f|.
    pub fn tail_ratio(&self) -> f64 {
        let peak = self.sup_norm();
        if peak == 0.0 {
            return 0.0;
        }
        (0..self.values.len())
            .filter(|&i| self.domain.is_tail(i))
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max)
            / peak
    }

    /// Enforce the grid's aliasing budget; returns the measured tail ratio.
    pub fn check_alias_budget(&self, what: &str) -> Result<f64> {
        let budget = self.domain.axis.alias_budget;
        let tail = self.tail_ratio();
        if tail > budget {
            Err(Error::Aliasing { what: what.to_string(), tail, budget })
        } else {
            Ok(tail)
        }
    }

    /// Value at an arbitrary point: the analytic evaluator if present, otherwise
    /// band-limited (trigonometric) interpolation, zero outside [-L, L]^ndim.
    pub fn eval(&self, p: &[f64]) -> C64 {
        match &self.analytic {
            Some(f) => f(p),
            None => Interpolator::new(self).eval(p),
        }
    }

    /// Translate by a grid-aligned shift (in node steps per axis), periodic wrap:
    /// g(X) = f(X - shift·h).
    pub fn translate(&self, steps: &[i64]) -> Result<Self> {
        if steps.len() != self.domain.ndim {
            return Err(Error::InvalidArgument("shift has the wrong dimension".into()));
        }
        let n = self.domain.n() as i64;
        let mut out = vec![C64::new(0.0, 0.0); self.values.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let mi = self.domain.multi_index(i);
            let src: Vec<usize> =
                mi.iter().zip(steps).map(|(&k, &s)| (k as i64 - s).rem_euclid(n) as usize).collect();
            *o = self.values[self.domain.flat_index(&src)];
        }
        let mut g = Self { domain: self.domain, values: out, analytic: None, label: None };
        if let Some(f) = &self.analytic {
            let f = f.clone();
            let h = self.domain.h();
            let s: Vec<f64> = steps.iter().map(|&k| k as f64 * h).collect();
            g.analytic = Some(Arc::new(move |p: &[f64]| {
                let q: Vec<f64> = p.iter().zip(&s).map(|(a, b)| a - b).collect();
                f(&q)
            }));
        }
        Ok(g)
    }
}

/// Rectangle rule h^ndim Σ values.
pub fn quadrature(f: &SampledFunction) -> Result<C64> {
    if f.values.is_empty() {
        return Err(Error::Empty("quadrature of an empty value array".into()));
    }
    Ok(f.values.iter().sum::<C64>() * f.domain.cell())
}

/// Band-limited interpolant of grid data: Σ_K F_K Π_i e^{iη_{k_i} x_i} / N^{ndim/2},
/// with the Nyquist term split symmetrically (cos(Lx)).
pub struct Interpolator {
    domain: Domain,
    spectrum: Vec<C64>,
}

impl Interpolator {
    pub fn new(f: &SampledFunction) -> Self {
        let domain = f.domain;
        let mut spectrum = f.values.clone();
        let axes: Vec<usize> = (0..domain.ndim).collect();
        fft::centered_dft(&mut spectrum, &domain.shape(), &axes, Direction::Forward);
        Self { domain, spectrum }
    }

    pub fn eval(&self, p: &[f64]) -> C64 {
        let n = self.domain.n();
        let h = self.domain.h();
        let l = self.domain.axis.half_width();
        if p.iter().any(|&x| x.abs() > l) {
            return C64::new(0.0, 0.0);
        }
        let dual = 2.0 * PI / (n as f64 * h);
        let basis: Vec<Vec<C64>> = p
            .iter()
            .map(|&x| {
                (0..n)
                    .map(|k| {
                        if k == 0 {
                            C64::new((PI / h * x).cos(), 0.0)
                        } else {
                            C64::from_polar(1.0, (k as f64 - (n / 2) as f64) * dual * x)
                        }
                    })
                    .collect()
            })
            .collect();
        // contract the last axis first
        let mut cur = self.spectrum.clone();
        for ax in (0..self.domain.ndim).rev() {
            let b = &basis[ax];
            cur = cur.chunks(n).map(|row| row.iter().zip(b).map(|(a, e)| a * e).sum()).collect();
        }
        cur[0] / (n as f64).powf(self.domain.ndim as f64 / 2.0)
    }
}
