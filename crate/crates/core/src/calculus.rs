//! Exact grid bijections behind every quantization: the Kohn–Nirenberg
//! symbol ↔ matrix map and the change-of-quantization Fourier multiplier.
//!
//! With ω = e^{2πi/N} and c = N/2, the KN matrix of a symbol a (rows m,
//! frequencies j) is
//!
//!   M[m, n] = N^{-d} Σ_j a[m, j] ω^{⟨m - n, j - c⟩},
//!
//! the rectangle rule for (2π)^{-d} ∫ a(x_m, ξ) e^{i⟨x_m - x_n, ξ⟩} dξ · h^d
//! with the difference x_m - x_n wrapped periodically. Its inverse is
//! a[m, j] = Σ_n M[m, n] ω^{-⟨m - n, j - c⟩}.

use crate::fft::{self, Direction};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// A real d×d quantization matrix (A = 0: Kohn–Nirenberg, A = I/2: Weyl).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantization {
    d: usize,
    entries: Vec<f64>,
}

impl Quantization {
    pub fn scalar(t: f64, d: usize) -> Self {
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            entries[i * d + i] = t;
        }
        Self { d, entries }
    }

    pub fn weyl(d: usize) -> Self {
        Self::scalar(0.5, d)
    }

    pub fn kohn_nirenberg(d: usize) -> Self {
        Self::scalar(0.0, d)
    }

    /// Row-major d×d matrix.
    pub fn matrix(d: usize, entries: Vec<f64>) -> Option<Self> {
        (entries.len() == d * d && entries.iter().all(|v| v.is_finite())).then_some(Self { d, entries })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, k: usize) -> f64 {
        self.entries[i * self.d + k]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Some(t) when A = t·I.
    pub fn as_scalar(&self) -> Option<f64> {
        let t = self.entries[0];
        (0..self.d)
            .all(|i| (0..self.d).all(|k| self.entry(i, k) == if i == k { t } else { 0.0 }))
            .then_some(t)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self { d: self.d, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect() }
    }

    /// A·y for y ∈ ℝ^d.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        (0..self.d).map(|i| (0..self.d).map(|k| self.entry(i, k) * y[k]).sum()).collect()
    }
}

fn wrapped_sign(z: &[usize]) -> f64 {
    if z.iter().sum::<usize>() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn multi(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; d];
    for i in (0..d).rev() {
        out[i] = idx % n;
        idx /= n;
    }
    out
}

fn flat(m: &[usize], n: usize) -> usize {
    m.iter().fold(0, |acc, &k| acc * n + k)
}

/// Index of (m - z) mod N componentwise.
fn diff_index(m: &[usize], z: &[usize], n: usize) -> usize {
    m.iter().zip(z).fold(0, |acc, (&a, &b)| acc * n + (a + n - b) % n)
}

/// KN matrix (quadrature-scaled) of phase-space data `a` of length N^{2d}.
pub fn kn_matrix(a: &[C64], n: usize, d: usize) -> DMatrix<C64> {
    let nd = n.pow(d as u32);
    let shape = vec![n; d];
    let axes: Vec<usize> = (0..d).collect();
    let scale = 1.0 / nd as f64;
    let rows: Vec<Vec<C64>> = (0..nd)
        .into_par_iter()
        .map(|m| {
            let mut r = a[m * nd..(m + 1) * nd].to_vec();
            fft::fft_axes(&mut r, &shape, &axes, Direction::Inverse);
            let mm = multi(m, n, d);
            let mut row = vec![C64::new(0.0, 0.0); nd];
            for (zi, v) in r.iter().enumerate() {
                let z = multi(zi, n, d);
                row[diff_index(&mm, &z, n)] = v * (wrapped_sign(&z) * scale);
            }
            row
        })
        .collect();
    DMatrix::from_fn(nd, nd, |i, j| rows[i][j])
}

/// Inverse of [`kn_matrix`].
pub fn kn_symbol(mat: &DMatrix<C64>, n: usize, d: usize) -> Vec<C64> {
    let nd = n.pow(d as u32);
    let shape = vec![n; d];
    let axes: Vec<usize> = (0..d).collect();
    let rows: Vec<Vec<C64>> = (0..nd)
        .into_par_iter()
        .map(|m| {
            let mm = multi(m, n, d);
            let mut r: Vec<C64> = (0..nd)
                .map(|zi| {
                    let z = multi(zi, n, d);
                    mat[(m, diff_index(&mm, &z, n))] * wrapped_sign(&z)
                })
                .collect();
            fft::fft_axes(&mut r, &shape, &axes, Direction::Forward);
            r
        })
        .collect();
    rows.concat()
}

/// Bilinear phase term for centred frequency indices u, v; on a Nyquist line
/// (u or v = -N/2) the absolute value is used so the multiplier stays even.
fn bilinear(u: i64, v: i64, n: usize) -> f64 {
    let c = (n / 2) as i64;
    let p = (u * v) as f64;
    if u == -c || v == -c {
        p.abs()
    } else {
        p
    }
}

/// Symbol a_2 with Op_{A2}(a_2) = Op_{A1}(a_1): multiply the centred Fourier
/// transform of a (duals η of x, y of ξ) by e^{i⟨(A1 - A2) y, η⟩}.
pub fn change_quantization_raw(a: &[C64], n: usize, d: usize, a1: &Quantization, a2: &Quantization) -> Vec<C64> {
    let diff = a1.minus(a2);
    if diff.is_zero() {
        return a.to_vec();
    }
    let shape = vec![n; 2 * d];
    let axes: Vec<usize> = (0..2 * d).collect();
    let mut spec = a.to_vec();
    fft::centered_dft(&mut spec, &shape, &axes, Direction::Forward);
    let c = (n / 2) as i64;
    let unit = 2.0 * PI / n as f64;
    spec.par_iter_mut().enumerate().for_each(|(idx, v)| {
        let k = multi(idx, n, 2 * d);
        let mut phi = 0.0;
        for i in 0..d {
            let eta = k[i] as i64 - c;
            for j in 0..d {
                let dij = diff.entry(i, j);
                if dij != 0.0 {
                    let y = k[d + j] as i64 - c;
                    phi += dij * bilinear(y, eta, n);
                }
            }
        }
        *v *= C64::from_polar(1.0, phi * unit);
    });
    fft::centered_dft(&mut spec, &shape, &axes, Direction::Inverse);
    spec
}

/// Parity operator on configuration data: (Πf)(x) = f(-x).
pub fn parity_permutation(n: usize, d: usize) -> Vec<usize> {
    let nd = n.pow(d as u32);
    (0..nd)
        .map(|i| {
            let m = multi(i, n, d);
            let r: Vec<usize> = m.iter().map(|&k| (n - k) % n).collect();
            flat(&r, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kn_round_trip_random() {
        let (n, d) = (8, 1);
        let a: Vec<C64> = (0..n * n).map(|k| C64::new((k as f64 * 1.3).sin(), (k as f64 * 0.7).cos())).collect();
        let m = kn_matrix(&a, n, d);
        let b = kn_symbol(&m, n, d);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn kn_matrix_matches_definition() {
        let (n, d) = (8usize, 1usize);
        let a: Vec<C64> = (0..n * n).map(|k| C64::new((k as f64 * 0.3).sin(), 0.1 * k as f64)).collect();
        let m = kn_matrix(&a, n, d);
        let c = (n / 2) as f64;
        for r in 0..n {
            for s in 0..n {
                let mut want = C64::new(0.0, 0.0);
                for j in 0..n {
                    let ph = 2.0 * PI * (r as f64 - s as f64) * (j as f64 - c) / n as f64;
                    want += a[r * n + j] * C64::from_polar(1.0, ph);
                }
                want /= n as f64;
                assert!((m[(r, s)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kn_round_trip_two_dimensions() {
        let (n, d) = (8usize, 2usize);
        let a: Vec<C64> = (0..n.pow(4)).map(|k| C64::new((k as f64 * 0.013).sin(), (k as f64 * 0.71).cos())).collect();
        let b = kn_symbol(&kn_matrix(&a, n, d), n, d);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn change_is_a_group_action() {
        let (n, d) = (8, 1);
        let a: Vec<C64> = (0..n * n).map(|k| C64::new((k as f64 * 1.1).cos(), (k as f64 * 0.2).sin())).collect();
        let q = |t: f64| Quantization::scalar(t, d);
        let direct = change_quantization_raw(&a, n, d, &q(0.0), &q(0.75));
        let stepped =
            change_quantization_raw(&change_quantization_raw(&a, n, d, &q(0.0), &q(0.3)), n, d, &q(0.3), &q(0.75));
        let back = change_quantization_raw(&direct, n, d, &q(0.75), &q(0.0));
        for i in 0..a.len() {
            assert!((direct[i] - stepped[i]).norm() < 1e-12);
            assert!((back[i] - a[i]).norm() < 1e-12);
        }
    }
}
