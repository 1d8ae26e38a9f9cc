//! FFT plumbing shared by every module.
//!
//! Convention: on an axis of length n, index k is the node (k - n/2)·h and the
//! centred unitary DFT is
//!
//!   F[j] = n^{-1/2} Σ_k f[k] e^{-2πi (k - n/2)(j - n/2)/n}
//!        = n^{-1/2} (-1)^{n/2} (-1)^j FFT((-1)^k f[k])[j].
//!
//! On a self-dual grid (h² = 2π/n) this is the rectangle rule for
//! (2π)^{-1/2} ∫ f(x) e^{-ixξ} dx at the nodes. The inverse uses the same sign
//! ramps around an unnormalised inverse FFT.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    }
}

/// Row-major strides for `shape` (last axis fastest).
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Apply `f` to every 1D line of `data` along `axis`.
fn for_each_line(data: &mut [C64], shape: &[usize], axis: usize, mut f: impl FnMut(&mut [C64])) {
    let n = shape[axis];
    let stride = strides(shape)[axis];
    let total = data.len();
    let block = n * stride;
    let mut line = vec![C64::new(0.0, 0.0); n];
    for outer in (0..total).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[base + k * stride];
            }
            f(&mut line);
            for (k, v) in line.iter().enumerate() {
                data[base + k * stride] = *v;
            }
        }
    }
}

/// Plain (unnormalised, uncentred) FFT along the listed axes.
pub fn fft_axes(data: &mut [C64], shape: &[usize], axes: &[usize], dir: Direction) {
    for &axis in axes {
        let p = plan(shape[axis], dir);
        let mut scratch = vec![C64::new(0.0, 0.0); p.get_inplace_scratch_len()];
        for_each_line(data, shape, axis, |line| p.process_with_scratch(line, &mut scratch));
    }
}

/// Centred unitary DFT (or its inverse) along the listed axes. Each axis length must be even.
pub fn centered_dft(data: &mut [C64], shape: &[usize], axes: &[usize], dir: Direction) {
    for &axis in axes {
        let n = shape[axis];
        debug_assert!(n % 2 == 0);
        let p = plan(n, dir);
        let mut scratch = vec![C64::new(0.0, 0.0); p.get_inplace_scratch_len()];
        let scale = 1.0 / (n as f64).sqrt();
        let global = if (n / 2) % 2 == 0 { scale } else { -scale };
        for_each_line(data, shape, axis, |line| {
            for (k, v) in line.iter_mut().enumerate() {
                if k % 2 == 1 {
                    *v = -*v;
                }
            }
            p.process_with_scratch(line, &mut scratch);
            for (j, v) in line.iter_mut().enumerate() {
                *v *= if j % 2 == 1 { -global } else { global };
            }
        });
    }
}

/// Centred 2× (per axis) band-limited upsampling: zero-pad the centred
/// spectrum, split the Nyquist bin evenly between ±n/2, and return samples on
/// the grid with half the spacing and the same extent. Node k of the fine
/// grid is (k - n)·h/2, so coarse node k sits at fine index 2k.
pub fn upsample2(data: &[C64], n: usize, ndim: usize) -> Vec<C64> {
    let shape = vec![n; ndim];
    let mut spec = data.to_vec();
    centered_dft(&mut spec, &shape, &(0..ndim).collect::<Vec<_>>(), Direction::Forward);
    let m = 2 * n;
    let fine_shape = vec![m; ndim];
    let fs = strides(&fine_shape);
    let cs = strides(&shape);
    let mut out = vec![C64::new(0.0, 0.0); m.pow(ndim as u32)];
    let total = spec.len();
    let mut targets: Vec<(usize, f64)> = Vec::with_capacity(1 << ndim);
    for idx in 0..total {
        let v = spec[idx];
        if v == C64::new(0.0, 0.0) {
            continue;
        }
        // coarse centred index p = k - n/2 lands at fine index p + n; Nyquist p = -n/2
        // is split between fine indices n/2 and 3n/2.
        targets.clear();
        targets.push((0, 1.0));
        for ax in 0..ndim {
            let k = (idx / cs[ax]) % n;
            let mut next = Vec::with_capacity(targets.len() * 2);
            for &(off, w) in &targets {
                if k == 0 {
                    next.push((off + (n / 2) * fs[ax], w * 0.5));
                    next.push((off + (3 * n / 2) * fs[ax], w * 0.5));
                } else {
                    next.push((off + (k + n / 2) * fs[ax], w));
                }
            }
            targets = next;
        }
        for &(off, w) in &targets {
            out[off] += v * w;
        }
    }
    let axes: Vec<usize> = (0..ndim).collect();
    centered_dft(&mut out, &fine_shape, &axes, Direction::Inverse);
    let gain = 2f64.powf(ndim as f64 / 2.0);
    for v in out.iter_mut() {
        *v *= gain;
    }
    out
}

/// Periodic convolution of two arrays on an n^ndim grid whose origin is at
/// index n/2 on each axis: out[X] = Σ_Y a[X - Y] b[Y] (indices mod n), unscaled.
pub fn periodic_convolve(a: &[C64], b: &[C64], n: usize, ndim: usize) -> Vec<C64> {
    let shape = vec![n; ndim];
    let axes: Vec<usize> = (0..ndim).collect();
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    fft_axes(&mut fa, &shape, &axes, Direction::Forward);
    fft_axes(&mut fb, &shape, &axes, Direction::Forward);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft_axes(&mut fa, &shape, &axes, Direction::Inverse);
    let total = fa.len() as f64;
    // plain circular convolution puts the origin at index 0; shift by n/2 per axis
    let s = strides(&shape);
    let mut out = vec![C64::new(0.0, 0.0); fa.len()];
    for (idx, v) in fa.iter().enumerate() {
        let mut dst = 0;
        for ax in 0..ndim {
            let k = (idx / s[ax]) % n;
            dst += ((k + n / 2) % n) * s[ax];
        }
        out[dst] = *v / total;
    }
    out
}
