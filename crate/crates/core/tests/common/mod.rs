#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symcalc::functions::gaussian_bump;
use symcalc::{Domain, SampledFunction, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of `k` Gaussian bumps with random centres in [-spread, spread]^dim,
/// widths in [w0, w1] and complex amplitudes; keeps the analytic evaluator.
pub fn gaussian_mixture(dom: Domain, k: usize, spread: f64, w0: f64, w1: f64, rng: &mut ChaCha8Rng) -> SampledFunction {
    let mut acc = SampledFunction::zeros(dom);
    for _ in 0..k {
        let c: Vec<f64> = (0..dom.ndim).map(|_| rng.gen_range(-spread..spread)).collect();
        let w = rng.gen_range(w0..w1);
        let amp = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        acc = acc.add(&gaussian_bump(dom, c, w, amp)).unwrap();
    }
    acc
}

pub fn random_values(dom: Domain, rng: &mut ChaCha8Rng) -> SampledFunction {
    let v = (0..dom.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    SampledFunction::from_values(dom, v).unwrap()
}

pub fn random_real(dom: Domain, rng: &mut ChaCha8Rng) -> SampledFunction {
    let v = (0..dom.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    SampledFunction::from_values(dom, v).unwrap()
}

pub fn max_diff(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn central_diff(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.domain().central_indices().iter().map(|&i| (a.get(i) - b.get(i)).norm()).fold(0.0, f64::max)
}
