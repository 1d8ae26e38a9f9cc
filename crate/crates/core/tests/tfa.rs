mod common;

use common::*;
use proptest::prelude::*;
use std::f64::consts::PI;
use symcalc::fft::{centered_dft, Direction};
use symcalc::functions::{coherent_state, standard_gaussian};
use symcalc::tfa::{cross_wigner, fourier, inverse_fourier, stft, symplectic_fourier, time_frequency_shift, wigner};
use symcalc::{make_grid, quadrature, GridMode, Quantization, SampledFunction, C64};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn parseval_and_inverse(seed in any::<u64>()) {
        let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
        let f = random_values(g.config(), &mut rng(seed));
        let ff = fourier(&f).unwrap();
        prop_assert!((ff.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
        let back = inverse_fourier(&ff).unwrap();
        prop_assert!(max_diff(&back, &f) <= 1e-12 * f.sup_norm());
    }

    #[test]
    fn symplectic_fourier_is_a_unitary_involution(seed in any::<u64>()) {
        let g = make_grid(16, 1, GridMode::SelfDual).unwrap();
        let a = random_values(g.phase(), &mut rng(seed));
        let fa = symplectic_fourier(&a).unwrap();
        prop_assert!((fa.l2_norm() - a.l2_norm()).abs() <= 1e-12 * a.l2_norm());
        let ffa = symplectic_fourier(&fa).unwrap();
        prop_assert!(max_diff(&ffa, &a) <= 1e-12 * a.sup_norm());
    }
}

#[test]
fn symplectic_fourier_involution_two_dimensions() {
    let g = make_grid(8, 2, GridMode::SelfDual).unwrap();
    let a = random_values(g.phase(), &mut rng(3));
    let ffa = symplectic_fourier(&symplectic_fourier(&a).unwrap()).unwrap();
    assert!(max_diff(&ffa, &a) < 1e-12);
}

#[test]
fn gaussian_is_symplectic_fourier_invariant() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let a = SampledFunction::from_real_fn(g.phase(), |p| (-(p[0] * p[0] + p[1] * p[1])).exp());
    let fa = symplectic_fourier(&a).unwrap();
    assert!(max_diff(&fa, &a) < 1e-10, "{}", max_diff(&fa, &a));
    let zero = SampledFunction::zeros(g.phase());
    assert_eq!(symplectic_fourier(&zero).unwrap().sup_norm(), 0.0);
}

/// π^{-d} h^{2d} Σ_Y a(Y) e^{2iσ(X,Y)} evaluated directly.
fn symplectic_fourier_direct(a: &SampledFunction, x: f64, xi: f64) -> C64 {
    let dom = a.domain();
    let h = dom.h();
    let mut acc = C64::new(0.0, 0.0);
    for (i, v) in a.values().iter().enumerate() {
        let p = dom.point(i);
        let sigma = p[0] * xi - x * p[1];
        acc += v * C64::from_polar(1.0, 2.0 * sigma);
    }
    acc * h * h / PI
}

#[test]
fn symplectic_fourier_matches_direct_quadrature_on_central_grid() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let a = gaussian_mixture(g.phase(), 3, 1.0, 0.65, 0.75, &mut rng(11));
    let fa = symplectic_fourier(&a).unwrap();
    let dom = g.phase();
    let mut worst = 0.0f64;
    for &i in dom.central_indices().iter().step_by(7) {
        let p = dom.point(i);
        worst = worst.max((fa.get(i) - symplectic_fourier_direct(&a, p[0], p[1])).norm());
    }
    assert!(worst < 1e-8 * a.sup_norm(), "{worst}");
}

#[test]
fn symplectic_fourier_is_a_dilated_partial_fourier_transform() {
    // F_σ a(X) = 2^d [T∘(F⊗F^{-1}) a](-2X)
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let dom = g.phase();
    let a = gaussian_mixture(dom, 2, 1.0, 0.65, 0.75, &mut rng(5));
    let mut b = a.values().to_vec();
    centered_dft(&mut b, &[64, 64], &[0], Direction::Forward);
    centered_dft(&mut b, &[64, 64], &[1], Direction::Inverse);
    let fa = symplectic_fourier(&a).unwrap();
    let axis = g.axis();
    let mut worst = 0.0f64;
    for i in dom.central_indices() {
        let p = dom.point(i);
        let (Some(k0), Some(k1)) = (axis.index_of(-2.0 * p[0]), axis.index_of(-2.0 * p[1])) else { continue };
        // T swaps the arguments: (T c)(x, ξ) = c(ξ, x)
        let val = 2.0 * b[k1 * 64 + k0];
        worst = worst.max((fa.get(i) - val).norm());
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn stft_of_gaussian_against_closed_form_and_direct_sum() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let phi = standard_gaussian(g.config());
    let v = stft(&phi, &phi).unwrap();
    let dom = v.domain();
    for i in 0..dom.len() {
        let p = dom.point(i);
        let want = (-(p[0] * p[0] + p[1] * p[1]) / 4.0).exp() / (2.0 * PI).sqrt();
        assert!((v.get(i).norm() - want).abs() < 1e-8, "{p:?} {} {want}", v.get(i).norm());
    }
    // direct quadrature (no wrap, analytic window) at 20 random nodes for an off-centre f
    let f = coherent_state(g.config(), &[0.7], &[-1.2]);
    let v = stft(&f, &phi).unwrap();
    let mut r = rng(9);
    let h = g.h();
    use rand::Rng;
    for _ in 0..20 {
        let i = r.gen_range(0..dom.len());
        let p = dom.point(i);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..64 {
            let y = g.axis().node(k);
            acc += f.get(k) * phi.eval(&[y - p[0]]).conj() * C64::from_polar(1.0, -y * p[1]);
        }
        acc *= h / (2.0 * PI).sqrt();
        assert!((acc - v.get(i)).norm() < 1e-8);
    }
}

#[test]
fn stft_at_origin_is_inner_product() {
    let g = make_grid(32, 1, GridMode::SelfDual).unwrap();
    let f = coherent_state(g.config(), &[0.5], &[1.0]);
    let phi = standard_gaussian(g.config());
    let v = stft(&f, &phi).unwrap();
    let origin = g.phase().flat_index(&[16, 16]);
    let want = f.inner(&phi).unwrap() / (2.0 * PI).sqrt();
    assert!((v.get(origin) - want).norm() < 1e-14);
    let zero = SampledFunction::zeros(g.config());
    assert_eq!(stft(&zero, &phi).unwrap().sup_norm(), 0.0);
}

#[test]
fn stft_covariance_and_moyal() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let f = coherent_state(g.config(), &[0.3], &[0.5]);
    let phi = standard_gaussian(g.config());
    let v = stft(&f, &phi).unwrap();
    let shift = 3i64;
    let fs = time_frequency_shift(&f, &[shift], &[0]).unwrap();
    let vs = stft(&fs, &phi).unwrap();
    let dom = v.domain();
    let a = shift as f64 * g.h();
    let mut worst = 0.0f64;
    for i in 0..dom.len() {
        let m = dom.multi_index(i);
        let src = dom.flat_index(&[(m[0] + 64 - shift as usize) % 64, m[1]]);
        let xi = g.axis().node(m[1]);
        worst = worst.max((vs.get(i) - C64::from_polar(1.0, -a * xi) * v.get(src)).norm());
    }
    assert!(worst < 1e-10, "{worst}");
    // ‖V_φ f‖ = ‖f‖‖φ‖ on the grid
    assert!((v.l2_norm() - f.l2_norm() * phi.l2_norm()).abs() < 1e-12);
}

#[test]
fn wigner_of_gaussian() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let phi = standard_gaussian(g.config());
    let w = cross_wigner(&phi, &phi).unwrap();
    let dom = w.domain();
    let c = (2.0 / PI).sqrt();
    for i in 0..dom.len() {
        let p = dom.point(i);
        assert!((w.get(i) - c * (-(p[0] * p[0] + p[1] * p[1])).exp()).norm() < 1e-8);
    }
    // ∬W = (2π)^{1/2}‖φ‖², and the ξ-marginal is (2π)^{1/2}|φ(x)|²
    let total = quadrature(&w).unwrap();
    assert!((total.re - (2.0 * PI).sqrt() * phi.l2_norm().powi(2)).abs() < 1e-10);
    for k in 0..64 {
        let marginal: C64 = (0..64).map(|j| w.get(k * 64 + j)).sum::<C64>() * g.h();
        assert!((marginal.re - (2.0 * PI).sqrt() * phi.get(k).norm_sqr()).abs() < 1e-10);
    }
}

#[test]
fn wigner_normalisation_is_stable_under_refinement() {
    let mut cs = vec![];
    for n in [32, 64, 128] {
        let g = make_grid(n, 1, GridMode::SelfDual).unwrap();
        let phi = standard_gaussian(g.config());
        let w = cross_wigner(&phi, &phi).unwrap();
        cs.push(quadrature(&w).unwrap().re / phi.l2_norm().powi(2));
    }
    assert!((cs[0] - cs[2]).abs() < 1e-6 && (cs[1] - cs[2]).abs() < 1e-6, "{cs:?}");
}

#[test]
fn weyl_wigner_is_real_even_when_interpolated() {
    let g = make_grid(32, 1, GridMode::SelfDual).unwrap();
    let f = random_values(g.config(), &mut rng(4));
    let w = cross_wigner(&f, &f).unwrap();
    let worst = w.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
    let f = coherent_state(g.config(), &[0.4], &[-0.3]);
    let w = cross_wigner(&f, &f).unwrap();
    assert!(w.values().iter().all(|v| v.im.abs() < 1e-12));
}

#[test]
fn wigner_matches_direct_quadrature_for_general_a() {
    let g = make_grid(32, 1, GridMode::SelfDual).unwrap();
    let f1 = coherent_state(g.config(), &[0.5], &[0.2]);
    let f2 = coherent_state(g.config(), &[-0.3], &[0.7]);
    let t = 0.25;
    let w = wigner(&f1, &f2, &Quantization::scalar(t, 1)).unwrap();
    let dom = w.domain();
    let h = g.h();
    for &i in dom.central_indices().iter().step_by(13) {
        let p = dom.point(i);
        // fine, wide quadrature in y with the analytic functions
        let mut acc = C64::new(0.0, 0.0);
        let dy = h / 4.0;
        for k in -400..400 {
            let y = k as f64 * dy;
            acc += f1.eval(&[p[0] + t * y]) * f2.eval(&[p[0] - (1.0 - t) * y]).conj() * C64::from_polar(1.0, -y * p[1]);
        }
        acc *= dy / (2.0 * PI).sqrt();
        assert!((acc - w.get(i)).norm() < 1e-9);
    }
}
