mod common;

use common::*;
use proptest::prelude::*;
use symcalc::functions::{coherent_state, gaussian_window, hermite_ensemble, standard_gaussian};
use symcalc::modspace::{
    mixed_norm, modulation_norm, quasi_triangle, window_equivalence_report, MixedNormSpec, NormOrder,
};
use symcalc::tfa::{stft, time_frequency_shift};
use symcalc::weights::{moderation_constant, SampleSet, WeightClass, WeightParams};
use symcalc::{make_grid, GridMode, SampledFunction, Weight, C64};

const EXPONENTS: [f64; 5] = [0.5, 2.0 / 3.0, 1.0, 2.0, f64::INFINITY];

/// Direct evaluation of the iterated integral, written independently of the library.
fn naive_mixed(f: &SampledFunction, w: &Weight, p: f64, q: f64, x_inner: bool) -> f64 {
    let dom = f.domain();
    let n = dom.n();
    let h = dom.h();
    let val = |ix: usize, ixi: usize| {
        let i = ix * n + ixi;
        f.get(i).norm() * w.eval(&dom.point(i))
    };
    let inner: Vec<f64> = (0..n)
        .map(|o| {
            let line: Vec<f64> = (0..n).map(|k| if x_inner { val(k, o) } else { val(o, k) }).collect();
            if p.is_infinite() {
                line.iter().cloned().fold(0.0, f64::max)
            } else {
                (line.iter().map(|v| v.powf(p)).sum::<f64>() * h).powf(1.0 / p)
            }
        })
        .collect();
    if q.is_infinite() {
        inner.iter().cloned().fold(0.0, f64::max)
    } else {
        (inner.iter().map(|v| v.powf(q)).sum::<f64>() * h).powf(1.0 / q)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mixed_norm_matches_direct_sum_and_is_homogeneous(seed in any::<u64>(), ip in 0usize..5, iq in 0usize..5, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let g = make_grid(16, 1, GridMode::SelfDual).unwrap();
        let f = random_values(g.phase(), &mut rng(seed));
        let w = Weight::bracket_power(1.0);
        let (p, q) = (EXPONENTS[ip], EXPONENTS[iq]);
        for (order, x_inner) in [(NormOrder::XThenXi, true), (NormOrder::XiThenX, false)] {
            let spec = MixedNormSpec::new(p, q, order).unwrap();
            let v = mixed_norm(&f, &w, &spec).unwrap();
            let direct = naive_mixed(&f, &w, p, q, x_inner);
            prop_assert!((v - direct).abs() <= 1e-12 * direct);
            let c = C64::new(re, im);
            let vc = mixed_norm(&f.scale(c), &w, &spec).unwrap();
            prop_assert!((vc - c.norm() * v).abs() <= 1e-12 * (1.0 + vc));
        }
    }
}

#[test]
fn constant_and_sup_norms() {
    let g = make_grid(32, 1, GridMode::SelfDual).unwrap();
    let one = SampledFunction::constant(g.phase(), C64::new(1.0, 0.0));
    let w1 = Weight::constant(1.0).unwrap();
    let v = mixed_norm(&one, &w1, &MixedNormSpec::lp(2.0, 2.0).unwrap()).unwrap();
    assert!((v - 32.0 * g.h()).abs() < 1e-12);
    let f = random_values(g.phase(), &mut rng(2));
    let w = Weight::bracket_power(2.0);
    let v = mixed_norm(&f, &w, &MixedNormSpec::lp(f64::INFINITY, f64::INFINITY).unwrap()).unwrap();
    let dom = g.phase();
    let want = (0..dom.len()).map(|i| f.get(i).norm() * w.eval(&dom.point(i))).fold(0.0, f64::max);
    assert_eq!(v, want);
}

#[test]
fn moyal_normalisation_is_grid_independent() {
    let mut cs = vec![];
    for n in [32, 64, 128] {
        let g = make_grid(n, 1, GridMode::SelfDual).unwrap();
        let phi = standard_gaussian(g.config());
        let r = modulation_norm(&phi, &phi, &Weight::constant(1.0).unwrap(), &MixedNormSpec::lp(2.0, 2.0).unwrap()).unwrap();
        cs.push(r.value / phi.l2_norm());
    }
    assert!(cs.iter().all(|c| (c - cs[2]).abs() < 1e-6), "{cs:?}");
    assert!((cs[2] - 1.0).abs() < 1e-10);
    let g = make_grid(32, 1, GridMode::SelfDual).unwrap();
    let zero = SampledFunction::zeros(g.config());
    let phi = standard_gaussian(g.config());
    let r = modulation_norm(&zero, &phi, &Weight::bracket_power(1.0), &MixedNormSpec::lp(1.0, 1.0).unwrap()).unwrap();
    assert_eq!(r.value, 0.0);
}

#[test]
fn larger_weights_give_larger_norms() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let f = coherent_state(g.config(), &[1.0], &[-0.5]);
    let phi = standard_gaussian(g.config());
    for p in EXPONENTS {
        let spec = MixedNormSpec::lp(p, p).unwrap();
        let n0 = modulation_norm(&f, &phi, &Weight::bracket_power(0.0), &spec).unwrap().value;
        let n1 = modulation_norm(&f, &phi, &Weight::bracket_power(1.0), &spec).unwrap().value;
        assert!(n0 <= n1, "p = {p}");
    }
}

#[test]
fn identical_windows_give_unit_ratios_and_zero_members_are_skipped() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let phi = standard_gaussian(g.config());
    let mut ens = hermite_ensemble(g.config(), 3);
    ens.push(SampledFunction::zeros(g.config()));
    let spec = MixedNormSpec::lp(1.0, 1.0).unwrap();
    let rep = window_equivalence_report(&ens, &phi, &phi, &Weight::bracket_power(1.0), &spec, 10.0).unwrap();
    assert!(rep.stats.ratios.iter().all(|&r| r == 1.0));
    assert_eq!(rep.skipped, vec![3]);
    assert!(rep.pass && rep.warnings.len() == 1);
    assert!(window_equivalence_report(&[], &phi, &phi, &Weight::bracket_power(1.0), &spec, 10.0).is_err());
}

#[test]
fn gaussian_windows_of_different_width_are_equivalent() {
    // the width-2 window needs N ≥ 128 to meet the 1e-6 budget at 3L/4
    let mut spreads = vec![];
    for n in [128, 256] {
        let g = make_grid(n, 1, GridMode::SelfDual).unwrap();
        let ens = hermite_ensemble(g.config(), 6);
        let phi1 = gaussian_window(g.config(), 1.0);
        let phi2 = gaussian_window(g.config(), 2.0);
        let spec = MixedNormSpec::lp(2.0, 2.0).unwrap();
        let rep = window_equivalence_report(&ens, &phi1, &phi2, &Weight::bracket_power(1.0), &spec, 10.0).unwrap();
        assert!(rep.pass, "{rep:?}");
        spreads.push(rep.stats.spread);
    }
    assert!((spreads[1] / spreads[0] - 1.0).abs() < 0.2, "{spreads:?}");
}

#[test]
fn quasi_triangle_inequality() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let phi = standard_gaussian(g.config());
    let w = Weight::bracket_power(1.0);
    let mut r = rng(12);
    for _ in 0..5 {
        let f = gaussian_mixture(g.config(), 2, 1.5, 0.7, 1.2, &mut r);
        let h = gaussian_mixture(g.config(), 2, 1.5, 0.7, 1.2, &mut r);
        for (p, q) in [(1.0, 1.0), (2.0, 2.0), (f64::INFINITY, 1.0)] {
            let t = quasi_triangle(&f, &h, &phi, &w, &MixedNormSpec::lp(p, q).unwrap()).unwrap();
            assert!(t.holds, "{t:?}");
        }
        // quasi-Banach exponents: computed and reported; not required to hold
        let t = quasi_triangle(&f, &h, &phi, &w, &MixedNormSpec::lp(0.5, 2.0 / 3.0).unwrap()).unwrap();
        assert!(t.lhs.is_finite() && t.rhs.is_finite() && t.r == 0.5);
    }
}

#[test]
fn time_frequency_shifts_are_bounded_by_the_moderation_constant() {
    let g = make_grid(64, 1, GridMode::SelfDual).unwrap();
    let phi = standard_gaussian(g.config());
    let w = Weight::bracket_power(2.0);
    let v = Weight::from_ln("(1+|X|)^2", WeightClass::P, WeightParams::default(), |p| {
        2.0 * (1.0 + (p[0] * p[0] + p[1] * p[1]).sqrt()).ln()
    });
    let c = moderation_constant(&w, &v, &SampleSet::standard(&g.phase(), 5));
    let f = coherent_state(g.config(), &[0.3], &[0.2]);
    let spec = MixedNormSpec::lp(2.0, 2.0).unwrap();
    let base = modulation_norm(&f, &phi, &w, &spec).unwrap().value;
    let h = g.h();
    for (a, b) in [(3i64, 0i64), (0, -4), (5, 6), (-7, 2)] {
        let fs = time_frequency_shift(&f, &[a], &[b]).unwrap();
        let shifted = modulation_norm(&fs, &phi, &w, &spec).unwrap().value;
        let bound = c * v.eval(&[a as f64 * h, b as f64 * h]);
        assert!(shifted <= bound * base, "({a},{b}): {} > {bound}", shifted / base);
        // and the STFT magnitude is just translated
        let v0 = stft(&f, &phi).unwrap();
        let v1 = stft(&fs, &phi).unwrap();
        let dom = v0.domain();
        let n = 64i64;
        let mut worst = 0.0f64;
        for i in dom.central_indices() {
            let m = dom.multi_index(i);
            let src = dom.flat_index(&[((m[0] as i64 - a).rem_euclid(n)) as usize, ((m[1] as i64 - b).rem_euclid(n)) as usize]);
            worst = worst.max((v1.get(i).norm() - v0.get(src).norm()).abs());
        }
        assert!(worst < 1e-10, "{worst}");
    }
}
