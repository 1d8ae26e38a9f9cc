//! Acceptance criteria: one PASS/FAIL line each, nonzero exit if any fails.

mod common;

use common::*;
use rand::Rng;
use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use symcalc::combinat::*;
use symcalc::confine::*;
use symcalc::functions::*;
use symcalc::modspace::{MixedNormSpec, DEFAULT_RATIO_K};
use symcalc::quantize::{change_quantization, kernel_from_symbol, op_matrix, symbol_from_kernel, wigner_pairing_check};
use symcalc::symgroup::*;
use symcalc::tfa::{fourier, symplectic_fourier};
use symcalc::toeplitz::*;
use symcalc::weights::{certify_moderate, log_weight, moderation_constant, mollify, SampleSet};
use symcalc::weylalg::*;
use symcalc::{make_grid, Domain, GridMode, PhaseGrid, Quantization, SampledFunction, Weight, C64};

struct Line {
    pass: bool,
    detail: String,
}

fn grid(n: usize) -> PhaseGrid {
    make_grid(n, 1, GridMode::SelfDual).unwrap()
}

fn worst(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

fn ensemble(cfg: Domain, seed: u64) -> Vec<SampledFunction> {
    let mut r = rng(seed);
    let mut e = hermite_ensemble(cfg, 6);
    for _ in 0..4 {
        e.push(coherent_state(cfg, &[r.gen_range(-1.5..1.5)], &[r.gen_range(-1.5..1.5)]));
    }
    e
}

fn transforms() -> Line {
    let g = grid(64);
    let f = standard_gaussian(g.config());
    let fixed = max_diff(&fourier(&f).unwrap(), &f);
    let mut r = rng(1);
    let u = random_values(g.config(), &mut r);
    let parseval = (fourier(&u).unwrap().l2_norm() - u.l2_norm()).abs() / u.l2_norm();
    let a = random_values(g.phase(), &mut r);
    let inv = max_diff(&symplectic_fourier(&symplectic_fourier(&a).unwrap()).unwrap(), &a) / a.sup_norm();
    let gs = SampledFunction::from_real_fn(g.phase(), |p| (-norm_sqr(p)).exp());
    let sfixed = max_diff(&symplectic_fourier(&gs).unwrap(), &gs);
    let all = [fixed, parseval, inv, sfixed];
    Line {
        pass: worst(&all) <= 1e-10,
        detail: format!("N=64 F fixed point {fixed:.2e}, Parseval {parseval:.2e}, F_σ involution {inv:.2e}, F_σ fixed point {sfixed:.2e} (≤ 1e-10)"),
    }
}

fn quantization() -> Line {
    let g = grid(32);
    let mut r = rng(2);
    let a = random_values(g.phase(), &mut r);
    let qs = [0.0, 0.25, 0.5, 1.0].map(|t| Quantization::scalar(t, 1));
    let mut rt: f64 = 0.0;
    for q in &qs {
        let back = symbol_from_kernel(&kernel_from_symbol(&a, q).unwrap(), q).unwrap();
        rt = rt.max(max_diff(&back, &a) / a.sup_norm());
    }
    let mut inv: f64 = 0.0;
    for q1 in &qs {
        for q2 in &qs {
            let b = change_quantization(&a, q1, q2).unwrap();
            inv = inv.max(op_matrix(&a, q1).unwrap().distance(&op_matrix(&b, q2).unwrap()));
        }
    }
    Line {
        pass: rt <= 1e-12 && inv <= 1e-10,
        detail: format!("N=32 round trip {rt:.2e} (≤ 1e-12), change-of-quantization invariance {inv:.2e} (≤ 1e-10)"),
    }
}

fn pairing() -> Line {
    let g = grid(32);
    let mut r = rng(3);
    let mut res: f64 = 0.0;
    for i in 0..10 {
        let a = gaussian_mixture(g.phase(), 3, 1.5, 0.7, 1.2, &mut r);
        let f = gaussian_mixture(g.config(), 2, 1.0, 0.8, 1.2, &mut r);
        let h = gaussian_mixture(g.config(), 2, 1.0, 0.8, 1.2, &mut r);
        let q = Quantization::scalar([0.0, 0.25, 0.5, 1.0][i % 4], 1);
        let p = wigner_pairing_check(&a, &f, &h, &q).unwrap();
        res = res.max(p.residual / p.scale.max(1.0));
    }
    Line { pass: res <= 1e-8, detail: format!("N=32, 10 triples: max residual {res:.2e} (≤ 1e-8)") }
}

fn product_routes() -> Line {
    let g = grid(32);
    let mut r = rng(4);
    let gs = SampledFunction::from_real_fn(g.phase(), |p| (-norm_sqr(p)).exp());
    let mut pairs = vec![(gs.clone(), gs)];
    for _ in 0..3 {
        let a = gaussian_mixture(g.phase(), 3, 1.0, 0.65, 0.75, &mut r);
        let b = gaussian_mixture(g.phase(), 3, 1.0, 0.65, 0.75, &mut r);
        pairs.push((a, b));
    }
    let (mut route, mut wf, mut wt) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in &pairs {
        route = route.max(product_route_equivalence(a, b).unwrap().relative);
        wf = wf.max(weyl_fourier_identity_check(a, b).unwrap().relative);
        for res in twisted_fourier_identity(a, b).unwrap() {
            wt = wt.max(res.relative);
        }
    }
    let l = g.axis().half_width();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = SampledFunction::from_real_fn(g.phase(), move |p| periodic_linear(p[0], l, s));
    let xi = SampledFunction::from_real_fn(g.phase(), move |p| periodic_linear(p[1], l, s));
    let c = commutator(&x, &xi).unwrap();
    let comm = central_diff(&c, &SampledFunction::constant(g.phase(), C64::new(0.0, 1.0)));
    Line {
        pass: route <= 1e-7 && wf <= 1e-7 && wt <= 1e-7 && comm <= 1e-8,
        detail: format!(
            "N=32 matrix vs twisted route {route:.2e}, F_σ-product identity {wf:.2e}, twisted identities {wt:.2e} (≤ 1e-7); [x,ξ] − i {comm:.2e} (≤ 1e-8)"
        ),
    }
}

fn toeplitz_forms() -> Line {
    let g = grid(32);
    let cfg = g.config();
    let mut r = rng(5);
    let windows = [
        standard_gaussian(cfg),
        gaussian_window(cfg, 0.8).normalized().unwrap(),
        gaussian_window(cfg, 0.9).normalized().unwrap(),
        coherent_state(cfg, &[0.2], &[-0.3]).normalized().unwrap(),
        coherent_state(cfg, &[-0.3], &[0.2]).normalized().unwrap(),
    ];
    let (mut form, mut id, mut psd) = (0.0f64, 0.0f64, 0.0f64);
    let one = SampledFunction::constant(g.phase(), C64::new(1.0, 0.0));
    let ident = symcalc::OperatorMatrix::identity(&cfg);
    for w in &windows {
        let a = gaussian_mixture(g.phase(), 3, 2.0, 0.7, 1.5, &mut r);
        form = form.max(compare_forms(&a, w).unwrap().relative);
        id = id.max(toeplitz(&one, w).unwrap().distance(&ident));
        let pos = a.map(|v| C64::new(v.norm(), 0.0));
        let cmp = compare_forms(&pos, w).unwrap();
        psd = psd.max(-cmp.min_eigenvalue / cmp.scale);
    }
    Line {
        pass: form <= 1e-7 && id <= 1e-7 && psd <= 1e-10,
        detail: format!("N=32, 5 pairs: form mismatch {form:.2e}, ‖Tp(1) − I‖ {id:.2e} (≤ 1e-7); worst −λ_min/scale {psd:.2e} (≤ 1e-10)"),
    }
}

fn gaussian_identity() -> Line {
    let g = grid(32);
    let s = gaussian_split([0.5, 0.5], g.config()).unwrap();
    let mut rel: f64 = 0.0;
    for w in [Weight::constant(1.0).unwrap(), Weight::bracket_power(2.0)] {
        rel = rel.max(toeplitz_weyl_symbol_identity(&s, &w).unwrap().relative);
    }
    let conv = s.convolution_residual;
    Line {
        pass: rel <= 1e-6 && conv <= 1e-8,
        detail: format!("N=32 Op^w(ω₀∗Φ_λ) vs Tp(ω₀∗Φ_ν) {rel:.2e} (≤ 1e-6), semigroup factorization {conv:.2e} (≤ 1e-8)"),
    }
}

fn one_parameter_group() -> Line {
    let dom = grid(32).phase();
    let (mut route, mut law, mut inv) = (0.0f64, 0.0f64, 0.0f64);
    for theta in [Weight::bracket_power(1.0), Weight::subexp(0.3, 2.0).unwrap()] {
        let p = EvolutionProblem::new(&theta, dom, 1.0).unwrap();
        for t in [-1.0, 1.0] {
            route = route.max(route_agreement(&p, t).unwrap().0.residuals[0].relative);
        }
        law = law.max(group_law_check(&p, 0.5, 0.5).unwrap().law.relative);
        let pair = inverse_pair(&theta, dom).unwrap();
        inv = inv.max(pair.ab.absolute).max(pair.ba.absolute);
    }
    Line {
        pass: route <= 1e-6 && law <= 1e-6 && inv <= 1e-6,
        detail: format!("N=32 routes at t=±1 {route:.2e}, a(½)#a(½) vs a(1) {law:.2e}, ‖a(1)#a(−1) − 1‖ {inv:.2e} (≤ 1e-6)"),
    }
}

fn lifting() -> Line {
    let specs = [(2.0, 2.0), (1.0, 1.0), (f64::INFINITY, 1.0), (2.0 / 3.0, 2.0 / 3.0)];
    let omega = Weight::bracket_power(1.0);
    let omega0 = Weight::bracket_power(2.0);
    let mut spreads = vec![];
    let mut rt: f64 = 0.0;
    for n in [48, 64] {
        let g = grid(n);
        let pair = inverse_pair(&omega0, g.phase()).unwrap();
        let ens = ensemble(g.config(), 8);
        let phi = standard_gaussian(g.config());
        rt = rt.max(round_trip(&pair, &ens).unwrap());
        let row: Vec<f64> = specs
            .iter()
            .map(|&(p, q)| {
                let spec = MixedNormSpec::lp(p, q).unwrap();
                lifting_report(&pair.a_op, &omega, &omega0, &spec, &ens, &phi, DEFAULT_RATIO_K).unwrap().stats.spread
            })
            .collect();
        spreads.push(row);
    }
    let max_spread = worst(&spreads.concat());
    let drift = worst(&spreads[0].iter().zip(&spreads[1]).map(|(a, b)| (b / a - 1.0).abs()).collect::<Vec<_>>());
    Line {
        pass: max_spread <= 10.0 && drift <= 0.2 && rt <= 1e-6,
        detail: format!("N=48→64 max/min {max_spread:.3} (≤ 10), drift {:.1}% (≤ 20%), round trip {rt:.2e} (≤ 1e-6)", 100.0 * drift),
    }
}

fn toeplitz_norms() -> Line {
    let mut spreads = vec![];
    for n in [64, 128] {
        let g = grid(n);
        let phi = standard_gaussian(g.config());
        let rep = toeplitz_norm_equivalence(&Weight::bracket_power(2.0), &phi, &ensemble(g.config(), 21), DEFAULT_RATIO_K).unwrap();
        spreads.push(rep.stats.spread);
    }
    let drift = (spreads[1] / spreads[0] - 1.0).abs();
    Line {
        pass: worst(&spreads) <= 10.0 && drift <= 0.2,
        detail: format!("N=64→128 max/min {:.3} → {:.3} (≤ 10), drift {:.1}% (≤ 20%)", spreads[0], spreads[1], 100.0 * drift),
    }
}

fn confinement() -> Line {
    let g = grid(32);
    let gauss = standard_gaussian(g.config());
    let fine = partition_of_unity(&gauss, g.h()).unwrap();
    let coarse = partition_of_unity(&gauss, 2.0 * g.h()).unwrap();

    let dom = grid(48).phase();
    let one = SampledFunction::constant(dom, C64::new(1.0, 0.0));
    let loc = gaussian_bump(dom, vec![0.0, 0.0], FRAC_1_SQRT_2, C64::new(1.0, 0.0));
    let a1 = windowed_weight(dom, &Weight::bracket_power(1.0));
    let a2 = SampledFunction::from_real_fn(dom, |p| p[0].cos());
    let rates = [
        confined_product_profile(&loc, &loc, &one, &one, &[0, 0], &[0, 0], 1.0, None).unwrap().r,
        confined_product_profile(&loc, &loc, &one, &one, &[-4, 0], &[4, 0], 1.0, None).unwrap().r,
        confined_product_profile(&loc, &loc, &a1, &a2, &[2, -1], &[-1, 3], 1.0, Some(&Weight::bracket_power(1.0))).unwrap().r,
    ];
    let r_min = rates.iter().cloned().fold(f64::INFINITY, f64::min);

    let w = Weight::bracket_power(2.0);
    let fits: Vec<ClassDiagnostic> =
        [128, 256].iter().map(|&n| class_diagnostic(&windowed_weight(grid(n).phase(), &w), &w, 1.0, DEFAULT_MAX_ORDER).unwrap()).collect();
    let trend = resolution_trend(&fits[0], &fits[1]);
    Line {
        pass: fine.defect <= 1e-3 && coarse.defect >= fine.defect && r_min > 0.0 && trend.relative_change <= 0.2,
        detail: format!(
            "N=32 partition defect {:.2e} at h (≤ 1e-3; {:.2e} at 2h), min decay rate {r_min:.3} (> 0), class h {:.4} → {:.4} at N=128→256 (±20%)",
            fine.defect, coarse.defect, trend.h_coarse, trend.h_fine
        ),
    }
}
fn appendix() -> Line {
    let mut failures = vec![];
    for n in 0..=30 {
        for k in 0..=30 {
            if !binomial_sum(n, k).unwrap().holds {
                failures.push(format!("binomial_sum({n},{k})"));
            }
        }
    }
    for gamma in 0..=30 {
        for j in 1..=10 {
            if !s_recursion(gamma, j).unwrap().holds {
                failures.push(format!("S_{j}({gamma})"));
            }
        }
    }
    // composition counts against a bounded scan of all tuples
    for d in 1..=3usize {
        for alpha in boxes(&vec![6; d]).into_iter().filter(|a| a.iter().sum::<u32>() <= 6) {
            for k in 1..=5usize {
                let scan = scan_count(&alpha, k);
                if composition_count(&MultiIndex::new(&alpha), k as u32).unwrap() != scan.into() {
                    failures.push(format!("composition_count({alpha:?},{k})"));
                }
            }
        }
    }
    let fdb = faa_di_bruno_cases();
    if fdb > 0 {
        failures.push(format!("{fdb} Faà di Bruno cases"));
    }
    for n in 1..=10 {
        if !factorial_sum_bound(&MultiIndex::new(&[n]), 1.0).unwrap().pass {
            failures.push(format!("factorial sum |α|={n}"));
        }
    }
    Line {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "binomial sums, S_j, composition lattice, 20 Faà di Bruno cases, factorial sums |α| ≤ 10: all exact".into()
        } else {
            format!("mismatches: {}", failures.join(", "))
        },
    }
}

fn boxes(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &a in alpha {
        out = out.into_iter().flat_map(|p| (0..=a).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

fn scan_count(alpha: &[u32], k: usize) -> u64 {
    fn go(c: &[Vec<u32>], alpha: &[u32], acc: &mut Vec<u32>, left: usize) -> u64 {
        if left == 0 {
            return (acc.as_slice() == alpha) as u64;
        }
        let mut n = 0;
        for b in c {
            if acc.iter().zip(b).zip(alpha).all(|((a, x), m)| a + x <= *m) {
                acc.iter_mut().zip(b).for_each(|(a, x)| *a += x);
                n += go(c, alpha, acc, left - 1);
                acc.iter_mut().zip(b).for_each(|(a, x)| *a -= x);
            }
        }
        n
    }
    go(&boxes(alpha), alpha, &mut vec![0; alpha.len()], k)
}

type Rat = num_rational::BigRational;
type Poly = std::collections::BTreeMap<Vec<u32>, Rat>;

fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Exact polynomial chain rule against the formula; returns the number of mismatches.
fn faa_di_bruno_cases() -> usize {
    use num_traits::{One, Zero};
    fn mul(a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::new();
        for (ea, ca) in a {
            for (eb, cb) in b {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *out.entry(e).or_insert_with(Rat::zero) += ca * cb;
            }
        }
        out
    }
    fn diff(p: &Poly, alpha: &[u32]) -> Poly {
        let mut out = Poly::new();
        for (e, c) in p {
            if e.iter().zip(alpha).all(|(x, a)| x >= a) {
                let mut coef = c.clone();
                let mut ne = e.clone();
                for i in 0..alpha.len() {
                    for t in 0..alpha[i] {
                        coef *= rat((e[i] - t) as i64);
                    }
                    ne[i] -= alpha[i];
                }
                *out.entry(ne).or_insert_with(Rat::zero) += coef;
            }
        }
        out
    }
    fn eval(p: &Poly, x: &[Rat]) -> Rat {
        p.iter().map(|(e, c)| e.iter().zip(x).fold(c.clone(), |acc, (&k, xi)| acc * num_traits::pow(xi.clone(), k as usize))).sum()
    }
    let mut r = rng(20);
    let mut bad = 0;
    for case in 0..20 {
        let d = 1 + case % 3;
        let f: Vec<Rat> = (0..=r.gen_range(1..=4)).map(|_| rat(r.gen_range(-4..=4))).collect();
        let mut g = Poly::new();
        for _ in 0..6 {
            let e: Vec<u32> = (0..d).map(|_| r.gen_range(0..=2)).collect();
            if e.iter().sum::<u32>() <= 4 {
                *g.entry(e).or_insert_with(Rat::zero) += rat(r.gen_range(-3..=3));
            }
        }
        let alpha: Vec<u32> = (0..d).map(|_| r.gen_range(0..=2)).collect();
        let x: Vec<Rat> = (0..d).map(|_| Rat::new(r.gen_range(-5..=5).into(), r.gen_range(1..=3).into())).collect();
        let mut fg = Poly::new();
        let mut power = Poly::from([(vec![0; d], Rat::one())]);
        for c in &f {
            for (e, v) in &power {
                *fg.entry(e.clone()).or_insert_with(Rat::zero) += c * v;
            }
            power = mul(&power, &g);
        }
        let want = eval(&diff(&fg, &alpha), &x);
        let y = eval(&g, &x);
        let n = alpha.iter().sum::<u32>() as usize;
        let mut outer = vec![];
        let mut fk = f.clone();
        for _ in 0..=n {
            outer.push(fk.iter().rev().fold(Rat::zero(), |acc, c| acc * &y + c));
            fk = fk.iter().enumerate().skip(1).map(|(i, c)| c * rat(i as i64)).collect();
        }
        let inner: HashMap<MultiIndex, Rat> = boxes(&alpha)
            .into_iter()
            .filter(|b| b.iter().any(|&v| v > 0))
            .map(|b| {
                let v = eval(&diff(&g, &b), &x);
                (MultiIndex(b), v)
            })
            .collect();
        if faa_di_bruno(&outer, &inner, &MultiIndex::new(&alpha)).ok() != Some(want) {
            bad += 1;
        }
    }
    bad
}

fn weight_certification() -> Line {
    let dom = grid(32).phase();
    let set = SampleSet::standard(&dom, 2024);
    let br = Weight::bracket_power(1.0);
    let peetre = moderation_constant(&br, &br, &set);
    let se = Weight::subexp(1.0, 2.0).unwrap();
    let sub = certify_moderate(&se, &se, &set).unwrap().c_hat;
    let bump = SampledFunction::from_real_fn(dom, |p| (-norm_sqr(p)).exp() / PI);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for w in [Weight::bracket_power(1.0), Weight::bracket_power(2.0), Weight::subexp(0.3, 2.0).unwrap()] {
        let m = mollify(&w, &bump).unwrap();
        lo = lo.min(m.c1);
        hi = hi.max(m.c2);
    }
    let lc = moderation_constant(&log_weight(&br), &log_weight(&br), &set);
    let lbound = 1.0 + peetre.ln();
    let finite = lo.is_finite() && hi.is_finite() && lo > 0.0;
    Line {
        pass: peetre <= 2f64.sqrt() && sub <= 1.0 + 1e-12 && finite && lc <= lbound * (1.0 + 1e-12),
        detail: format!(
            "Peetre ⟨·⟩ {peetre:.6} (≤ √2), subexp {sub:.15} (≤ 1+1e-12), mollified ratios [{lo:.4}, {hi:.4}], log-weight {lc:.6} (≤ {lbound:.6})"
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Line); 12] = [
        ("transform correctness", transforms),
        ("quantization round trip", quantization),
        ("Wigner pairing", pairing),
        ("product-route equivalence", product_routes),
        ("Toeplitz forms", toeplitz_forms),
        ("Gaussian Toeplitz–Weyl identity", gaussian_identity),
        ("one-parameter group", one_parameter_group),
        ("lifting isomorphism", lifting),
        ("Toeplitz norm equivalence", toeplitz_norms),
        ("confinement", confinement),
        ("appendix exactness", appendix),
        ("weight certification", weight_certification),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        // a runtime error inside a criterion is reported as its failure
        let line = std::panic::catch_unwind(f).unwrap_or_else(|e| Line {
            pass: false,
            detail: format!("runtime error: {}", e.downcast_ref::<String>().cloned().unwrap_or_default()),
        });
        if !line.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if line.pass { "PASS" } else { "FAIL" }, i + 1, line.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
