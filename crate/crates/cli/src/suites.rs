//! The verification suites. Each returns report rows; criterion numbers refer
//! to the acceptance list in the README.

use crate::config::{Experiment, Resolved, WindowKind};
use crate::report::{Check, Relation};
use crate::svg::{bar_chart_svg, export_heatmap, Heatmap};
use crate::CliError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use symcalc::combinat::*;
use symcalc::confine::*;
use symcalc::functions::*;
use symcalc::modspace::{quasi_triangle, window_equivalence_report, MixedNormSpec};
use symcalc::quantize::{
    change_quantization, export_matrix, export_symbol, kernel_from_symbol, op_matrix, op_weyl, symbol_from_kernel,
    wigner_pairing_check,
};
use symcalc::symgroup::*;
use symcalc::tfa::{cross_wigner, fourier, stft, symplectic_fourier};
use symcalc::toeplitz::*;
use symcalc::weights::{certify_moderate, log_weight, moderation_constant, mollify, SampleSet};
use symcalc::weylalg::*;
use symcalc::{Domain, OperatorMatrix, PhaseGrid, Quantization, SampledFunction, Weight, C64};

pub struct Ctx<'a> {
    pub res: &'a Resolved,
    pub out: &'a Path,
    pub svg: bool,
    pub files: Vec<String>,
}

type Rows = Vec<Check>;

struct Rec<'s> {
    suite: &'s str,
    rows: Rows,
}

impl<'s> Rec<'s> {
    fn le(&mut self, c: Option<u32>, name: impl Into<String>, measured: f64, threshold: f64) {
        self.rows.push(Check::new(self.suite, c, name, measured, Relation::Le, threshold));
    }
    fn gt(&mut self, c: Option<u32>, name: impl Into<String>, measured: f64, threshold: f64) {
        self.rows.push(Check::new(self.suite, c, name, measured, Relation::Gt, threshold));
    }
    fn eq(&mut self, c: Option<u32>, name: impl Into<String>, measured: f64, threshold: f64) {
        self.rows.push(Check::new(self.suite, c, name, measured, Relation::Eq, threshold));
    }
}

pub fn run_suite(ctx: &mut Ctx, exp: &Experiment) -> Result<Rows, CliError> {
    let suite = exp.suite.as_str();
    let mut rec = Rec { suite, rows: vec![] };
    match suite {
        "tfa-core" => tfa_core(ctx, &mut rec)?,
        "modspace" => modspace(ctx, exp, &mut rec)?,
        "quantize" => quantize(ctx, &mut rec)?,
        "weylalg" => weylalg(ctx, &mut rec)?,
        "toeplitz" => toeplitz_suite(ctx, exp, &mut rec)?,
        "symgroup" => symgroup(ctx, exp, &mut rec)?,
        "confine" => confine(ctx, exp, &mut rec)?,
        "combinat" => combinat(&mut rec),
        "weights" => weights(ctx, &mut rec)?,
        other => return Err(CliError::Config(format!("experiments: unknown suite `{other}`"))),
    }
    Ok(rec.rows)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_diff(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn central_diff(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.domain().central_indices().into_iter().map(|i| (a.get(i) - b.get(i)).norm()).fold(0.0, f64::max)
}

fn random_values(dom: Domain, r: &mut ChaCha8Rng) -> SampledFunction {
    let v = (0..dom.len()).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    SampledFunction::from_values(dom, v).expect("length matches the domain")
}

fn mixture(dom: Domain, k: usize, spread: f64, w0: f64, w1: f64, r: &mut ChaCha8Rng) -> SampledFunction {
    let mut acc = SampledFunction::zeros(dom);
    for _ in 0..k {
        let c: Vec<f64> = (0..dom.ndim).map(|_| r.gen_range(-spread..spread)).collect();
        let w = r.gen_range(w0..w1);
        let amp = C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        acc = acc.add(&gaussian_bump(dom, c, w, amp)).expect("same domain");
    }
    acc
}

fn window(kind: &WindowKind, cfg: Domain) -> Result<SampledFunction, CliError> {
    let w = match kind {
        WindowKind::Gaussian { w } => gaussian_window(cfg, *w),
        WindowKind::Coherent { x0, xi0 } => coherent_state(cfg, x0, xi0),
    };
    Ok(w.normalized()?)
}

fn ensemble(res: &Resolved, cfg: Domain) -> Vec<SampledFunction> {
    let e = &res.config.ensembles;
    let mut r = rng(e.seed);
    let mut out = hermite_ensemble(cfg, e.hermite_count);
    for _ in 0..e.random_coherent_count {
        let x: Vec<f64> = (0..cfg.ndim).map(|_| r.gen_range(-e.shift..=e.shift)).collect();
        let xi: Vec<f64> = (0..cfg.ndim).map(|_| r.gen_range(-e.shift..=e.shift)).collect();
        out.push(coherent_state(cfg, &x, &xi));
    }
    out
}

fn weights_or(res: &Resolved, exp: &Experiment, defaults: Vec<Weight>) -> Vec<Weight> {
    if exp.weights.is_empty() {
        defaults
    } else {
        exp.weights.iter().map(|id| res.weights[id].1.clone().with_label(id.clone())).collect()
    }
}

impl Ctx<'_> {
    fn seed(&self) -> u64 {
        self.res.config.ensembles.seed
    }

    fn figure(&mut self, name: &str, map: &Heatmap) -> Result<(), CliError> {
        export_heatmap(map, &self.out.join(name))?;
        self.files.push(name.into());
        Ok(())
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        std::fs::write(self.out.join(name), text).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        self.files.push(name.into());
        Ok(())
    }

    fn dump_dir(&self) -> Result<std::path::PathBuf, CliError> {
        let d = self.out.join("dumps");
        std::fs::create_dir_all(&d).map_err(|e| CliError::Io(format!("dumps: {e}")))?;
        Ok(d)
    }

    fn dump_symbol(&mut self, name: &str, a: &SampledFunction, q: Option<&Quantization>) -> Result<(), CliError> {
        export_symbol(a, q, &self.dump_dir()?.join(name))?;
        self.files.push(format!("dumps/{name}.bin"));
        self.files.push(format!("dumps/{name}.json"));
        Ok(())
    }

    fn dump_matrix(&mut self, name: &str, m: &OperatorMatrix) -> Result<(), CliError> {
        export_matrix(m, &self.dump_dir()?.join(name))?;
        self.files.push(format!("dumps/{name}.bin"));
        self.files.push(format!("dumps/{name}.json"));
        Ok(())
    }
}

fn phase_heatmap(ctx: &mut Ctx, name: &str, f: &SampledFunction, title: &str) -> Result<(), CliError> {
    let dom = f.domain();
    let vals: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    // flat index is ix·N + iξ: rows are x, so transpose to put ξ on the vertical axis
    let n = dom.n();
    let t: Vec<f64> = (0..n * n).map(|k| vals[(k % n) * n + k / n]).collect();
    let (lo, hi) = (dom.axis.node(0), dom.axis.node(n - 1));
    ctx.figure(name, &Heatmap { values: &t, shape: &[n, n], x_range: (lo, hi), y_range: (lo, hi), x_label: "x", y_label: "ξ", title })
}

fn tfa_core(ctx: &mut Ctx, rec: &mut Rec) -> Result<(), CliError> {
    let g = ctx.res.grid;
    let f = standard_gaussian(g.config());
    rec.le(Some(1), "fourier_gaussian_fixed_point", max_diff(&fourier(&f)?, &f), 1e-10);
    let mut r = rng(ctx.seed());
    let u = random_values(g.config(), &mut r);
    rec.le(Some(1), "parseval", (fourier(&u)?.l2_norm() - u.l2_norm()).abs() / u.l2_norm(), 1e-10);
    let a = random_values(g.phase(), &mut r);
    let inv = max_diff(&symplectic_fourier(&symplectic_fourier(&a)?)?, &a) / a.sup_norm();
    rec.le(Some(1), "symplectic_fourier_involution", inv, 1e-10);
    let gs = SampledFunction::from_real_fn(g.phase(), |p| (-norm_sqr(p)).exp());
    rec.le(Some(1), "symplectic_fourier_gaussian_fixed_point", max_diff(&symplectic_fourier(&gs)?, &gs), 1e-10);
    let v = stft(&f, &f)?;
    rec.le(None, "stft_norm_identity", (v.l2_norm() - f.l2_norm().powi(2)).abs(), 1e-12);
    let w = cross_wigner(&f, &f)?;
    let c = (2.0 / std::f64::consts::PI).sqrt();
    let want = SampledFunction::from_real_fn(g.phase(), move |p| c * (-norm_sqr(p)).exp());
    rec.le(None, "wigner_gaussian_closed_form", max_diff(&w, &want), 1e-8);
    if ctx.svg {
        phase_heatmap(ctx, "wigner_gaussian.svg", &w, "Wigner distribution of the standard Gaussian")?;
        let cs = coherent_state(g.config(), &[0.5], &[-0.5]);
        phase_heatmap(ctx, "stft_magnitude.svg", &stft(&cs, &f)?, "|V_φ f|, f coherent at (0.5, −0.5)")?;
    }
    Ok(())
}

fn modspace(ctx: &mut Ctx, exp: &Experiment, rec: &mut Rec) -> Result<(), CliError> {
    let res = ctx.res;
    let k = res.config.tolerances.ratio_k;
    let ids: Vec<&String> = exp.windows.iter().collect();
    let kinds: Vec<WindowKind> = if ids.len() >= 2 {
        ids.iter().map(|id| res.windows[*id].clone()).collect()
    } else {
        vec![WindowKind::Gaussian { w: 1.0 }, WindowKind::Gaussian { w: 0.8 }]
    };
    let specs = [(2.0, 2.0), (1.0, 1.0), (f64::INFINITY, 1.0), (2.0 / 3.0, 2.0 / 3.0)];
    for w in weights_or(res, exp, vec![Weight::bracket_power(1.0)]) {
        let mut spreads = vec![];
        for g in [res.grid, res.refine] {
            let cfg = g.config();
            let (p1, p2) = (window(&kinds[0], cfg)?, window(&kinds[1], cfg)?);
            let ens = ensemble(res, cfg);
            let mut row = vec![];
            for (p, q) in specs {
                let spec = MixedNormSpec::lp(p, q)?;
                let rep = window_equivalence_report(&ens, &p1, &p2, &w, &spec, k)?;
                rec.le(None, format!("window_equivalence[{}](N={},p={p},q={q})", w.label(), g.n(), ), rep.stats.spread, k);
                row.push(rep.stats.spread);
            }
            spreads.push(row);
        }
        let drift = spreads[0].iter().zip(&spreads[1]).map(|(a, b)| (b / a - 1.0).abs()).fold(0.0, f64::max);
        rec.le(None, format!("window_equivalence_drift[{}]", w.label()), drift, 0.2);
        let cfg = res.grid.config();
        let phi = window(&kinds[0], cfg)?;
        let mut r = rng(res.config.ensembles.seed);
        let mut worst: f64 = 0.0;
        for _ in 0..3 {
            let f = mixture(cfg, 2, 1.0, 0.7, 1.2, &mut r);
            let h = mixture(cfg, 2, 1.0, 0.7, 1.2, &mut r);
            for (p, q) in [(1.0, 1.0), (2.0, 2.0), (f64::INFINITY, 1.0)] {
                let t = quasi_triangle(&f, &h, &phi, &w, &MixedNormSpec::lp(p, q)?)?;
                worst = worst.max(t.lhs / t.rhs);
            }
        }
        rec.le(None, format!("triangle_inequality[{}]", w.label()), worst, 1.0 + 1e-9);
    }
    Ok(())
}

fn quantize(ctx: &mut Ctx, rec: &mut Rec) -> Result<(), CliError> {
    let g = ctx.res.grid;
    let mut r = rng(ctx.seed());
    let a = random_values(g.phase(), &mut r);
    let ts = [0.0, 0.25, 0.5, 1.0];
    let qs = ts.map(|t| Quantization::scalar(t, 1));
    for (t, q) in ts.iter().zip(&qs) {
        let back = symbol_from_kernel(&kernel_from_symbol(&a, q)?, q)?;
        rec.le(Some(2), format!("symbol_kernel_round_trip(A={t})"), max_diff(&back, &a) / a.sup_norm(), 1e-12);
    }
    let mut inv: f64 = 0.0;
    for q1 in &qs {
        for q2 in &qs {
            let b = change_quantization(&a, q1, q2)?;
            inv = inv.max(op_matrix(&a, q1)?.distance(&op_matrix(&b, q2)?));
        }
    }
    rec.le(Some(2), "change_of_quantization_invariance", inv, 1e-10);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let s = mixture(g.phase(), 3, 1.5, 0.7, 1.2, &mut r);
        let f = mixture(g.config(), 2, 1.0, 0.8, 1.2, &mut r);
        let h = mixture(g.config(), 2, 1.0, 0.8, 1.2, &mut r);
        let p = wigner_pairing_check(&s, &f, &h, &qs[i % 4])?;
        worst = worst.max(p.residual / p.scale.max(1.0));
    }
    rec.le(Some(3), "wigner_pairing(10 triples)", worst, 1e-8);
    if ctx.res.config.dumps {
        let s = mixture(g.phase(), 3, 1.0, 0.7, 1.2, &mut r);
        let weyl = Quantization::weyl(1);
        ctx.dump_symbol("quantize_symbol", &s, Some(&weyl))?;
        ctx.dump_matrix("quantize_op_weyl", &op_weyl(&s)?)?;
    }
    Ok(())
}

fn weylalg(ctx: &mut Ctx, rec: &mut Rec) -> Result<(), CliError> {
    let g = ctx.res.grid;
    let tol = ctx.res.config.tolerances.route_tol;
    let mut r = rng(ctx.seed());
    let gs = SampledFunction::from_real_fn(g.phase(), |p| (-norm_sqr(p)).exp());
    let mut pairs = vec![("gaussian".to_string(), gs.clone(), gs)];
    for i in 0..3 {
        let a = mixture(g.phase(), 3, 1.0, 0.65, 0.75, &mut r);
        let b = mixture(g.phase(), 3, 1.0, 0.65, 0.75, &mut r);
        pairs.push((format!("mixture{i}"), a, b));
    }
    for (name, a, b) in &pairs {
        rec.le(Some(4), format!("product_routes[{name}]"), product_route_equivalence(a, b)?.relative, tol);
        rec.le(Some(4), format!("weyl_fourier_identity[{name}]"), weyl_fourier_identity_check(a, b)?.relative, tol);
        for res in twisted_fourier_identity(a, b)? {
            rec.le(Some(4), format!("{}[{name}]", res.name), res.relative, tol);
        }
    }
    let l = g.axis().half_width();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = SampledFunction::from_real_fn(g.phase(), move |p| periodic_linear(p[0], l, s));
    let xi = SampledFunction::from_real_fn(g.phase(), move |p| periodic_linear(p[1], l, s));
    let c = commutator(&x, &xi)?;
    rec.le(Some(4), "commutator_x_xi", central_diff(&c, &SampledFunction::constant(g.phase(), C64::new(0.0, 1.0))), 1e-8);
    // Op^w is multiplicative: Op(a#b) = Op(a)Op(b)
    let (_, a, b) = &pairs[1];
    let m = op_weyl(&weyl_product_unchecked(a, b, &Quantization::weyl(1))?)?;
    rec.le(None, "op_multiplicativity", m.distance(&op_weyl(a)?.compose(&op_weyl(b)?)?), 1e-12);
    Ok(())
}

fn toeplitz_suite(ctx: &mut Ctx, exp: &Experiment, rec: &mut Rec) -> Result<(), CliError> {
    let res = ctx.res;
    let g = res.grid;
    let cfg = g.config();
    let windows: Vec<(String, SampledFunction)> = if exp.windows.is_empty() {
        vec![
            ("gaussian(1)".into(), standard_gaussian(cfg)),
            ("gaussian(0.8)".into(), window(&WindowKind::Gaussian { w: 0.8 }, cfg)?),
            ("gaussian(0.9)".into(), window(&WindowKind::Gaussian { w: 0.9 }, cfg)?),
            ("coherent(0.2,-0.3)".into(), window(&WindowKind::Coherent { x0: vec![0.2], xi0: vec![-0.3] }, cfg)?),
            ("coherent(-0.3,0.2)".into(), window(&WindowKind::Coherent { x0: vec![-0.3], xi0: vec![0.2] }, cfg)?),
        ]
    } else {
        exp.windows.iter().map(|id| Ok((id.clone(), window(&res.windows[id], cfg)?))).collect::<Result<_, CliError>>()?
    };
    let mut r = rng(ctx.seed());
    let one = SampledFunction::constant(g.phase(), C64::new(1.0, 0.0));
    let ident = OperatorMatrix::identity(&cfg);
    for (name, w) in &windows {
        let a = mixture(g.phase(), 3, 2.0, 0.7, 1.5, &mut r);
        rec.le(Some(5), format!("forms_agree[{name}]"), compare_forms(&a, w)?.relative, 1e-7);
        rec.le(Some(5), format!("tp_one_is_identity[{name}]"), toeplitz(&one, w)?.distance(&ident), 1e-7);
        let cmp = compare_forms(&a.map(|v| C64::new(v.norm(), 0.0)), w)?;
        rec.le(Some(5), format!("nonnegative_symbol_psd[{name}]"), -cmp.min_eigenvalue / cmp.scale, 1e-10);
    }
    let split = gaussian_split([0.5, 0.5], cfg)?;
    rec.le(Some(6), "gaussian_semigroup_factorization", split.convolution_residual, 1e-8);
    let ws = weights_or(res, exp, vec![Weight::constant(1.0)?, Weight::bracket_power(2.0)]);
    for w in &ws {
        rec.le(Some(6), format!("weyl_toeplitz_identity[{}]", w.label()), toeplitz_weyl_symbol_identity(&split, w)?.relative, 1e-6);
    }
    let k = res.config.tolerances.ratio_k;
    for w in &ws {
        let mut spreads = vec![];
        for pg in [res.grid, res.refine] {
            let phi = standard_gaussian(pg.config());
            let rep = toeplitz_norm_equivalence(w, &phi, &ensemble(res, pg.config()), k)?;
            rec.le(Some(9), format!("toeplitz_norm_equivalence[{}](N={})", w.label(), pg.n()), rep.stats.spread, k);
            spreads.push(rep.stats.spread);
        }
        rec.le(Some(9), format!("toeplitz_norm_drift[{}]", w.label()), (spreads[1] / spreads[0] - 1.0).abs(), 0.2);
    }
    Ok(())
}

fn symgroup(ctx: &mut Ctx, exp: &Experiment, rec: &mut Rec) -> Result<(), CliError> {
    let res = ctx.res;
    let tol = res.config.tolerances.group_tol;
    let dom = res.grid.phase();
    let thetas = weights_or(res, exp, vec![Weight::bracket_power(1.0), Weight::subexp(0.3, 2.0)?]);
    for (i, theta) in thetas.iter().enumerate() {
        let l = theta.label().to_string();
        let p = EvolutionProblem::new(theta, dom, 1.0)?;
        for t in [-1.0, 1.0] {
            rec.le(Some(7), format!("evolution_routes[{l}](t={t})"), route_agreement(&p, t)?.0.residuals[0].relative, tol);
        }
        rec.le(Some(7), format!("group_law[{l}]"), group_law_check(&p, 0.5, 0.5)?.law.relative, tol);
        let pair = inverse_pair(theta, dom)?;
        rec.le(Some(7), format!("inverse_pair[{l}]"), pair.ab.absolute.max(pair.ba.absolute), tol);
        if i == 0 {
            if ctx.svg {
                phase_heatmap(ctx, "symbol_a1.svg", &pair.a, &format!("|a(1)| for ϑ = {l}"))?;
            }
            if res.config.dumps {
                ctx.dump_symbol("symgroup_a1", &pair.a, Some(&Quantization::weyl(1)))?;
                ctx.dump_matrix("symgroup_op_a1", &pair.a_op)?;
            }
        }
    }
    // lifting M(ω) → M(ω/ω₀) through Op(a(1)) for ω₀ = ⟨·⟩², ω = ⟨·⟩
    let specs = [(2.0, 2.0), (1.0, 1.0), (f64::INFINITY, 1.0), (2.0 / 3.0, 2.0 / 3.0)];
    let (omega, omega0) = (Weight::bracket_power(1.0), Weight::bracket_power(2.0));
    let k = res.config.tolerances.ratio_k;
    let mut spreads = vec![];
    for pg in [res.grid, res.refine] {
        let pair = inverse_pair(&omega0, pg.phase())?;
        let ens = ensemble(res, pg.config());
        let phi = standard_gaussian(pg.config());
        rec.le(Some(8), format!("lifting_round_trip(N={})", pg.n()), round_trip(&pair, &ens)?, 1e-6);
        let mut row = vec![];
        for (p, q) in specs {
            let rep = lifting_report(&pair.a_op, &omega, &omega0, &MixedNormSpec::lp(p, q)?, &ens, &phi, k)?;
            rec.le(Some(8), format!("lifting_ratio_spread(N={},p={p},q={q})", pg.n()), rep.stats.spread, k);
            row.push(rep.stats.spread);
        }
        spreads.push(row);
    }
    let drift = spreads[0].iter().zip(&spreads[1]).map(|(a, b)| (b / a - 1.0).abs()).fold(0.0, f64::max);
    rec.le(Some(8), "lifting_drift", drift, 0.2);
    if ctx.svg {
        let labels: Vec<String> = specs.iter().map(|(p, q)| format!("({},{})", fmt_exp(*p), fmt_exp(*q))).collect();
        let svg = bar_chart_svg(&format!("lifting ratio max/min at N = {}", res.grid.n()), &labels, &spreads[0], Some((k, "K")))?;
        ctx.write("lifting_ratios.svg", &svg)?;
    }
    Ok(())
}

fn fmt_exp(p: f64) -> String {
    if p.is_infinite() {
        "∞".into()
    } else if (p - 2.0 / 3.0).abs() < 1e-12 {
        "2/3".into()
    } else {
        format!("{p}")
    }
}

fn confine(ctx: &mut Ctx, exp: &Experiment, rec: &mut Rec) -> Result<(), CliError> {
    let res = ctx.res;
    let g = res.grid;
    let gauss = standard_gaussian(g.config());
    let fine = partition_of_unity(&gauss, g.h())?;
    let coarse = partition_of_unity(&gauss, 2.0 * g.h())?;
    rec.le(Some(10), "partition_defect(step=h)", fine.defect, PARTITION_TOL);
    rec.le(Some(10), "partition_refinement(defect_h - defect_2h)", fine.defect - coarse.defect, 0.0);
    rec.le(None, "partition_idempotence", fine.idempotence.relative, fine.idempotence.threshold);

    let dom = g.phase();
    let one = SampledFunction::constant(dom, C64::new(1.0, 0.0));
    let loc = gaussian_bump(dom, vec![0.0, 0.0], std::f64::consts::FRAC_1_SQRT_2, C64::new(1.0, 0.0));
    let a1 = windowed_weight(dom, &Weight::bracket_power(1.0));
    let a2 = SampledFunction::from_real_fn(dom, |p| p[0].cos());
    let br = Weight::bracket_power(1.0);
    let cases: [(&str, &SampledFunction, &SampledFunction, [i64; 2], [i64; 2], Option<&Weight>); 3] = [
        ("centred", &one, &one, [0, 0], [0, 0], None),
        ("separated", &one, &one, [-4, 0], [4, 0], None),
        ("bounded_symbols", &a1, &a2, [2, -1], [-1, 3], Some(&br)),
    ];
    for (name, s1, s2, y, z, w) in cases {
        let p = confined_product_profile(&loc, &loc, s1, s2, &y, &z, 1.0, w)?;
        rec.gt(Some(10), format!("confined_decay_rate[{name}]"), p.r, 0.0);
    }
    // derivative fits need resolved 4th derivatives: at least N = 128
    let n0 = g.n().max(128);
    let grids = [symcalc::make_grid(n0, 1, symcalc::GridMode::SelfDual)?, symcalc::make_grid(2 * n0, 1, symcalc::GridMode::SelfDual)?];
    for w in weights_or(res, exp, vec![Weight::bracket_power(2.0)]) {
        let fits: Vec<ClassDiagnostic> = grids
            .iter()
            .map(|pg: &PhaseGrid| class_diagnostic(&windowed_weight(pg.phase(), &w), &w, 1.0, DEFAULT_MAX_ORDER))
            .collect::<symcalc::Result<_>>()?;
        let trend = resolution_trend(&fits[0], &fits[1]);
        rec.le(Some(10), format!("class_fit_drift[{}](N={}→{})", w.label(), n0, 2 * n0), trend.relative_change, 0.2);
    }
    let pair = inverse_pair(&Weight::bracket_power(2.0), dom)?;
    let env = minfty1_envelope(&pair.a, &Weight::bracket_power(2.0), 1.0)?;
    rec.gt(None, "minfty1_envelope_rate[a(1)]", env.r, MIN_ENVELOPE_RATE);
    Ok(())
}

fn combinat(rec: &mut Rec) {
    let mut bad = 0;
    for n in 0..=30 {
        for k in 0..=30 {
            bad += !binomial_sum(n, k).map(|r| r.holds).unwrap_or(false) as u32;
        }
    }
    rec.eq(Some(11), "binomial_sum_mismatches(n,k≤30)", bad as f64, 0.0);
    let mut bad = 0;
    for gamma in 0..=30 {
        for j in 1..=10 {
            bad += !s_recursion(gamma, j).map(|r| r.holds).unwrap_or(false) as u32;
        }
    }
    rec.eq(Some(11), "s_recursion_mismatches(γ≤30,j≤10)", bad as f64, 0.0);
    let mut bad = 0;
    for d in 1..=3usize {
        for alpha in oracle::boxes(&vec![6; d]).into_iter().filter(|a| a.iter().sum::<u32>() <= 6) {
            for k in 1..=5usize {
                let want = num_bigint::BigUint::from(oracle::scan_count(&alpha, k));
                bad += (composition_count(&MultiIndex::new(&alpha), k as u32).ok() != Some(want)) as u32;
            }
        }
    }
    rec.eq(Some(11), "composition_count_mismatches(|α|≤6,k≤5,d≤3)", bad as f64, 0.0);
    rec.eq(Some(11), "faa_di_bruno_mismatches(20 polynomial pairs)", oracle::faa_di_bruno_mismatches(20, 20) as f64, 0.0);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for n in 1..=10 {
        let a = MultiIndex::new(&[n]);
        match (factorial_sum_bound(&a, 1.0), factorial_sum_bound(&a, 0.5)) {
            (Ok(one), Ok(half)) => {
                worst = worst.max(one.upper / one.bound).max(half.upper / half.bound);
                monotone &= half.value <= one.value;
            }
            _ => worst = f64::NAN,
        }
    }
    rec.le(Some(11), "factorial_sum_over_16^|α|(|α|≤10)", worst, 1.0);
    rec.eq(None, "factorial_sum_monotone_in_s0", monotone as u8 as f64, 1.0);
}

fn weights(ctx: &mut Ctx, rec: &mut Rec) -> Result<(), CliError> {
    let dom = ctx.res.grid.phase();
    let set = SampleSet::standard(&dom, ctx.seed());
    let br = Weight::bracket_power(1.0);
    let peetre = moderation_constant(&br, &br, &set);
    rec.le(Some(12), "peetre_constant[⟨·⟩]", peetre, 2f64.sqrt());
    let se = Weight::subexp(1.0, 2.0)?;
    rec.le(Some(12), "subexp_subadditivity_constant", certify_moderate(&se, &se, &set)?.c_hat, 1.0 + 1e-12);
    let bump = SampledFunction::from_real_fn(dom, |p| (-norm_sqr(p)).exp() / std::f64::consts::PI);
    for w in [Weight::bracket_power(1.0), Weight::bracket_power(2.0), Weight::subexp(0.3, 2.0)?] {
        let m = mollify(&w, &bump)?;
        rec.gt(Some(12), format!("mollified_ratio_min[{}]", w.label()), m.c1, 0.0);
        rec.le(Some(12), format!("mollified_ratio_max[{}]", w.label()), m.c2, f64::MAX);
    }
    let lc = moderation_constant(&log_weight(&br), &log_weight(&br), &set);
    rec.le(Some(12), "log_weight_moderation[⟨·⟩]", lc, (1.0 + peetre.ln()) * (1.0 + 1e-12));
    Ok(())
}

/// Independent exact oracles for the combinatorics suite.
mod oracle {
    use super::rng;
    use num_rational::BigRational as Rat;
    use num_traits::{One, Zero};
    use rand::Rng;
    use std::collections::{BTreeMap, HashMap};
    use symcalc::combinat::{faa_di_bruno, MultiIndex};

    type Poly = BTreeMap<Vec<u32>, Rat>;

    pub fn boxes(alpha: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for &a in alpha {
            out = out.into_iter().flat_map(|p| (0..=a).map(move |v| [p.clone(), vec![v]].concat())).collect();
        }
        out
    }

    /// k-tuples of β ≤ α summing to α, by pruned scan.
    pub fn scan_count(alpha: &[u32], k: usize) -> u64 {
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

    fn rat(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

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

    /// Random f (degree ≤ 4, one variable) and g (degree ≤ 4, d ≤ 3 variables):
    /// ∂^α(f∘g) by expanding the composition, against the formula.
    pub fn faa_di_bruno_mismatches(cases: usize, seed: u64) -> usize {
        let mut r = rng(seed);
        let mut bad = 0;
        for case in 0..cases {
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
            bad += (faa_di_bruno(&outer, &inner, &MultiIndex::new(&alpha)).ok() != Some(want)) as usize;
        }
        bad
    }
}
