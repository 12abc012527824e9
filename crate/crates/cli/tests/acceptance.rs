//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::fs;
use std::time::{Duration, Instant};

use extremal_core::diagnostics::{invariance_at_achieved_rank, spectral_reference};
use extremal_core::generators::{
    gaussian_cx, gaussian_vector, geometric_shift, harmonic_shift, random_dense, random_normal, rng, unit_vector,
};
use extremal_core::mc::{
    case_dichotomy, dominance_renormalize, first_order_oracle, h_curve, run_mc, CaseOutcome, ChangeFunctionals,
    DominanceOptions, LemmaOptions, McConfig,
};
use extremal_core::operator::gram_apply;
use extremal_core::probes::{shift_phenomenon, ShiftOptions};
use extremal_core::solver::{almost_invariance_profile, calibrate_scale, oracle_minimize, solve_extremal};
use extremal_core::{Cx, HVector, LabError, PrecisionCtx};
use extremal_lab::config::parse_config;
use extremal_lab::run::run_experiment;
use extremal_lab::Mode;
use rug::Float;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sci(x: &Float) -> String {
    format!("{:.3e}", x.to_f64())
}

fn band_x0(dim: usize, prec: u32) -> HVector {
    let mut x = HVector::basis(dim, 0, prec).scale_real(&(Float::with_val(prec, 3).sqrt() / 2u32));
    x.axpy_real(&Float::with_val(prec, 0.5), &HVector::basis(dim, 1, prec));
    x
}

/// Dot product `sum r_j conj(s_j)`.
fn dot(r: &[Cx], s: &[Cx], prec: u32) -> Cx {
    let mut acc = Cx::zero(prec);
    for (a, b) in r.iter().zip(s) {
        acc.add_mul_conj(a, b);
    }
    acc
}

/// `sum r_j T^j y`, built by repeated application.
fn poly_apply(t: &extremal_core::OperatorSpec, r: &[Cx], y: &HVector) -> HVector {
    let mut out = HVector::zeros(y.dim(), y.prec());
    let mut v = y.clone();
    for (j, c) in r.iter().enumerate() {
        if j > 0 {
            v = t.apply(&v, false);
        }
        out.axpy(c, &v);
    }
    out
}

fn c1_oracle_equivalence() -> Outcome {
    // K = 2 and tau = 2^-6 keep the Krylov degree at most six
    let ctx = PrecisionCtx {
        norm_scale_k: 2.0,
        tail_tol: 1.0 / 64.0,
        ..PrecisionCtx::default()
    };
    let start = Instant::now();
    let (mut checked, mut skipped, mut seed) = (0, 0, 0u64);
    let (mut worst_a, mut worst_e) = (0.0f64, 0.0f64);
    let mut fails = 0;
    while checked < 50 {
        seed += 1;
        let mut r = rng(seed.wrapping_mul(7919).wrapping_add(1));
        let dim = 3 + (seed as usize % 6);
        let t = random_dense(dim, seed, &ctx).unwrap();
        let y = gaussian_vector(&mut r, dim, ctx.prec());
        let x0 = unit_vector(&mut r, dim, ctx.prec());
        let eps = 0.3 + 0.4 * ((seed * 37 % 100) as f64 / 100.0);
        let closed = match calibrate_scale(&t, &y, &x0, eps, &ctx) {
            Ok(s) => s,
            Err(LabError::Unattainable { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        assert!(closed.degree() <= 6);
        let oracle = match oracle_minimize(&t, &y, &x0, eps, &ctx, seed) {
            Ok(o) => o,
            Err(e) => return outcome(false, format!("oracle seed {seed}: {e}")),
        };
        let a = closed.ell_primed_input();
        let rel = Float::with_val(256, a.dist(&oracle.coeffs) / &a.two_norm).to_f64();
        let de = Float::with_val(256, &closed.eps - &oracle.eps).abs().to_f64();
        worst_a = worst_a.max(rel);
        worst_e = worst_e.max(de);
        if rel > 1e-6 || de > 1e-6 {
            fails += 1;
        }
        checked += 1;
    }
    let el = start.elapsed();
    outcome(
        fails == 0 && el < Duration::from_secs(120),
        format!("50 instances ({skipped} unattainable skipped), max rel coeff err {worst_a:.2e}, max eps err {worst_e:.2e}, {:.1}s", el.as_secs_f64()),
    )
}

fn c2_identity() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let mut worst = 0.0f64;
    let mut ok = true;
    for seed in 0..200u64 {
        let mut r = rng(seed + 3000);
        let dim = 3 + (seed as usize % 6);
        let t = if seed % 2 == 0 { random_dense(dim, seed, &ctx) } else { random_normal(dim, seed, &ctx) }.unwrap();
        let scale = Float::with_val(p, 0.5 + (seed % 7) as f64);
        let y = gaussian_vector(&mut r, dim, p).scale_real(&scale);
        let x0 = unit_vector(&mut r, dim, p);
        let s = solve_extremal(&t, &y, &x0, &ctx).unwrap();
        let mut sum = Float::new(p);
        for a in &s.a {
            sum += a.norm_sqr();
        }
        let gz = gram_apply(&s.basis, &s.z).inner(&s.z);
        let dev = Float::with_val(p, &sum - &gz.re).abs() + gz.im.clone().abs();
        let rel = Float::with_val(p, &dev / &s.eps_theta).to_f64();
        worst = worst.max(rel);
        ok &= s.eps_theta > 0 && rel <= 1e-20;
    }
    outcome(ok, format!("200 instances, max |sum|a_j|^2 - <Gz,z>| / eps_theta = {worst:.2e}"))
}

fn c3_stationarity() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let (mut worst_s, mut worst_c) = (0.0f64, 0.0f64);
    let mut ok = true;
    let mut n = 0;
    for seed in 0..12u64 {
        let dim = 4 + (seed as usize % 5);
        let t = random_dense(dim, seed + 300, &ctx).unwrap();
        let mut g = rng(seed + 301);
        let y = gaussian_vector(&mut g, dim, p);
        let x0 = unit_vector(&mut g, dim, p);
        let s = match calibrate_scale(&t, &y, &x0, 0.5, &ctx) {
            Ok(s) => s,
            Err(LabError::Unattainable { .. }) => continue,
            Err(e) => return outcome(false, e.to_string()),
        };
        n += 1;
        let m = s.a.len();
        let ell = s.ell_primed();
        let an2 = dot(&s.a, &s.a, p).re;
        let ynorm = s.y.norm();
        let mut consts = Vec::new();
        for _ in 0..20 {
            let raw: Vec<Cx> = (0..m).map(|_| gaussian_cx(&mut g, p)).collect();
            let coef = dot(&raw, &s.a, p).scale(&Float::with_val(p, an2.recip_ref()));
            let orth: Vec<Cx> = raw.iter().zip(&s.a).map(|(r, a)| r - &(&coef * a)).collect();
            let rn = dot(&orth, &orth, p).re.sqrt();
            let pairing = poly_apply(&t, &orth, &s.y).inner(&s.z).abs();
            let rel = Float::with_val(p, &pairing / (Float::with_val(p, &rn * &ynorm))).to_f64();
            worst_s = worst_s.max(rel);
            ok &= rel <= 1e-10;
            let lhs = poly_apply(&t, &raw, &s.y_prime).inner(&s.z);
            consts.push(lhs.div(&dot(&raw, &ell.coeffs, p)));
        }
        let c0 = consts[0].clone();
        for c in &consts[1..] {
            let rel = Float::with_val(p, (c - &c0).abs() / c0.abs()).to_f64();
            worst_c = worst_c.max(rel);
            ok &= rel <= 1e-8;
        }
    }
    outcome(
        ok && n >= 8,
        format!("{n} instances x 20 r, max |<r(T)y,z>|/(|r||y|) = {worst_s:.2e}, max C' spread {worst_c:.2e}"),
    )
}

fn c4_almost_invariance() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let mut ok = true;
    let (mut worst, mut tol_max, mut tol_min) = (0.0f64, 0.0f64, f64::INFINITY);
    for seed in 0..100u64 {
        let dim = 3 + (seed as usize % 6);
        let t = if seed % 3 == 2 { random_normal(dim, seed + 400, &ctx) } else { random_dense(dim, seed + 400, &ctx) }.unwrap();
        let mut g = rng(seed + 401);
        let y = gaussian_vector(&mut g, dim, p).scale_real(&Float::with_val(p, 2));
        let x0 = unit_vector(&mut g, dim, p);
        let s = solve_extremal(&t, &y, &x0, &ctx).unwrap();
        // l(T) y = G z, applied through the Gram sum
        let mut w = gram_apply(&s.basis, &s.z);
        let mut mx = Float::new(p);
        for j in 0..=dim + 2 {
            if j > 0 {
                w = t.apply(&w, false);
            }
            mx = mx.max(&w.inner(&s.z).abs());
        }
        let tol = almost_invariance_profile(&t, &s, 0, &ctx).tol_trunc;
        let bound = Float::with_val(p, &tol + 1u32) * &s.eps_theta;
        ok &= mx <= bound;
        worst = worst.max(Float::with_val(p, &mx / &s.eps_theta).to_f64());
        tol_max = tol_max.max(tol.to_f64());
        tol_min = tol_min.min(tol.to_f64());
    }
    outcome(ok, format!("100 instances, max_j |<T^j l(T)y,z>|/eps_theta = {worst:.6}, tol_trunc in [{tol_min:.2e}, {tol_max:.2e}]"))
}

fn c5_first_order() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for seed in 0..20u64 {
        let dim = 5 + (seed as usize % 4);
        let t = random_dense(dim, seed, &ctx).unwrap();
        let mut r = rng(seed + 9);
        let y = gaussian_vector(&mut r, dim, p);
        let x0 = unit_vector(&mut r, dim, p);
        let s = solve_extremal(&t, &y, &x0, &ctx).unwrap();
        let mut g = rng(seed + 500);
        let rr: Vec<Cx> = (0..s.a.len()).map(|_| gaussian_cx(&mut g, p)).collect();
        let pred = ChangeFunctionals::from_state(&s).predict(&rr);
        let mut h = 1e-3;
        let mut prev: Option<Vec<Float>> = None;
        for _ in 0..4 {
            let fd = match first_order_oracle(&t, &s, &rr, h, &ctx) {
                Ok(fd) => fd,
                Err(e) => return outcome(false, format!("seed {seed}: {e}")),
            };
            let mis = vec![
                Float::with_val(p, &fd.band - &pred.band).abs(),
                Float::with_val(p, &fd.eps_theta - &pred.eps_theta).abs(),
                Float::with_val(p, &fd.a0 - &pred.a0).abs(),
            ];
            if let Some(old) = &prev {
                for (o, m) in old.iter().zip(&mis) {
                    let q = Float::with_val(p, o / m).to_f64();
                    lo = lo.min(q);
                    hi = hi.max(q);
                }
            }
            prev = Some(mis);
            h /= 2.0;
        }
    }
    outcome((3.5..=4.5).contains(&lo) && (3.5..=4.5).contains(&hi), format!("20 instances x 3 halvings, ratios in [{lo:.4}, {hi:.4}]"))
}

fn c6_dilation() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let delta = Float::with_val(p, 1e-6);
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let dim = 4 + (seed as usize % 4);
        let t = random_dense(dim, seed + 20, &ctx).unwrap();
        let mut r = rng(seed + 29);
        let y = gaussian_vector(&mut r, dim, p);
        let x0 = unit_vector(&mut r, dim, p);
        let s = solve_extremal(&t, &y, &x0, &ctx).unwrap();
        let grown = y.scale_real(&Float::with_val(p, &delta + 1u32));
        let s2 = solve_extremal(&t, &grown, &x0, &ctx).unwrap();
        let actual = s2.z.sub(&s.z);
        // -2 delta ((I+G)^-1 - (I+G)^-2) x0
        let second = s.resolve(&s.z).unwrap();
        let predicted = s.z.sub(&second).scale_real(&Float::with_val(p, &delta * -2i32));
        let rel = Float::with_val(p, actual.dist(&predicted) / predicted.norm()).to_f64();
        worst = worst.max(rel);
    }
    outcome(worst <= 1e-4, format!("10 instances at delta = 1e-6, max relative error {worst:.2e}"))
}

fn mc_config(dim: usize, eps_theta_0: f64, max_iters: usize, prec: u32) -> McConfig {
    let mut cfg = McConfig::new(HVector::basis(dim, 0, prec), HVector::basis(dim, 1, prec));
    cfg.lemma = LemmaOptions {
        eps_start: 0.6,
        factor: 1.0,
        eps_theta_0: Some(eps_theta_0),
        ..LemmaOptions::default()
    };
    cfg.dominance = DominanceOptions {
        threshold: 0.25,
        ..DominanceOptions::default()
    };
    cfg.case_cap = 25;
    cfg.max_iters = max_iters;
    cfg
}

fn c7_dynamics() -> Outcome {
    let ctx = PrecisionCtx::default();
    let t = harmonic_shift(32, &ctx).unwrap();
    let cfg = mc_config(32, 0.4, 200, ctx.prec());
    let start = Instant::now();
    let tr = run_mc(&t, &cfg, &ctx);
    let el = start.elapsed();
    let Some(et0) = tr.eps_theta_start.clone() else {
        return outcome(false, format!("no step loop: {}", tr.status.name()));
    };
    let steps = tr.step_rows().count();
    let reduction = tr.reduction().unwrap_or(1.0);
    let (mut bmin, mut bmax) = (f64::INFINITY, 0.0f64);
    for r in tr.step_rows() {
        bmin = bmin.min(r.band_value.to_f64());
        bmax = bmax.max(r.band_value.to_f64());
    }
    let drift = tr.band_variation.to_f64();
    let drift_bound = 10.0 * et0.to_f64();
    let pass = steps > 0
        && reduction <= 0.1
        && bmin > 0.3
        && bmax < 0.7
        && drift <= drift_bound
        && el < Duration::from_secs(600);
    outcome(
        pass,
        format!(
            "{steps} steps ({}), eps_theta {} -> x{reduction:.3e}, band in [{bmin:.4}, {bmax:.4}], drift {drift:.3e} <= {drift_bound:.3e}, {:.1}s",
            tr.status.name(),
            sci(&et0),
            el.as_secs_f64()
        ),
    )
}

fn c8_case_two() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let n = 16;
    let t = harmonic_shift(n, &ctx).unwrap();
    let sins = [0.2, 0.25, 0.3, 0.32, 0.35, 0.38, 0.4, 0.3, 0.35, 0.4];
    let margins = [0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.02, 0.02, 0.02];
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut notes = Vec::new();
    for (sn, m) in sins.iter().zip(margins) {
        let cs = (1.0f64 - sn * sn).sqrt();
        let mut x0 = HVector::basis(n, 0, p).scale_real(&Float::with_val(p, cs));
        x0.axpy_real(&Float::with_val(p, *sn), &HVector::basis(n, n - 1, p));
        let x0 = x0.normalized().unwrap();
        let s = match calibrate_scale(&t, &HVector::basis(n, 0, p), &x0, sn + m, &ctx) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("sin {sn}: {e}")),
        };
        match case_dichotomy(&t, &s, &ctx) {
            Ok(CaseOutcome::CaseII { delta, state, .. }) => {
                let ratio = Float::with_val(p, &state.eps_theta / &s.eps_theta).to_f64();
                let d_ok = delta == Float::with_val(p, &s.eps_theta / 10u32);
                worst = worst.max(ratio);
                ok &= d_ok && ratio <= 1.0 - 1.0 / 20.0 + 1e-3;
            }
            Ok(other) => {
                ok = false;
                notes.push(format!("sin {sn}: not Case II ({})", if matches!(other, CaseOutcome::CaseI { .. }) { "Case I" } else { "?" }));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("sin {sn}: {e}"));
            }
        }
    }
    outcome(ok, format!("10 instances, max eps_theta'/eps_theta = {worst:.5} (bound 0.951) {}", notes.join("; ")))
}

fn c9_dominance() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let opts = DominanceOptions {
        threshold: 0.05,
        ..DominanceOptions::default()
    };
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for seed in 0..20u64 {
        let t = random_dense(6, seed, &ctx).unwrap();
        let mut r = rng(seed + 1000);
        let y = gaussian_vector(&mut r, 6, p);
        let x0 = unit_vector(&mut r, 6, p);
        let s = match calibrate_scale(&t, &y, &x0, 0.97, &ctx) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        if s.eps_theta > 0.05 {
            return outcome(false, format!("seed {seed}: eps_theta {} above threshold", sci(&s.eps_theta)));
        }
        let out = match dominance_renormalize(&t, &s, &opts, &ctx) {
            Ok((out, _)) => out,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        let head = out.a[0].norm_sqr();
        let mut tail = Float::new(p);
        for a in &out.a[1..] {
            tail += a.norm_sqr();
        }
        let ratio = if tail.is_zero() { f64::INFINITY } else { Float::with_val(p, &head / &tail).to_f64() };
        worst = worst.min(ratio);
        ok &= head >= Float::with_val(p, &tail * 100u32);
    }
    outcome(ok, format!("20 instances, min |a_0|^2 / sum_(j>=1) |a_j|^2 = {worst:.3e}"))
}

fn c10_h_monotone() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let grid = DominanceOptions::default().grid();
    let mut ok = grid.len() == 16;
    let mut min_step = f64::INFINITY;
    for seed in 0..5u64 {
        let t = random_dense(6, seed + 40, &ctx).unwrap();
        let y = gaussian_vector(&mut rng(seed + 77), 6, p);
        let h = match h_curve(&t, &y, ctx.krylov_degree(6), &grid) {
            Ok(h) => h,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        ok &= h[0].0 == 0.0 && h[0].1.is_zero();
        let ratios: Vec<Float> = h[1..].iter().map(|(d, v)| Float::with_val(p, v / *d)).collect();
        for w in ratios.windows(2) {
            let slack = Float::with_val(p, &w[0] * 1e-60);
            ok &= Float::with_val(p, &w[1] + &slack) >= w[0];
            min_step = min_step.min((Float::with_val(p, &w[1] - &w[0]) / &w[0]).to_f64());
        }
    }
    outcome(ok, format!("5 instances on a 16-point grid, h(0) = 0, min relative step of h(d)/d = {min_step:.2e}"))
}

fn c11_shift_phenomenon() -> Outcome {
    let ctx = PrecisionCtx {
        tail_tol: 1e-60,
        ..PrecisionCtx::with_bits(1024)
    };
    let p = ctx.prec();
    let w: Vec<Cx> = (0..10).map(|n| Cx::from_real(Float::with_val(p, 1.0 / 1e4) >> n as u32)).collect();
    let res = match shift_phenomenon(&w, 1..=10, &ShiftOptions::default(), &ctx) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let vals: Vec<Float> = match res.iter().map(|(_, v)| v.clone()).collect::<Option<Vec<_>>>() {
        Some(v) => v,
        None => return outcome(false, "some n unattainable".into()),
    };
    let mono = vals.windows(2).all(|w| w[1] >= w[0]);
    let growth = Float::with_val(p, &vals[9] / &vals[0]);
    outcome(
        mono && growth >= 10,
        format!("n = 1..10 nondecreasing: {mono}, ||l||_2 from {} to {}, growth {}", sci(&vals[0]), sci(&vals[9]), sci(&growth)),
    )
}

fn c12_spectral() -> Outcome {
    let ctx = PrecisionCtx::default();
    let (mut checked, mut full_rank) = (0, 0);
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut notes = Vec::new();
    for seed in 0..10u64 {
        let t = random_normal(8, seed, &ctx).unwrap();
        let cfg = mc_config(8, 0.5, 30, ctx.prec());
        let tr = run_mc(&t, &cfg, &ctx);
        let Some(cand) = tr.candidate() else {
            ok = false;
            notes.push(format!("seed {seed}: {}", tr.status.name()));
            continue;
        };
        let rep = match invariance_at_achieved_rank(&t, &cand, &cfg.x0(), &ctx) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        if rep.krylov_rank == 8 {
            full_rank += 1;
        }
        if rep.rho <= 1e-6 {
            checked += 1;
            let sr = spectral_reference(&t, &ctx).unwrap();
            match sr.nearest_angle(&rep.basis) {
                Some(a) => {
                    worst = worst.max(a);
                    ok &= a <= 1e-3;
                }
                None => ok = false,
            }
        }
    }
    outcome(
        ok,
        format!("10 normal 8x8, {checked} with rho <= 1e-6 ({full_rank} at full rank), max angle {worst:.2e} {}", notes.join("; ")),
    )
}

fn c13_lemma_bracket() -> Outcome {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, t) in [("harmonic", harmonic_shift(32, &ctx).unwrap()), ("geometric", geometric_shift(32, &ctx).unwrap())] {
        let y0 = HVector::basis(32, 0, p).scale_real(&(Float::with_val(p, 3).sqrt() / 2u32));
        let n = match calibrate_scale(&t, &y0, &band_x0(32, p), 0.5, &ctx) {
            Ok(s) => s.ell_primed().two_norm.to_f64(),
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        ok &= n > 0.8 && n <= 1.0;
        parts.push(format!("{name} {n:.6}"));
    }
    outcome(ok, format!("||l'_0.5||_2: {}", parts.join(", ")))
}

fn c14_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    let configs = [
        (Mode::Mc, format!("out = {out:?}\nseed = 11\n[operator]\nkind = \"harmonic-shift\"\ndim = 10\n[mc]\neps_start = 0.6\nfactor = 1.0\neps_theta_0 = 0.4\ndominance_threshold = 0.25\nmax_iters = 10\n")),
        (Mode::Solve, format!("out = {out:?}\nseed = 12\n[operator]\nkind = \"random-dense\"\ndim = 6\n[vectors]\ny = \"random\"\nx0 = \"unit\"\n[solve]\neps = 0.5\n")),
        (Mode::Classify, format!("out = {out:?}\nseed = 13\n[operator]\nkind = \"random-normal\"\ndim = 5\n[classify]\nprobes = 16\n")),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (mode, text) in configs {
        let mut cfg = parse_config(&text, &[]).unwrap();
        cfg.mode = Some(mode);
        let a = run_experiment(&cfg, tmp.path(), 1).unwrap();
        let b = run_experiment(&cfg, tmp.path(), 1).unwrap();
        let (ta, tb) = (fs::read(a.dir.join("trace.csv")).unwrap(), fs::read(b.dir.join("trace.csv")).unwrap());
        ok &= a.dir != b.dir && ta == tb && !ta.is_empty();
        parts.push(format!("{} {} bytes", mode.name(), ta.len()));
    }
    outcome(ok, format!("repeated runs byte-identical: {}", parts.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("oracle equivalence", c1_oracle_equivalence),
        ("identity sum |a_j|^2 = <Gz,z>", c2_identity),
        ("minimality stationarity", c3_stationarity),
        ("almost-invariance bound", c4_almost_invariance),
        ("first-order calculus", c5_first_order),
        ("dilation formula", c6_dilation),
        ("construction dynamics", c7_dynamics),
        ("Case II contraction", c8_case_two),
        ("dominance", c9_dominance),
        ("h-monotonicity", c10_h_monotone),
        ("shift phenomenon", c11_shift_phenomenon),
        ("spectral cross-check", c12_spectral),
        ("threshold scan bracket", c13_lemma_bracket),
        ("determinism", c14_determinism),
    ];
    let results: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                let f = *f;
                std::thread::Builder::new()
                    .stack_size(64 << 20)
                    .spawn_scoped(s, f)
                    .unwrap()
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| outcome(false, "panicked".into())))
            .collect()
    });
    let mut failed = 0;
    for (i, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        println!("[{}] {:>2}. {name}: {}", if r.pass { "PASS" } else { "FAIL" }, i + 1, r.detail);
        if !r.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
