use extremal_core::generators::{harmonic_shift, rng, unit_vector};
use extremal_core::linalg::HVector;
use extremal_core::operator::OperatorSpec;
use extremal_core::probes::*;
use extremal_core::solver::calibrate_scale;
use extremal_core::{Cx, LabError, PrecisionCtx};
use rug::Float;

fn shift_x0(dim: usize, prec: u32) -> HVector {
    let mut x = HVector::basis(dim, 0, prec).scale_real(&(Float::with_val(prec, 3).sqrt() / 2u32));
    x.axpy_real(&Float::with_val(prec, 0.5), &HVector::basis(dim, 1, prec));
    x
}

#[test]
fn default_probes_are_admissible_and_seeded() {
    let ctx = PrecisionCtx::default();
    let u0 = HVector::basis(5, 0, ctx.prec());
    let a = default_probes(&u0, 64, 7, &ctx);
    // e_0 is the only admissible basis direction
    assert_eq!(a.len(), 65);
    for y in &a {
        assert!(is_admissible(y, &u0, &ctx));
        let c = Float::with_val(ctx.prec(), &y.inner(&u0).re / &y.norm());
        assert!(c >= PROBE_FLOOR);
    }
    assert_eq!(a, default_probes(&u0, 64, 7, &ctx));
    assert_ne!(a, default_probes(&u0, 64, 8, &ctx));
}

#[test]
fn diagonal_is_type_one() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let lams = [0.5, 0.6, 0.75, 0.9];
    let t = OperatorSpec::diagonal(lams.iter().map(|&l| Cx::from_f64(p, l, 0.0)).collect()).unwrap();
    let u0 = HVector::basis(4, 0, p);
    let probes = default_probes(&u0, 16, 1, &ctx);
    let tp = classify_type(&t, &u0, &probes, 10, None, &ctx).unwrap();
    assert_eq!(tp.verdict, TypeVerdict::Type1Evidence);
    for (n, d) in &tp.delta_table {
        assert!(d.to_f64() >= 0.5f64.powi(*n as i32) * (1.0 - 1e-12), "n={n}");
    }
}

#[test]
fn nilpotent_shift_is_type_two_at_dimension() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = OperatorSpec::weighted_shift(vec![Cx::one(p); 3]).unwrap();
    let u0 = HVector::basis(4, 0, p);
    let probes: Vec<HVector> = default_probes(&u0, 12, 3, &ctx).into_iter().take(12).collect();
    let tp = classify_type(&t, &u0, &probes, 8, None, &ctx).unwrap();
    match tp.verdict {
        TypeVerdict::Type2Evidence { m, witnesses } => {
            assert_eq!(m, 4);
            assert_eq!(witnesses, (0..12).collect::<Vec<_>>());
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn classify_rejects_bad_probe_sets() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(4, &ctx).unwrap();
    let u0 = HVector::basis(4, 0, p);
    assert_eq!(classify_type(&t, &u0, &[], 4, None, &ctx).unwrap_err(), LabError::EmptyProbeSet);
    let bad = [HVector::basis(4, 2, p)];
    assert!(matches!(classify_type(&t, &u0, &bad, 4, None, &ctx), Err(LabError::Precondition(_))));
}

#[test]
fn verdict_stable_under_permutation() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(6, &ctx).unwrap();
    let u0 = HVector::basis(6, 0, p);
    let probes = default_probes(&u0, 20, 5, &ctx);
    let mut rev = probes.clone();
    rev.reverse();
    let a = classify_type(&t, &u0, &probes, 8, Some(1e-20), &ctx).unwrap();
    let b = classify_type(&t, &u0, &rev, 8, Some(1e-20), &ctx).unwrap();
    assert_eq!(a.delta_table, b.delta_table);
    let m = |v: &TypeVerdict| match v {
        TypeVerdict::Type1Evidence => None,
        TypeVerdict::Type2Evidence { m, witnesses } => Some((*m, witnesses.len())),
    };
    assert_eq!(m(&a.verdict), m(&b.verdict));
}

#[test]
fn select_u1_prefers_adjoint_kernel() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(5, &ctx).unwrap();
    let cands: Vec<HVector> = (1..5).rev().map(|k| HVector::basis(5, k, p)).chain([HVector::basis(5, 0, p)]).collect();
    let (i, n) = select_u1(&t, &cands).unwrap();
    assert_eq!(i, 4);
    assert!(n.is_zero());
    assert_eq!(select_u1(&t, &[]).unwrap_err(), LabError::EmptyProbeSet);
}

fn shift_family(dim: usize, prec: u32) -> Vec<HVector> {
    (1..dim).map(|k| HVector::basis(dim, k, prec)).collect()
}

#[test]
fn feasibility_at_zero_is_plain_solve() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(6, &ctx).unwrap();
    let x0 = shift_x0(6, p);
    let y0 = HVector::basis(6, 0, p);
    let prof = feasibility_profile(&t, &x0, &y0, &shift_family(6, p), &[0.0], &FeasibilityOptions::default(), &ctx).unwrap();
    let direct = calibrate_scale(&t, &y0, &x0, 0.3, &ctx).unwrap().ell_primed_input().two_norm;
    let m0 = prof.m_of_l[0].clone().unwrap();
    assert!(Float::with_val(p, &m0 - &direct).abs() <= Float::with_val(p, &direct * 1e-30));
}

#[test]
fn feasibility_profile_on_shift_family() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(6, &ctx).unwrap();
    let x0 = shift_x0(6, p);
    let y0 = HVector::basis(6, 0, p);
    let grid = [0.0, 0.05, 0.1, 0.2, 0.4];
    let prof = feasibility_profile(&t, &x0, &y0, &shift_family(6, p), &grid, &FeasibilityOptions::default(), &ctx).unwrap();
    assert!(prof.monotone, "{:?}", prof.m_of_l.iter().map(|m| m.as_ref().map(|v| v.to_f64())).collect::<Vec<_>>());
    assert!(prof.perturbation_ratio <= 2.0, "{}", prof.perturbation_ratio);
    assert_eq!(prof.per_n.len(), grid.len());
}

#[test]
fn feasibility_needs_family() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(4, &ctx).unwrap();
    let e = HVector::basis(4, 0, p);
    let err = feasibility_profile(&t, &e, &e, &[], &[0.0], &FeasibilityOptions::default(), &ctx).unwrap_err();
    assert_eq!(err, LabError::EmptyProbeSet);
}

fn geometric_weights(n: usize, k: f64, prec: u32) -> Vec<Cx> {
    (0..n).map(|i| Cx::from_real(Float::with_val(prec, 1.0 / k) >> i as u32)).collect()
}

#[test]
fn shift_phenomenon_at_zero() {
    let ctx = PrecisionCtx::default();
    let w = geometric_weights(4, 1e4, ctx.prec());
    let res = shift_phenomenon(&w, 0..=0, &ShiftOptions::default(), &ctx).unwrap();
    let v = res[0].1.as_ref().unwrap().to_f64();
    assert!(v <= 1.0 / 11.0);
    // ||(1 - 11 l) e0|| = 0.7 at the minimum
    assert!((v - 0.3 / 11.0).abs() < 1e-15, "{v}");
}

#[test]
fn shift_phenomenon_phase_invariant() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let w = geometric_weights(4, 1e4, p);
    let ph = Cx::cis(&Float::with_val(p, 0.7));
    let wr: Vec<Cx> = w.iter().map(|c| c * &ph).collect();
    let a = shift_phenomenon(&w, 1..=3, &ShiftOptions::default(), &ctx).unwrap();
    let b = shift_phenomenon(&wr, 1..=3, &ShiftOptions::default(), &ctx).unwrap();
    for ((n, x), (_, y)) in a.iter().zip(&b) {
        let (x, y) = (x.clone().unwrap(), y.clone().unwrap());
        assert!(Float::with_val(p, &x - &y).abs() <= Float::with_val(p, &x * 1e-30), "n={n}");
    }
    for w in a.windows(2) {
        assert!(w[1].1.as_ref().unwrap() >= w[0].1.as_ref().unwrap());
    }
}

#[test]
fn shift_phenomenon_rejects_unsummable() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let w = vec![Cx::new(Float::with_val(p, rug::float::Special::Infinity), Float::new(p))];
    assert!(shift_phenomenon(&w, 1..=1, &ShiftOptions::default(), &ctx).is_err());
}

#[test]
fn extract_constant_sequence() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(5, &ctx).unwrap();
    let v = unit_vector(&mut rng(4), 5, p);
    let seq = vec![v.clone(); 9];
    let (y, res) = type2_extract(&t, &seq, &HVector::basis(5, 0, p), 1, 3).unwrap();
    assert!(y.dist(&v) < 1e-70);
    assert_eq!(res.len(), 3);
    assert!(type2_extract(&t, &[], &v, 1, 3).is_err());
}

/// `v` on `e2..` never pairs with `e2` after a shift; the `e0` noise cancels
/// over an even tail.
#[test]
fn extract_planted_sequence() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(6, &ctx).unwrap();
    let mut v = HVector::basis(6, 2, p);
    v.axpy_real(&Float::with_val(p, 0.5), &HVector::basis(6, 4, p));
    let seq: Vec<HVector> = (0..64)
        .map(|k| {
            let mut y = v.clone();
            let s = if k % 2 == 0 { 1e-3 } else { -1e-3 };
            y.axpy_real(&Float::with_val(p, s), &HVector::basis(6, 0, p));
            y
        })
        .collect();
    let (y, res) = type2_extract(&t, &seq, &HVector::basis(6, 2, p), 1, 5).unwrap();
    assert!(y.dist(&v) < 1e-60);
    for r in res {
        assert!(r < 1e-8);
    }
}

#[test]
fn paired_autocorrelation_vanishes_on_planted_family() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = harmonic_shift(5, &ctx).unwrap();
    let y = HVector::basis(5, 0, p);
    let alpha = Cx::from_f64(p, 0.5, 0.0);
    let mut prev = f64::INFINITY;
    for n in [1u32, 10, 100, 1000] {
        let mut s = HVector::basis(5, 0, p);
        s.axpy_real(&Float::with_val(p, 1), &HVector::basis(5, 1, p));
        let s = s.scale_real(&(Float::with_val(p, 1) / n));
        let v = paired_autocorrelation(&t, &alpha, &y, &s, 1).abs().to_f64();
        assert!(v < prev);
        prev = v;
    }
    assert!(prev < 1e-8);
}
