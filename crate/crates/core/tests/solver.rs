use extremal_core::generators::{gaussian_vector, random_dense, rng, unit_vector};
use extremal_core::linalg::HVector;
use extremal_core::operator::{gram_apply, OperatorSpec};
use extremal_core::solver::{
    almost_invariance_profile, calibrate_scale, epsilon_scan, oracle_minimize,
    proportionality_constant, residual_at_scale, solve_extremal, stationarity_check,
};
use extremal_core::{Cx, LabError, PrecisionCtx};
use proptest::prelude::*;
use rug::Float;

fn small_ctx() -> PrecisionCtx {
    PrecisionCtx {
        norm_scale_k: 2.0,
        tail_tol: 1.0 / 64.0,
        ..PrecisionCtx::default()
    }
}

struct Instance {
    t: OperatorSpec,
    y: HVector,
    x0: HVector,
    eps: f64,
}

fn instance(seed: u64, ctx: &PrecisionCtx) -> Instance {
    let mut r = rng(seed.wrapping_mul(7919).wrapping_add(1));
    let dim = 3 + (seed as usize % 6);
    let t = random_dense(dim, seed, ctx).unwrap();
    let y = gaussian_vector(&mut r, dim, ctx.prec());
    let x0 = unit_vector(&mut r, dim, ctx.prec());
    let eps = 0.3 + 0.4 * ((seed * 37 % 100) as f64 / 100.0);
    Instance { t, y, x0, eps }
}

#[test]
fn oracle_matches_closed_form() {
    let ctx = small_ctx();
    let mut checked = 0;
    let mut seed = 0;
    while checked < 12 {
        seed += 1;
        let inst = instance(seed, &ctx);
        let closed = match calibrate_scale(&inst.t, &inst.y, &inst.x0, inst.eps, &ctx) {
            Ok(s) => s,
            Err(LabError::Unattainable { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let oracle = oracle_minimize(&inst.t, &inst.y, &inst.x0, inst.eps, &ctx, seed).unwrap();
        let a = closed.ell_primed_input();
        let diff = a.dist(&oracle.coeffs);
        assert!(diff <= Float::with_val(256, &a.two_norm * 1e-6), "seed {seed}: {diff}");
        let de = Float::with_val(256, &closed.eps - &oracle.eps).abs();
        assert!(de <= 1e-6);
        checked += 1;
    }
}

#[test]
fn identity_sum_equals_gram_pairing() {
    let ctx = PrecisionCtx::default();
    for seed in 0..20u64 {
        let mut r = rng(seed);
        let dim = 4 + (seed as usize % 5);
        let t = random_dense(dim, seed + 100, &ctx).unwrap();
        let y = gaussian_vector(&mut r, dim, 256).scale_real(&Float::with_val(256, 3));
        let x0 = unit_vector(&mut r, dim, 256);
        let s = solve_extremal(&t, &y, &x0, &ctx).unwrap();
        let gz = gram_apply(&s.basis, &s.z);
        let pairing = gz.inner(&s.z);
        let dev = Float::with_val(256, &pairing.re - &s.eps_theta).abs();
        assert!(dev <= Float::with_val(256, &s.eps_theta * 1e-20));
        assert!(pairing.im.clone().abs() <= Float::with_val(256, &s.eps_theta * 1e-20));
        // eps_theta = <x0 - z, z>
        let alt = s.candidate().inner(&s.z).re;
        assert!(Float::with_val(256, &alt - &s.eps_theta).abs() <= Float::with_val(256, &s.eps_theta * 1e-20));
        assert!(s.a[0].im.is_zero() && !s.a[0].re.is_sign_negative());
    }
}

#[test]
fn stationarity_and_proportionality() {
    let ctx = PrecisionCtx::default();
    let t = random_dense(6, 5, &ctx).unwrap();
    let mut r = rng(11);
    let y = gaussian_vector(&mut r, 6, 256);
    let x0 = unit_vector(&mut r, 6, 256);
    let s = calibrate_scale(&t, &y, &x0, 0.5, &ctx).unwrap();
    let a = &s.a;
    let m = a.len();
    let an2 = s.eps_theta.clone();
    let ynorm = s.y.norm();
    let mut consts = vec![];
    for _ in 0..20 {
        let raw: Vec<Cx> = (0..m).map(|_| extremal_core::generators::gaussian_cx(&mut r, 256)).collect();
        consts.push(proportionality_constant(&s, &raw).unwrap());
        let mut dot = Cx::zero(256);
        for (ri, ai) in raw.iter().zip(a) {
            dot.add_mul_conj(ri, ai);
        }
        let coef = dot.scale(&(Float::with_val(256, 1) / &an2));
        let orth: Vec<Cx> = raw.iter().zip(a).map(|(ri, ai)| ri - &(&coef * ai)).collect();
        let rn = orth.iter().fold(Float::new(256), |acc, c| acc + c.norm_sqr()).sqrt();
        let p = stationarity_check(&s, &orth).unwrap();
        assert!(p.abs() <= Float::with_val(256, &rn * &ynorm) * 1e-10);
    }
    let inv_c = Float::with_val(256, 1) / &s.c;
    for c in &consts {
        let rel = Float::with_val(256, &c.re - &inv_c).abs() / &inv_c;
        assert!(rel <= 1e-8, "{rel}");
        assert!(c.im.clone().abs() <= Float::with_val(256, &inv_c * 1e-8));
    }
    let itself = stationarity_check(&s, a).unwrap();
    assert!(Float::with_val(256, &itself.re - &s.eps_theta).abs() < 1e-60);
}

#[test]
fn almost_invariance_bound_holds() {
    let ctx = PrecisionCtx::default();
    for seed in 0..10u64 {
        let mut r = rng(seed + 50);
        let dim = 5;
        let t = random_dense(dim, seed + 200, &ctx).unwrap();
        let y = gaussian_vector(&mut r, dim, 256);
        let x0 = unit_vector(&mut r, dim, 256);
        let s = calibrate_scale(&t, &y, &x0, 0.45, &ctx).unwrap();
        let prof = almost_invariance_profile(&t, &s, 8, &ctx);
        let d0 = Float::with_val(256, &prof.p[0] - &s.eps_theta).abs();
        assert!(d0 <= Float::with_val(256, &s.eps_theta * 1e-40));
        assert!(prof.within_bound(), "seed {seed}");
    }
}

#[test]
fn calibration_hits_target_and_rejects_unreachable() {
    let ctx = PrecisionCtx::default();
    let t = random_dense(5, 3, &ctx).unwrap();
    let mut r = rng(4);
    let y = gaussian_vector(&mut r, 5, 256);
    let x0 = unit_vector(&mut r, 5, 256);
    let s = calibrate_scale(&t, &y, &x0, 0.4, &ctx).unwrap();
    assert!(Float::with_val(256, &s.eps - 0.4f64).abs() <= 1e-40);
    let full = calibrate_scale(&t, &y, &x0, 1.0, &ctx).unwrap();
    assert!(full.c.is_zero());
    // datum orthogonal to everything reachable: diagonal operator, y = e0, x0 = e1
    let diag = extremal_core::operator::normalize_operator(
        &OperatorSpec::diagonal(vec![Cx::one(256), Cx::from_f64(256, 0.5, 0.0)]).unwrap(),
        &ctx,
    )
    .unwrap();
    let e0 = HVector::basis(2, 0, 256);
    let e1 = HVector::basis(2, 1, 256);
    assert!(matches!(
        calibrate_scale(&diag, &e0, &e1, 0.5, &ctx),
        Err(LabError::Unattainable { .. })
    ));
}

#[test]
fn rank_one_scan_closed_form() {
    // y' = s x0 gives eps_theta(eps) = eps (1 - eps)
    let ctx = PrecisionCtx::default();
    let t = random_dense(4, 8, &ctx).unwrap();
    let mut r = rng(2);
    let x0 = unit_vector(&mut r, 4, 256);
    let grid = [0.6, 0.55, 0.5, 0.45];
    let scan = epsilon_scan(&t, &x0, &x0, &grid, &ctx).unwrap();
    for p in &scan.points {
        let et = p.state.eps_theta.to_f64();
        // T^j x0 with j >= 1 is K^-j small but not zero, so the identity holds to O(1/K)
        assert!((et - p.eps * (1.0 - p.eps)).abs() < 1e-3, "{et}");
    }
    assert!(scan.lipschitz.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn residual_strictly_decreasing_in_scale(seed in 0u64..1000, c1 in 0.01f64..10.0, f in 1.01f64..5.0) {
        let ctx = PrecisionCtx::default();
        let t = random_dense(4, seed, &ctx).unwrap();
        let mut r = rng(seed ^ 0xabc);
        let y = gaussian_vector(&mut r, 4, 256);
        let x0 = unit_vector(&mut r, 4, 256);
        let lo = residual_at_scale(&t, &y, &x0, &Float::with_val(256, c1), &ctx).unwrap();
        let hi = residual_at_scale(&t, &y, &x0, &Float::with_val(256, c1 * f), &ctx).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn a0_real_nonnegative_and_eps_theta_positive(seed in 0u64..1000) {
        let ctx = PrecisionCtx::default();
        let t = random_dense(5, seed, &ctx).unwrap();
        let mut r = rng(seed + 17);
        let y = gaussian_vector(&mut r, 5, 256);
        let x0 = unit_vector(&mut r, 5, 256);
        let s = solve_extremal(&t, &y, &x0, &ctx).unwrap();
        prop_assert!(s.a[0].im.is_zero());
        prop_assert!(!s.a[0].re.is_sign_negative());
        prop_assert!(s.eps_theta > 0);
        prop_assert!(s.eps < 1);
    }
}
