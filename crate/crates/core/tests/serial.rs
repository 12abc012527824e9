use extremal_core::generators::{gaussian_vector, harmonic_shift, random_dense, rng, unit_vector};
use extremal_core::linalg::HVector;
use extremal_core::operator::OperatorSpec;
use extremal_core::serial::{OperatorDoc, StateDoc, VectorDoc};
use extremal_core::solver::calibrate_scale;
use extremal_core::{Cx, LabError, PrecisionCtx};

#[test]
fn operator_round_trip() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let diag = OperatorSpec::diagonal(vec![Cx::from_f64(p, 0.25, -0.5), Cx::from_f64(p, 1.0 / 3.0, 0.0)]).unwrap();
    for t in [random_dense(4, 2, &ctx).unwrap(), harmonic_shift(5, &ctx).unwrap(), diag] {
        let doc = OperatorDoc::from_spec(&t, &ctx);
        let text = doc.to_toml();
        let back = OperatorDoc::from_toml(&text).unwrap();
        assert_eq!(back, doc);
        let t2 = back.to_spec().unwrap();
        assert_eq!(t2.kind_name(), t.kind_name());
        assert_eq!(t2.to_dense().data(), t.to_dense().data());
        assert_eq!(t2.norm_scale, t.norm_scale);
    }
}

#[test]
fn operator_doc_rejects_unknown_and_mismatched() {
    let ctx = PrecisionCtx::default();
    let doc = OperatorDoc::from_spec(&harmonic_shift(3, &ctx).unwrap(), &ctx);
    let text = format!("{}extra = 1\n", doc.to_toml());
    assert!(matches!(OperatorDoc::from_toml(&text), Err(LabError::Parse(_))));
    let mut bad = doc.clone();
    bad.dim = 5;
    assert!(matches!(bad.to_spec(), Err(LabError::DimensionMismatch { .. })));
    let mut bad = doc;
    bad.kind = "toeplitz".into();
    assert!(matches!(bad.to_spec(), Err(LabError::Parse(_))));
}

#[test]
fn vector_round_trip_is_exact() {
    let v = gaussian_vector(&mut rng(3), 6, 256);
    let back = VectorDoc::from_vector(&v).to_vector(256).unwrap();
    assert_eq!(back, v);
}

#[test]
fn state_round_trip() {
    let ctx = PrecisionCtx::default();
    let t = random_dense(5, 1, &ctx).unwrap();
    let mut g = rng(1);
    let y = gaussian_vector(&mut g, 5, ctx.prec());
    let x0 = unit_vector(&mut g, 5, ctx.prec());
    let s = calibrate_scale(&t, &y, &x0, 0.5, &ctx).unwrap();
    let doc = StateDoc::from_state(&s);
    let back = StateDoc::from_toml(&doc.to_toml()).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.z.to_vector(ctx.prec()).unwrap(), s.z);
    assert_eq!(back.degree, s.degree());
}

#[test]
fn rank_one_state_fields() {
    let ctx = PrecisionCtx::default();
    let p = ctx.prec();
    let t = OperatorSpec::dense(extremal_core::CMatrix::zeros(1, 1, p)).unwrap();
    let e = HVector::basis(1, 0, p);
    let s = calibrate_scale(&t, &e, &e, 0.5, &ctx).unwrap();
    let doc = StateDoc::from_state(&s);
    assert_eq!(doc.eps.parse::<f64>().unwrap(), 0.5);
    assert_eq!(doc.eps_theta.parse::<f64>().unwrap(), 0.25);
}
