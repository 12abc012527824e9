//! Seeded instance generators. Every draw goes through `ChaCha8Rng` and
//! `f64` Gaussians, so instances are reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rug::Float;

use crate::error::LabResult;
use crate::linalg::{orthonormalize, CMatrix, HVector};
use crate::operator::{normalize_operator, OperatorSpec};
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_cx(rng: &mut ChaCha8Rng, prec: u32) -> Cx {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cx::from_f64(prec, re, im)
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize, prec: u32) -> HVector {
    HVector::from_coords((0..dim).map(|_| gaussian_cx(rng, prec)).collect())
}

pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize, prec: u32) -> HVector {
    loop {
        let v = gaussian_vector(rng, dim, prec);
        if let Ok(u) = v.normalized() {
            return u;
        }
    }
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, dim: usize, prec: u32) -> CMatrix {
    let data = (0..dim * dim).map(|_| gaussian_cx(rng, prec)).collect();
    CMatrix::from_rows(dim, dim, data)
}

/// Random unitary from Gram-Schmidt on Gaussian columns.
pub fn unitary(rng: &mut ChaCha8Rng, dim: usize, prec: u32) -> CMatrix {
    loop {
        let cols: Vec<HVector> = (0..dim).map(|_| gaussian_vector(rng, dim, prec)).collect();
        let tol = Float::with_val(prec, 1e-6);
        let b = orthonormalize(&cols, &tol);
        if b.rank() == dim {
            return CMatrix::from_columns(&b.q);
        }
    }
}

/// Normalized random dense operator.
pub fn random_dense(dim: usize, seed: u64, ctx: &PrecisionCtx) -> LabResult<OperatorSpec> {
    let mut r = rng(seed);
    let m = gaussian_matrix(&mut r, dim, ctx.prec());
    normalize_operator(&OperatorSpec::dense(m)?, ctx)
}

/// Normalized random normal operator `Q diag(l) Q*` with eigenvalues
/// in the annulus `0.2 <= |l| <= 1` before scaling.
pub fn random_normal(dim: usize, seed: u64, ctx: &PrecisionCtx) -> LabResult<OperatorSpec> {
    let mut r = rng(seed);
    let prec = ctx.prec();
    let q = unitary(&mut r, dim, prec);
    let mut d = CMatrix::zeros(dim, dim, prec);
    for i in 0..dim {
        let rad: f64 = 0.2 + 0.8 * r.gen::<f64>();
        let ang: f64 = std::f64::consts::TAU * r.gen::<f64>();
        d.set(i, i, Cx::from_f64(prec, rad * ang.cos(), rad * ang.sin()));
    }
    let m = q.mul(&d).mul(&q.adjoint());
    normalize_operator(&OperatorSpec::dense(m)?, ctx)
}

/// Shift with `w_n = 1/(K (n+1))`.
pub fn harmonic_shift(dim: usize, ctx: &PrecisionCtx) -> LabResult<OperatorSpec> {
    let prec = ctx.prec();
    let k = ctx.k();
    let w = (0..dim - 1)
        .map(|n| Cx::from_real(Float::with_val(prec, 1) / Float::with_val(prec, &k * (n as u32 + 1))))
        .collect();
    normalize_operator(&OperatorSpec::weighted_shift(w)?, ctx)
}

/// Shift with `w_n = 1/(K 2^n)`.
pub fn geometric_shift(dim: usize, ctx: &PrecisionCtx) -> LabResult<OperatorSpec> {
    let prec = ctx.prec();
    let k = ctx.k();
    let w = (0..dim - 1)
        .map(|n| Cx::from_real((Float::with_val(prec, 1) / &k) >> n as u32))
        .collect();
    normalize_operator(&OperatorSpec::weighted_shift(w)?, ctx)
}

/// Upper Jordan block with eigenvalue `lambda`, normalized.
pub fn jordan_block(dim: usize, lambda: (f64, f64), ctx: &PrecisionCtx) -> LabResult<OperatorSpec> {
    let prec = ctx.prec();
    let mut m = CMatrix::zeros(dim, dim, prec);
    for i in 0..dim {
        m.set(i, i, Cx::from_f64(prec, lambda.0, lambda.1));
        if i + 1 < dim {
            m.set(i, i + 1, Cx::one(prec));
        }
    }
    normalize_operator(&OperatorSpec::dense(m)?, ctx)
}
