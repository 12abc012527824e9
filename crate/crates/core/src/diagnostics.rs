//! Invariance residuals of candidate Krylov subspaces and the exact
//! spectral chain they can be compared against.

use rug::Float;

use crate::error::{LabError, LabResult};
use crate::linalg::{orthonormalize, orthonormalize_prefix, project_out, schur, singular_values, CMatrix, HVector, Schur};
use crate::operator::{OperatorKind, OperatorSpec};
use crate::precision::PrecisionCtx;

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub candidate: HVector,
    pub krylov_rank: usize,
    /// `||(I - P) T P||`
    pub rho: Float,
    /// `||x0 - P x0||`
    pub band_distance: Float,
    /// `sup_{0<=j<=J} |<T^j z, x0 - z>|`
    pub almost_cyclicity: Float,
    pub spectral_angle: Option<Float>,
    /// Orthonormal basis of the Krylov span.
    pub basis: Vec<HVector>,
}

fn krylov_set(t: &OperatorSpec, z: &HVector, k: usize) -> Vec<HVector> {
    let mut out = Vec::with_capacity(k);
    let mut v = z.clone();
    for _ in 0..k {
        out.push(v.clone());
        v = t.apply(&v, false);
    }
    out
}

/// `||(I - P) T Q||` for an orthonormal `Q` spanning the range of `P`.
pub fn subspace_residual(t: &OperatorSpec, q: &[HVector]) -> Float {
    let prec = q.first().map(|v| v.prec()).unwrap_or(64);
    if q.is_empty() {
        return Float::new(prec);
    }
    let cols: Vec<HVector> = q.iter().map(|v| project_out(q, &t.apply(v, false))).collect();
    singular_values(&CMatrix::from_columns(&cols)).swap_remove(0)
}

fn report(t: &OperatorSpec, z: &HVector, q: Vec<HVector>, x0: &HVector, ctx: &PrecisionCtx) -> InvarianceReport {
    let rho = subspace_residual(t, &q);
    let band_distance = project_out(&q, x0).norm();
    let rest = x0.sub(z);
    let mut ac = Float::new(ctx.prec());
    let mut v = z.clone();
    for _ in 0..=ctx.krylov_degree(t.dim()) {
        let p = v.inner(&rest).abs();
        if p > ac {
            ac = p;
        }
        v = t.apply(&v, false);
    }
    InvarianceReport {
        candidate: z.clone(),
        krylov_rank: q.len(),
        rho,
        band_distance,
        almost_cyclicity: ac,
        spectral_angle: None,
        basis: q,
    }
}

/// Report on `span{z, Tz, ..., T^(k-1) z}`; `RankDeficient` if the set loses
/// rank before `k`.
pub fn invariance_residual(
    t: &OperatorSpec,
    z: &HVector,
    k: usize,
    x0: &HVector,
    ctx: &PrecisionCtx,
) -> LabResult<InvarianceReport> {
    if z.is_zero() {
        return Err(LabError::ZeroVector);
    }
    z.check_dim(t.dim())?;
    x0.check_dim(t.dim())?;
    if k == 0 || k > t.dim() {
        return Err(LabError::Precondition(format!("krylov rank {k} outside 1..={}", t.dim())));
    }
    let ob = orthonormalize(&krylov_set(t, z, k), &ctx.rank_tol());
    if ob.rank() < k {
        return Err(LabError::RankDeficient {
            achieved: ob.rank(),
            requested: k,
        });
    }
    Ok(report(t, z, ob.q, x0, ctx))
}

/// Report at the rank where the Krylov sequence of `z` first becomes dependent.
pub fn invariance_at_achieved_rank(
    t: &OperatorSpec,
    z: &HVector,
    x0: &HVector,
    ctx: &PrecisionCtx,
) -> LabResult<InvarianceReport> {
    if z.is_zero() {
        return Err(LabError::ZeroVector);
    }
    let ob = orthonormalize_prefix(&krylov_set(t, z, t.dim()), &ctx.rank_tol());
    Ok(report(t, z, ob.q, x0, ctx))
}

/// Principal angles (radians, ascending) between the spans of two
/// orthonormal sets, from the singular values of `(I - Q_b Q_b*) Q_a` with
/// the smaller set as `Q_a`.
pub fn principal_angles(a: &[HVector], b: &[HVector]) -> Vec<f64> {
    let (a, b) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if a.is_empty() {
        return vec![];
    }
    let cols: Vec<HVector> = a.iter().map(|v| project_out(b, v)).collect();
    let mut angles: Vec<f64> = singular_values(&CMatrix::from_columns(&cols))
        .into_iter()
        .map(|s| s.to_f64().min(1.0).asin())
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    angles
}

pub fn max_principal_angle(a: &[HVector], b: &[HVector]) -> f64 {
    principal_angles(a, b).into_iter().fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct SpectralReference {
    pub schur: Schur,
    /// `chain[k-1]` spans the first `k` Schur vectors, `k = 1..=N`.
    pub chain: Vec<Vec<HVector>>,
    /// Residual `||(I - P) T P||` of each chain member.
    pub residuals: Vec<Float>,
    /// Whether the Schur factor is diagonal to `half_eps` relative.
    pub normal: bool,
}

impl SpectralReference {
    /// Smallest largest-principal-angle between `basis` and a reference
    /// subspace of the same dimension. For normal operators the eigenvector
    /// subset carrying the most weight of `basis` is also considered.
    pub fn nearest_angle(&self, basis: &[HVector]) -> Option<f64> {
        let k = basis.len();
        if k == 0 || k > self.chain.len() {
            return None;
        }
        let mut best = max_principal_angle(basis, &self.chain[k - 1]);
        if self.normal {
            let eig = self.schur.z.columns();
            let mut weights: Vec<(usize, Float)> = eig
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let mut w = Float::new(e.prec());
                    for v in basis {
                        w += v.inner(e).norm_sqr();
                    }
                    (i, w)
                })
                .collect();
            weights.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
            let pick: Vec<HVector> = weights[..k].iter().map(|(i, _)| eig[*i].clone()).collect();
            best = best.min(max_principal_angle(basis, &pick));
        }
        Some(best)
    }
}

/// Nested invariant subspaces from the leading Schur vectors of a dense operator.
pub fn spectral_reference(t: &OperatorSpec, ctx: &PrecisionCtx) -> LabResult<SpectralReference> {
    let m = match &t.kind {
        OperatorKind::Dense(m) => m,
        _ => return Err(LabError::Precondition("spectral reference needs a dense operator".into())),
    };
    let sch = schur(m)?;
    let cols = sch.z.columns();
    let n = cols.len();
    let mut chain = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for k in 1..=n {
        let q = cols[..k].to_vec();
        residuals.push(subspace_residual(t, &q));
        chain.push(q);
    }
    let prec = ctx.prec();
    let scale = sch.s.max_abs();
    let mut off = Float::new(prec);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sch.s.get(i, j).abs();
            if v > off {
                off = v;
            }
        }
    }
    let normal = off <= Float::with_val(prec, &scale * &ctx.half_eps());
    Ok(SpectralReference {
        schur: sch,
        chain,
        residuals,
        normal,
    })
}
