use std::sync::Arc;

use rug::Float;

use crate::error::{LabError, LabResult};
use crate::linalg::{orthonormalize, CMatrix, HVector, LuFactor};
use crate::operator::{build_krylov, CoeffSeq, KrylovBasis, OperatorSpec};
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;

/// Solved extremal problem for a scaled datum `y = C^(1/2) y'`.
///
/// The datum is rotated by `phase` so that `a_0 = <z, y>` is real and
/// non-negative; `y_prime` and `y` are stored in that rotated frame.
#[derive(Clone, Debug)]
pub struct ExtremalState {
    pub x0: HVector,
    pub y_prime: HVector,
    pub c: Float,
    pub y: HVector,
    pub basis: KrylovBasis,
    /// `z = (I + G)^-1 x0`
    pub z: HVector,
    /// `a_j = <z, T^j y>`
    pub a: Vec<Cx>,
    /// `b_j = <(I + G)^-2 x0, T^j y>`
    pub b: Vec<Cx>,
    /// `kappa_j = <(I + G)^-1 y, T^j y>`
    pub kappa: Vec<Cx>,
    pub eps: Float,
    pub eps_theta: Float,
    /// Unit scalar with `y(stored) = y(input) * phase`.
    pub phase: Cx,
    pub cond_estimate: Float,
    pub residual_rel: Float,
    resolvent: Arc<LuFactor>,
}

impl ExtremalState {
    pub fn prec(&self) -> u32 {
        self.x0.prec()
    }

    pub fn dim(&self) -> usize {
        self.x0.dim()
    }

    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }

    /// `(I + G)^-1 x`.
    pub fn resolve(&self, x: &HVector) -> LabResult<HVector> {
        self.resolvent.solve_vec(x)
    }

    /// `<z, x0>`, real at the extremal point.
    pub fn band_value(&self) -> Float {
        self.z.inner(&self.x0).re
    }

    /// `l(T) y = G z = x0 - z`.
    pub fn candidate(&self) -> HVector {
        self.x0.sub(&self.z)
    }

    /// Coefficients on the stored scaled datum.
    pub fn ell_scaled(&self) -> CoeffSeq {
        CoeffSeq::new(self.a.clone())
    }

    /// Coefficients on the input scaled datum (undoing the gauge rotation).
    pub fn ell_scaled_input(&self) -> CoeffSeq {
        CoeffSeq::new(self.a.iter().map(|c| c * &self.phase).collect())
    }

    /// `l' = C^(1/2) a` on the stored unscaled datum.
    pub fn ell_primed(&self) -> CoeffSeq {
        let s = Float::with_val(self.prec(), self.c.sqrt_ref());
        CoeffSeq::new(self.a.iter().map(|c| c.scale(&s)).collect())
    }

    /// `l'` on the input unscaled datum.
    pub fn ell_primed_input(&self) -> CoeffSeq {
        let s = Float::with_val(self.prec(), self.c.sqrt_ref());
        CoeffSeq::new(self.a.iter().map(|c| (c * &self.phase).scale(&s)).collect())
    }

    /// `|a_0|^2 / eps_theta`; one when `eps_theta` vanishes.
    pub fn a0_ratio(&self) -> Float {
        if self.eps_theta.is_zero() {
            return Float::with_val(self.prec(), 1);
        }
        Float::with_val(self.prec(), self.a[0].norm_sqr() / &self.eps_theta)
    }

    /// `sum_{j>=1} |a_j|^2`.
    pub fn tail_mass(&self) -> Float {
        let mut s = Float::new(self.prec());
        for c in &self.a[1..] {
            s += c.norm_sqr();
        }
        s
    }

    /// `|a_0|^2 >= 100 sum_{j>=1} |a_j|^2`.
    pub fn is_dominant(&self) -> bool {
        let t = Float::with_val(self.prec(), self.tail_mass() * 100u32);
        self.a[0].norm_sqr() >= t
    }
}

fn check_x0(x0: &HVector, dim: usize, ctx: &PrecisionCtx) -> LabResult<HVector> {
    x0.check_dim(dim)?;
    let x0 = x0.with_prec(ctx.prec());
    let n = x0.norm();
    let dev = Float::with_val(ctx.prec(), &n - 1u32).abs();
    if dev > ctx.half_eps() {
        return Err(LabError::NotUnit { norm: n.to_f64() });
    }
    Ok(x0)
}

/// State for datum `y'` at scale `C >= 0`.
pub fn solve_scaled(
    t: &OperatorSpec,
    y_prime: &HVector,
    c: &Float,
    x0: &HVector,
    ctx: &PrecisionCtx,
) -> LabResult<ExtremalState> {
    let n = t.dim();
    y_prime.check_dim(n)?;
    let x0 = check_x0(x0, n, ctx)?;
    let prec = ctx.prec();
    if c.is_sign_negative() && !c.is_zero() {
        return Err(LabError::Precondition("scale C must be non-negative".into()));
    }
    let c = Float::with_val(prec, c);
    let y_prime = y_prime.with_prec(prec);
    let root = Float::with_val(prec, c.sqrt_ref());
    let y = y_prime.scale_real(&root);
    let j = ctx.krylov_degree(n);
    let basis = build_krylov(t, &y, j);
    let mut g = basis.gram_matrix();
    for i in 0..n {
        let d = g.get(i, i).clone();
        g.set(i, i, &d + &Cx::one(prec));
    }
    let lu = LuFactor::factor(&g)?;
    let cond = lu.cond_estimate();
    let cap = Float::with_val(prec, 1) << prec.saturating_sub(32);
    if cond > cap {
        return Err(LabError::SolveFailure {
            reason: format!("condition estimate {:e} exceeds working precision", cond.to_f64()),
        });
    }
    let (z, info) = lu.solve(&x0)?;
    let raw_a = basis.pairings(&z);
    let phase = raw_a[0].phase();
    let pc = phase.conj();
    let mut a: Vec<Cx> = raw_a.iter().map(|v| v * &pc).collect();
    a[0] = Cx::from_real(raw_a[0].abs());
    let basis = basis.scaled(&phase);
    let y = y.scale(&phase);
    let y_prime = y_prime.scale(&phase);
    let rz = lu.solve_vec(&z)?;
    let b = basis.pairings(&rz);
    let ry = lu.solve_vec(&y)?;
    let kappa = basis.pairings(&ry);
    let mut et = Float::new(prec);
    for v in &a {
        et += v.norm_sqr();
    }
    let eps = z.norm();
    Ok(ExtremalState {
        x0,
        y_prime,
        c,
        y,
        basis,
        z,
        a,
        b,
        kappa,
        eps,
        eps_theta: et,
        phase,
        cond_estimate: cond,
        residual_rel: info.residual_rel,
        resolvent: Arc::new(lu),
    })
}

/// Closed-form extremal state for an already scaled datum (`C = 1`).
pub fn solve_extremal(
    t: &OperatorSpec,
    y: &HVector,
    x0: &HVector,
    ctx: &PrecisionCtx,
) -> LabResult<ExtremalState> {
    if y.is_zero() {
        return Err(LabError::ZeroVector);
    }
    solve_scaled(t, y, &Float::with_val(ctx.prec(), 1), x0, ctx)
}

/// Residual `||(I + C G')^-1 x0||` evaluated in coefficient space.
struct ResidualMap {
    vecs: Vec<HVector>,
    gram: CMatrix,
    v_x0: HVector,
    x0: HVector,
}

impl ResidualMap {
    fn new(basis: &KrylovBasis, x0: &HVector) -> ResidualMap {
        ResidualMap {
            vecs: basis.vectors.clone(),
            gram: basis.coefficient_gram(),
            v_x0: HVector::from_coords(basis.pairings(x0)),
            x0: x0.clone(),
        }
    }

    fn system(&self, c: &Float) -> LabResult<LuFactor> {
        let m = self.gram.rows();
        let prec = c.prec();
        let mut a = self.gram.scale_real(c);
        for i in 0..m {
            let d = a.get(i, i).clone();
            a.set(i, i, &d + &Cx::one(prec));
        }
        LuFactor::factor(&a)
    }

    /// `(||z||, z, lu)` at scale `c`.
    fn eval(&self, c: &Float) -> LabResult<(Float, HVector, LuFactor)> {
        let lu = self.system(c)?;
        let u = lu.solve_vec(&self.v_x0)?;
        let mut z = self.x0.clone();
        let neg_c = Cx::from_real(Float::with_val(c.prec(), -c));
        for (uj, vj) in u.coords().iter().zip(&self.vecs) {
            z.axpy(&(&neg_c * uj), vj);
        }
        Ok((z.norm(), z, lu))
    }

    /// `d||z||/dC = Re<dz, z>/||z||` with `dz = -V (I + C M)^-1 V* z`.
    fn derivative(&self, z: &HVector, norm: &Float, lu: &LuFactor) -> LabResult<Float> {
        let vz = HVector::from_coords(self.vecs.iter().map(|v| z.inner(v)).collect());
        let w = lu.solve_vec(&vz)?;
        let dz = crate::linalg::combine(w.coords(), &self.vecs);
        let d = Float::with_val(norm.prec(), -dz.inner(z).re);
        Ok(d / norm)
    }
}

/// Distance from `x0` to the Krylov span of `y'`: the infimum of the
/// residual over all scales.
pub fn residual_infimum(basis: &KrylovBasis, x0: &HVector, ctx: &PrecisionCtx) -> Float {
    let ob = orthonormalize(&basis.vectors, &ctx.rank_tol());
    ob.project_out(x0).norm()
}

/// Find `C` with `||(I + C G')^-1 x0|| = eps_target` and return the state there.
pub fn calibrate_scale(
    t: &OperatorSpec,
    y_prime: &HVector,
    x0: &HVector,
    eps_target: f64,
    ctx: &PrecisionCtx,
) -> LabResult<ExtremalState> {
    let prec = ctx.prec();
    calibrate_scale_real(t, y_prime, x0, &Float::with_val(prec, eps_target), ctx)
}

pub fn calibrate_scale_real(
    t: &OperatorSpec,
    y_prime: &HVector,
    x0: &HVector,
    eps_target: &Float,
    ctx: &PrecisionCtx,
) -> LabResult<ExtremalState> {
    let n = t.dim();
    y_prime.check_dim(n)?;
    let x0 = check_x0(x0, n, ctx)?;
    let prec = ctx.prec();
    let target = Float::with_val(prec, eps_target);
    if target.is_sign_negative() || target.is_zero() {
        return Err(LabError::Unattainable {
            target: target.to_f64(),
            infimum: 0.0,
        });
    }
    if y_prime.is_zero() {
        return Err(LabError::ZeroVector);
    }
    if target >= 1u32 {
        return solve_scaled(t, y_prime, &Float::new(prec), &x0, ctx);
    }
    let y_prime = y_prime.with_prec(prec);
    let basis = build_krylov(t, &y_prime, ctx.krylov_degree(n));
    let inf = residual_infimum(&basis, &x0, ctx);
    if inf >= target {
        return Err(LabError::Unattainable {
            target: target.to_f64(),
            infimum: inf.to_f64(),
        });
    }
    let map = ResidualMap::new(&basis, &x0);
    let limit = Float::with_val(prec, 1) << prec;
    let mut lo = Float::new(prec);
    let mut hi = Float::with_val(prec, 1);
    loop {
        let (phi, _, _) = map.eval(&hi)?;
        if phi <= target {
            break;
        }
        lo = hi.clone();
        hi *= 2u32;
        if hi > limit {
            return Err(LabError::SolveFailure {
                reason: "calibration bracket exceeded precision budget".into(),
            });
        }
    }
    let stop = Float::with_val(prec, 1) >> prec.saturating_sub(4);
    for _ in 0..200 {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        let (phi, _, _) = map.eval(&mid)?;
        if phi > target {
            lo = mid;
        } else {
            hi = mid;
        }
        let width = Float::with_val(prec, &hi - &lo);
        if width <= Float::with_val(prec, &hi * &stop) {
            break;
        }
    }
    let mut c = hi.clone();
    for _ in 0..6 {
        let (phi, z, lu) = map.eval(&c)?;
        let d = map.derivative(&z, &phi, &lu)?;
        if d.is_zero() {
            break;
        }
        let step = Float::with_val(prec, &phi - &target) / &d;
        let next = Float::with_val(prec, &c - &step);
        if next < lo || next > hi || next.is_sign_negative() {
            break;
        }
        c = next;
    }
    let state = solve_scaled(t, &y_prime, &c, &x0, ctx)?;
    let dev = Float::with_val(prec, &state.eps - &target).abs();
    let tol = Float::with_val(prec, &target >> (prec / 3));
    if dev > tol {
        return Err(LabError::SolveFailure {
            reason: format!(
                "calibrated residual {:e} misses target {:e}",
                state.eps.to_f64(),
                target.to_f64()
            ),
        });
    }
    Ok(state)
}

/// Residual at scale `C` via the coefficient-space formula; used in tests
/// and the monotonicity property.
pub fn residual_at_scale(
    t: &OperatorSpec,
    y_prime: &HVector,
    x0: &HVector,
    c: &Float,
    ctx: &PrecisionCtx,
) -> LabResult<Float> {
    let basis = build_krylov(t, &y_prime.with_prec(ctx.prec()), ctx.krylov_degree(t.dim()));
    let map = ResidualMap::new(&basis, &x0.with_prec(ctx.prec()));
    map.eval(&Float::with_val(ctx.prec(), c)).map(|(p, _, _)| p)
}
