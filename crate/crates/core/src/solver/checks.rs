use rug::Float;

use super::state::{calibrate_scale, ExtremalState};
use crate::error::{LabError, LabResult};
use crate::linalg::HVector;
use crate::operator::{CoeffSeq, OperatorSpec};
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;

/// `<r(T) y, z>` with `r` on the stored scaled datum.
pub fn stationarity_check(state: &ExtremalState, r: &[Cx]) -> LabResult<Cx> {
    if r.len() > state.basis.len() {
        return Err(LabError::DimensionMismatch {
            expected: state.basis.len(),
            found: r.len(),
        });
    }
    let ry = state.basis.combine(r);
    Ok(ry.inner(&state.z))
}

/// `<r(T) y', z> / <r, l'>` on the stored unscaled datum. At the extremal
/// point this equals `1/C` for every `r` not orthogonal to `l'`.
pub fn proportionality_constant(state: &ExtremalState, r: &[Cx]) -> LabResult<Cx> {
    let prec = state.prec();
    let pairing = stationarity_check(state, r)?;
    let root = Float::with_val(prec, state.c.sqrt_ref());
    if root.is_zero() {
        return Err(LabError::Precondition("scale C is zero".into()));
    }
    let lhs = pairing.scale(&(Float::with_val(prec, 1) / &root));
    let ell = state.ell_primed();
    let mut rl = Cx::zero(prec);
    for (ri, li) in r.iter().zip(&ell.coeffs) {
        rl.add_mul_conj(ri, li);
    }
    if rl.is_zero() {
        return Err(LabError::Precondition("r orthogonal to l".into()));
    }
    Ok(lhs.div(&rl))
}

#[derive(Clone, Debug)]
pub struct InvarianceProfile {
    /// `p_j = |<T^j l(T) y, z>|`, `j = 0..=j_max`.
    pub p: Vec<Float>,
    pub eps_theta: Float,
    /// Relative slack owed to Krylov truncation.
    pub tol_trunc: Float,
}

impl InvarianceProfile {
    pub fn max(&self) -> Float {
        self.p.iter().cloned().fold(Float::new(self.eps_theta.prec()), |m, v| m.max(&v))
    }

    pub fn within_bound(&self) -> bool {
        let bound = Float::with_val(self.eps_theta.prec(), &self.tol_trunc + 1u32) * &self.eps_theta;
        self.max() <= bound
    }
}

pub fn almost_invariance_profile(
    t: &OperatorSpec,
    state: &ExtremalState,
    j_max: usize,
    ctx: &PrecisionCtx,
) -> InvarianceProfile {
    let prec = state.prec();
    let mut w = state.candidate();
    let mut p = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        if j > 0 {
            w = t.apply(&w, false);
        }
        p.push(w.inner(&state.z).abs());
    }
    let ynorm = state.y.norm();
    let tail = Float::with_val(prec, &ynorm * ctx.tail_tol).max(&state.basis.tail_bound);
    let tol_trunc = if state.eps_theta.is_zero() {
        Float::new(prec)
    } else {
        Float::with_val(prec, &tail / &state.eps_theta)
    };
    InvarianceProfile {
        p,
        eps_theta: state.eps_theta.clone(),
        tol_trunc,
    }
}

#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub eps: f64,
    pub state: ExtremalState,
    /// `l'` on the input datum.
    pub ell: CoeffSeq,
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    /// `max ||l'_i - l'_{i+1}|| / |eps_i - eps_{i+1}|` over consecutive grid points.
    pub lipschitz: Option<Float>,
}

/// Calibrate at every grid value; the grid must be strictly monotone.
pub fn epsilon_scan(
    t: &OperatorSpec,
    y_prime: &HVector,
    x0: &HVector,
    grid: &[f64],
    ctx: &PrecisionCtx,
) -> LabResult<ScanResult> {
    if grid.len() >= 2 {
        let inc = grid.windows(2).all(|w| w[1] > w[0]);
        let dec = grid.windows(2).all(|w| w[1] < w[0]);
        if !inc && !dec {
            return Err(LabError::Precondition("grid must be strictly monotone".into()));
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    for &eps in grid {
        let state = calibrate_scale(t, y_prime, x0, eps, ctx)?;
        let ell = state.ell_primed_input();
        points.push(ScanPoint { eps, state, ell });
    }
    let prec = ctx.prec();
    let mut lip: Option<Float> = None;
    for w in points.windows(2) {
        let d = w[0].ell.dist(&w[1].ell);
        let de = Float::with_val(prec, w[0].eps - w[1].eps).abs();
        let q = d / de;
        lip = Some(match lip {
            None => q,
            Some(m) => m.max(&q),
        });
    }
    Ok(ScanResult { points, lipschitz: lip })
}
