//! Direct minimization of `||l||_2` over `{l : ||x0 - l(T) y|| <= eps}`.
//!
//! Works entirely in coefficient space and shares no code path with the
//! resolvent solve beyond the Krylov vectors themselves.

use rug::Float;

use super::state::residual_infimum;
use crate::error::{LabError, LabResult};
use crate::generators::{gaussian_cx, rng};
use crate::linalg::{combine, CMatrix, HVector, LuFactor};
use crate::operator::{build_krylov, CoeffSeq, KrylovBasis, OperatorSpec};
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub coeffs: CoeffSeq,
    /// `||x0 - l(T) y||` at the returned point.
    pub eps: Float,
    pub iterations: usize,
    /// Final gradient-mapping norm.
    pub stationarity: Float,
}

struct Ellipsoid<'a> {
    vecs: &'a [HVector],
    gram: CMatrix,
    v: Vec<Cx>,
    x0: &'a HVector,
    eps: Float,
    prec: u32,
}

impl<'a> Ellipsoid<'a> {
    fn residual(&self, a: &[Cx]) -> Float {
        self.x0.sub(&combine(a, self.vecs)).norm()
    }

    fn solve_mu(&self, p: &[Cx], mu: &Float) -> LabResult<(Vec<Cx>, LuFactor)> {
        let m = p.len();
        let mut sys = self.gram.scale_real(mu);
        for i in 0..m {
            let d = sys.get(i, i).clone();
            sys.set(i, i, &d + &Cx::one(self.prec));
        }
        let lu = LuFactor::factor(&sys)?;
        let rhs: Vec<Cx> = p
            .iter()
            .zip(&self.v)
            .map(|(pi, vi)| pi + &vi.scale(mu))
            .collect();
        let a = lu.solve_vec(&HVector::from_coords(rhs))?;
        Ok((a.into_coords(), lu))
    }

    /// Euclidean projection onto the ellipsoid.
    fn project(&self, p: &[Cx]) -> LabResult<Vec<Cx>> {
        if self.residual(p) <= self.eps {
            return Ok(p.to_vec());
        }
        let prec = self.prec;
        let mut lo = Float::new(prec);
        let mut hi = Float::with_val(prec, 1);
        let limit = Float::with_val(prec, 1) << prec;
        loop {
            let (a, _) = self.solve_mu(p, &hi)?;
            if self.residual(&a) <= self.eps {
                break;
            }
            lo = hi.clone();
            hi *= 4u32;
            if hi > limit {
                return Err(LabError::NoConvergence("multiplier bracket".into()));
            }
        }
        let coarse = Float::with_val(prec, 1e-6);
        for _ in 0..200 {
            let mid = Float::with_val(prec, &lo + &hi) / 2u32;
            let (a, _) = self.solve_mu(p, &mid)?;
            if self.residual(&a) > self.eps {
                lo = mid;
            } else {
                hi = mid;
            }
            if Float::with_val(prec, &hi - &lo) <= Float::with_val(prec, &hi * &coarse) {
                break;
            }
        }
        // Newton on h(mu) = ||x0 - V a(mu)||^2 - eps^2 inside the bracket.
        let eps2 = Float::with_val(prec, &self.eps * &self.eps);
        let tight = Float::with_val(prec, &eps2 >> prec.saturating_sub(12));
        let mut mu = Float::with_val(prec, &lo + &hi) / 2u32;
        let mut best = self.solve_mu(p, &hi)?.0;
        for _ in 0..60 {
            let (a, lu) = self.solve_mu(p, &mu)?;
            let r = self.x0.sub(&combine(&a, self.vecs));
            let h = Float::with_val(prec, r.norm_sqr() - &eps2);
            if h <= 0u32 {
                best = a.clone();
            }
            if Float::with_val(prec, h.abs_ref()) <= tight {
                best = a;
                break;
            }
            // a' = (I + mu M)^-1 (v - M a)
            let ma = self.gram.mul_vec(&HVector::from_coords(a.clone()));
            let rhs: Vec<Cx> = self.v.iter().zip(ma.coords()).map(|(vi, mi)| vi - mi).collect();
            let da = lu.solve_vec(&HVector::from_coords(rhs))?;
            let dva = combine(da.coords(), self.vecs);
            let dh = Float::with_val(prec, dva.inner(&r).re * -2i32);
            if dh.is_zero() {
                break;
            }
            let next = Float::with_val(prec, &mu - &(h / &dh));
            if next <= lo || next >= hi {
                break;
            }
            mu = next;
        }
        Ok(best)
    }
}

fn norm_sqr(a: &[Cx], prec: u32) -> Float {
    let mut s = Float::new(prec);
    for c in a {
        s += c.norm_sqr();
    }
    s
}

/// Projected-gradient minimization with seeded restarts.
pub fn oracle_minimize(
    t: &OperatorSpec,
    y: &HVector,
    x0: &HVector,
    eps_target: f64,
    ctx: &PrecisionCtx,
    seed: u64,
) -> LabResult<OracleResult> {
    let prec = ctx.prec();
    y.check_dim(t.dim())?;
    x0.check_dim(t.dim())?;
    if y.is_zero() {
        return Err(LabError::ZeroVector);
    }
    let y = y.with_prec(prec);
    let x0 = x0.with_prec(prec);
    let basis: KrylovBasis = build_krylov(t, &y, ctx.krylov_degree(t.dim()));
    let m = basis.len();
    let eps = Float::with_val(prec, eps_target);
    if x0.norm() <= eps {
        return Ok(OracleResult {
            coeffs: CoeffSeq::zeros(m, prec),
            eps: x0.norm(),
            iterations: 0,
            stationarity: Float::new(prec),
        });
    }
    let dist = residual_infimum(&basis, &x0, ctx);
    if dist > eps {
        return Err(LabError::Infeasible {
            target: eps_target,
            distance: dist.to_f64(),
        });
    }
    let ell = Ellipsoid {
        vecs: &basis.vectors,
        gram: basis.coefficient_gram(),
        v: basis.pairings(&x0),
        x0: &x0,
        eps,
        prec,
    };
    let tol = Float::with_val(prec, 1e-10);
    let mut r = rng(seed);
    let mut best: Option<(Float, Vec<Cx>, usize, Float)> = None;
    for _restart in 0..8 {
        let start: Vec<Cx> = (0..m).map(|_| gaussian_cx(&mut r, prec)).collect();
        let mut a = ell.project(&start)?;
        let mut gm = Float::with_val(prec, rug::float::Special::Infinity);
        let mut iters = 0;
        for _ in 0..500 {
            iters += 1;
            let fa = norm_sqr(&a, prec);
            let mut eta = Float::with_val(prec, 1);
            let mut next;
            loop {
                let step = Float::with_val(prec, 1u32 - Float::with_val(prec, &eta * 2u32));
                let trial: Vec<Cx> = a.iter().map(|c| c.scale(&step)).collect();
                next = ell.project(&trial)?;
                let diff: Vec<Cx> = next.iter().zip(&a).map(|(n, o)| n - o).collect();
                let d2 = norm_sqr(&diff, prec);
                let mut lin = Float::new(prec);
                for (ai, di) in a.iter().zip(&diff) {
                    lin += ai.mul_conj(di).re * 2u32;
                }
                let model = Float::with_val(prec, &fa + &lin) + Float::with_val(prec, &d2 / (Float::with_val(prec, &eta * 2u32)));
                if norm_sqr(&next, prec) <= model || eta < 1e-12 {
                    gm = Float::with_val(prec, d2.sqrt() / &eta);
                    break;
                }
                eta /= 2u32;
            }
            a = next;
            let scale = Float::with_val(prec, norm_sqr(&a, prec).sqrt()).max(&Float::with_val(prec, 1));
            if gm <= Float::with_val(prec, &tol * &scale) {
                break;
            }
        }
        let f = norm_sqr(&a, prec);
        let better = match &best {
            None => true,
            Some((bf, ..)) => f < *bf,
        };
        if better {
            best = Some((f, a, iters, gm));
        }
    }
    let (_, a, iterations, stationarity) = best.unwrap();
    let eps_out = ell.residual(&a);
    Ok(OracleResult {
        coeffs: CoeffSeq::new(a),
        eps: eps_out,
        iterations,
        stationarity,
    })
}
