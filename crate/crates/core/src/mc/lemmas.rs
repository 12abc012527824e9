//! Preparation before the step loop: the starting scan, dominance
//! renormalization with its h-curve, and the Case I / Case II dichotomy.

use rug::ops::Pow;
use rug::Float;

use crate::error::{LabError, LabResult};
use crate::linalg::{CMatrix, HVector, LuFactor};
use crate::operator::OperatorSpec;
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;
use crate::solver::{calibrate_scale, calibrate_scale_real, ExtremalState};

#[derive(Clone, Debug)]
pub struct DominanceOptions {
    /// Renormalization requires `eps_theta` at or below this unless the state
    /// is already dominant.
    pub threshold: f64,
    /// Positive grid points for the h-curve, log-spaced on `[h_min, 1]`.
    pub grid_points: usize,
    pub h_min: f64,
}

impl Default for DominanceOptions {
    fn default() -> Self {
        DominanceOptions {
            threshold: 1e-4,
            grid_points: 15,
            h_min: 1e-6,
        }
    }
}

impl DominanceOptions {
    /// `0` followed by the log-spaced points.
    pub fn grid(&self) -> Vec<f64> {
        let mut g = vec![0.0];
        let n = self.grid_points;
        let lo = self.h_min.ln();
        for k in 0..n {
            let t = if n == 1 { 1.0 } else { k as f64 / (n - 1) as f64 };
            g.push((lo * (1.0 - t)).exp());
        }
        g
    }
}

#[derive(Clone, Debug)]
pub struct DominanceReport {
    /// `1 - a_0` for the re-solved coefficients on `y1' = l(T) y`.
    pub d: Cx,
    /// `|d|` where the h-curve reaches `h_bound`, if it does on the grid.
    pub gamma_estimate: Option<f64>,
    pub h_bound: Float,
    pub h_curve: Vec<(f64, Float)>,
    pub dominant: bool,
    /// Whether the returned state is the re-solved one.
    pub renormalized: bool,
    pub resolved: ExtremalState,
}

/// `min ||d y - sum_{j=1..J} c_j T^j y||` over `|c_j| <= 1`, at each `d` of the grid.
pub fn h_curve(t: &OperatorSpec, y: &HVector, degree: usize, grid: &[f64]) -> LabResult<Vec<(f64, Float)>> {
    let prec = y.prec();
    let mut vecs = Vec::new();
    let mut v = y.clone();
    for _ in 0..degree {
        v = t.apply(&v, false);
        if !v.is_zero() {
            vecs.push(v.clone());
        }
    }
    let lu = if vecs.is_empty() {
        None
    } else {
        LuFactor::factor(&CMatrix::gram_of(&vecs)).ok()
    };
    grid.iter()
        .map(|&d| {
            let target = y.scale_real(&Float::with_val(prec, d));
            let h = if d == 0.0 || vecs.is_empty() {
                target.norm()
            } else {
                disc_constrained_residual(&target, &vecs, lu.as_ref())?
            };
            Ok((d, h))
        })
        .collect()
}

fn disc_constrained_residual(target: &HVector, vecs: &[HVector], lu: Option<&LuFactor>) -> LabResult<Float> {
    let prec = target.prec();
    let m = vecs.len();
    let mut c: Vec<Cx> = vec![Cx::zero(prec); m];
    if let Some(lu) = lu {
        let rhs = HVector::from_coords(vecs.iter().map(|v| target.inner(v)).collect());
        if let Ok(sol) = lu.solve_vec(&rhs) {
            c = sol.into_coords();
            if c.iter().all(|cj| cj.abs() <= 1u32) {
                let mut res = target.clone();
                for (cj, v) in c.iter().zip(vecs) {
                    res.axpy(&(-cj), v);
                }
                return Ok(res.norm());
            }
            for cj in c.iter_mut() {
                clip_unit(cj);
            }
        }
    }
    let norms: Vec<Float> = vecs.iter().map(|v| v.norm_sqr()).collect();
    let mut res = target.clone();
    for (cj, v) in c.iter().zip(vecs) {
        res.axpy(&(-cj), v);
    }
    let tol = Float::with_val(prec, 1) >> (prec / 2);
    for _sweep in 0..20000 {
        let mut moved = Float::new(prec);
        for j in 0..m {
            let step = res.inner(&vecs[j]).scale(&(Float::with_val(prec, 1) / &norms[j]));
            let mut cj = &c[j] + &step;
            clip_unit(&mut cj);
            let dc = &cj - &c[j];
            let dn = dc.abs();
            if !dn.is_zero() {
                res.axpy(&(-&dc), &vecs[j]);
                if dn > moved {
                    moved = dn;
                }
                c[j] = cj;
            }
        }
        if moved <= tol {
            return Ok(res.norm());
        }
    }
    Err(LabError::NoConvergence("h-curve coordinate descent".into()))
}

fn clip_unit(c: &mut Cx) {
    let a = c.abs();
    if a > 1u32 {
        *c = c.scale(&(Float::with_val(a.prec(), 1) / &a));
    }
}

/// `2 [log_K(1/eps_theta) eps_theta]^(1/2)`.
pub fn h_bound(eps_theta: &Float, ctx: &PrecisionCtx) -> Float {
    let prec = eps_theta.prec();
    let lk = Float::with_val(prec, ctx.norm_scale_k).ln();
    let l = Float::with_val(prec, eps_theta.recip_ref()).ln() / lk;
    (l * eps_theta).sqrt() * 2u32
}

/// Linear interpolation of the first crossing `h = bound`.
fn crossing(curve: &[(f64, Float)], bound: &Float) -> Option<f64> {
    for w in curve.windows(2) {
        let (d0, h0) = (&w[0].0, &w[0].1);
        let (d1, h1) = (&w[1].0, &w[1].1);
        if h1 >= bound {
            if h0 >= bound {
                return Some(*d0);
            }
            let f = Float::with_val(bound.prec(), bound - h0) / Float::with_val(bound.prec(), h1 - h0);
            return Some(d0 + (d1 - d0) * f.to_f64());
        }
    }
    None
}

/// Re-solve at the same distance from `y1' = l(T) y` and report the
/// deficiency `d` of the new leading coefficient.
pub fn dominance_renormalize(
    t: &OperatorSpec,
    state: &ExtremalState,
    opts: &DominanceOptions,
    ctx: &PrecisionCtx,
) -> LabResult<(ExtremalState, DominanceReport)> {
    let prec = state.prec();
    let already = state.is_dominant();
    if !already && state.eps_theta > opts.threshold {
        return Err(LabError::Precondition(format!(
            "eps_theta {:e} above dominance threshold {:e}",
            state.eps_theta.to_f64(),
            opts.threshold
        )));
    }
    let y1 = state.candidate();
    let resolved = calibrate_scale_real(t, &y1, &state.x0, &state.eps, ctx)?;
    let ell = resolved.ell_primed_input();
    let d = &Cx::one(prec) - &ell.coeffs[0];
    let degree = ctx.krylov_degree(t.dim());
    let h = h_curve(t, &y1, degree, &opts.grid())?;
    let bound = h_bound(&state.eps_theta, ctx);
    let gamma_estimate = crossing(&h, &bound);
    let (out, renormalized) = if already {
        (state.clone(), false)
    } else {
        (resolved.clone(), true)
    };
    let report = DominanceReport {
        d,
        gamma_estimate,
        h_bound: bound,
        h_curve: h,
        dominant: out.is_dominant(),
        renormalized,
        resolved,
    };
    Ok((out, report))
}

#[derive(Clone, Debug)]
pub enum CaseOutcome {
    CaseI {
        witness: usize,
        pairing: Float,
        tail_mass: Float,
        /// `sum_{j>=1} |a_j|^2 >= (eps_theta)^p_lower`
        lower_bound_holds: bool,
    },
    CaseII {
        state: ExtremalState,
        delta: Float,
        max_pairing: Float,
        /// new `eps_theta` over old
        contraction: Float,
        /// `||l'(T) y1' - (1 + delta) y1'||`
        drift: Float,
    },
}

/// `max_{1<=j<=J} |<T^j y1', x0 - y1'>|` and its index, with `y1' = l(T) y`.
pub fn case_pairing(t: &OperatorSpec, state: &ExtremalState, ctx: &PrecisionCtx) -> (usize, Float) {
    let y1 = state.candidate();
    let degree = ctx.krylov_degree(t.dim()).max(1);
    let mut best = (1, Float::new(state.prec()));
    let mut v = y1;
    for j in 1..=degree {
        v = t.apply(&v, false);
        let p = v.inner(&state.z).abs();
        if p > best.1 {
            best = (j, p);
        }
    }
    best
}

/// Case I when some pairing reaches `(eps_theta)^p_case_i`; otherwise the
/// dilation re-solve at `delta = eps_theta / 10`.
pub fn case_dichotomy(t: &OperatorSpec, state: &ExtremalState, ctx: &PrecisionCtx) -> LabResult<CaseOutcome> {
    let prec = state.prec();
    let (j, pairing) = case_pairing(t, state, ctx);
    let et = &state.eps_theta;
    let thr = Float::with_val(prec, et.pow(&Float::with_val(prec, ctx.exponents.p_case_i)));
    if pairing >= thr {
        let tail_mass = state.tail_mass();
        let lower = Float::with_val(prec, et.pow(&Float::with_val(prec, ctx.exponents.p_lower)));
        return Ok(CaseOutcome::CaseI {
            witness: j,
            lower_bound_holds: tail_mass >= lower,
            pairing,
            tail_mass,
        });
    }
    let delta = Float::with_val(prec, et / 10u32);
    let y1 = state.candidate();
    let y2 = y1.scale_real(&(Float::with_val(prec, 1) + &delta));
    let rest = state.x0.sub(&y2);
    let target = rest.norm();
    let next = calibrate_scale_real(t, &y2, &state.x0, &target, ctx)?;
    let contraction = Float::with_val(prec, &next.eps_theta / et);
    let drift = next.z.sub(&rest).norm();
    Ok(CaseOutcome::CaseII {
        state: next,
        delta,
        max_pairing: pairing,
        contraction,
        drift,
    })
}

#[derive(Clone, Debug)]
pub struct LemmaOptions {
    pub eps_start: f64,
    /// Scan width and threshold factor `c`: the scan covers
    /// `(eps_start - c (eps_theta)_0, eps_start]` and stops at
    /// `eps_theta <= c (eps_theta)_0 / 2`.
    pub factor: f64,
    /// `(eps_theta)_0`; defaults to `eps_theta` at `eps_start`.
    pub eps_theta_0: Option<f64>,
    pub grid_points: usize,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        LemmaOptions {
            eps_start: 0.5,
            factor: 1e-5,
            eps_theta_0: None,
            grid_points: 32,
        }
    }
}

/// Scan `eps` downward from `eps_start` for the first point whose
/// `eps_theta` is at most `c (eps_theta)_0 / 2`.
pub fn lemma1_scan(
    t: &OperatorSpec,
    y0_prime: &HVector,
    x0: &HVector,
    opts: &LemmaOptions,
    ctx: &PrecisionCtx,
) -> LabResult<(f64, ExtremalState)> {
    let first = calibrate_scale(t, y0_prime, x0, opts.eps_start, ctx)?;
    let et0 = opts.eps_theta_0.unwrap_or_else(|| first.eps_theta.to_f64());
    let threshold = 0.5 * opts.factor * et0;
    let width = opts.factor * et0;
    let n = opts.grid_points.max(1);
    let mut growth = Vec::new();
    for k in 0..n {
        let eps = opts.eps_start - width * k as f64 / n as f64;
        let st = if k == 0 {
            first.clone()
        } else {
            calibrate_scale(t, y0_prime, x0, eps, ctx)?
        };
        growth.push((eps, st.eps_theta.to_f64(), st.ell_primed().two_norm.to_f64()));
        if st.eps_theta <= threshold {
            return Ok((eps, st));
        }
    }
    Err(LabError::ScanExhausted { threshold, growth })
}
