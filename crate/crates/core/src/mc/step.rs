//! Constrained step selection, the near-dependence fallback and restriction vectors.

use rug::ops::Pow;
use rug::Float;

use super::calculus::{linear_change_z, restriction_sequence, ChangeFunctionals, LinearForm, Prediction};
use crate::error::{LabError, LabResult};
use crate::linalg::{singular_values, CMatrix, HVector};
use crate::operator::{autocorrelation, gram_apply, CoeffSeq, OperatorSpec};
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;
use crate::solver::{solve_extremal, ExtremalState};

/// `min ||sum a_i v_i||` over `max |a_i| = 1`, reported as the smallest
/// singular value of the column matrix (a lower bound within a factor
/// `sqrt(m)` of the max-norm quantity).
pub fn independence_measure(vectors: &[HVector]) -> LabResult<Float> {
    if vectors.is_empty() || vectors.iter().any(|v| v.is_zero()) {
        return Err(LabError::ZeroVector);
    }
    let m = CMatrix::from_columns(vectors);
    Ok(singular_values(&m).pop().unwrap())
}

/// `(x0 - z, z - (I+G)^-1 z, (I+G)^-1 y)`: the directions `G z`, `G (I+G)^-2 x0`
/// and `(I+G)^-1 y`.
pub fn change_triple(state: &ExtremalState) -> LabResult<[HVector; 3]> {
    let rz = state.resolve(&state.z)?;
    let ry = state.resolve(&state.y)?;
    Ok([state.candidate(), state.z.sub(&rz), ry])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    /// Constraints on `eps_theta`, the band value and `a_0`.
    Full,
    /// `eps_theta` and band value only, used on the near-dependent path.
    Reduced,
}

impl StepMode {
    pub fn name(&self) -> &'static str {
        match self {
            StepMode::Full => "full",
            StepMode::Reduced => "reduced",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepOptions {
    pub beta: f64,
    pub mode: StepMode,
    /// Independence threshold is `s_min_factor * eps_theta`.
    pub s_min_factor: f64,
    /// Smallest line-search scale is `2^-max_halvings`.
    pub max_halvings: u32,
    /// Per-step band budget `band_budget * beta * eps_theta`.
    pub band_budget: f64,
    /// Reject steps that lose `|a_0|^2 >= 100 sum_{j>=1} |a_j|^2`.
    pub keep_dominance: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            beta: 0.05,
            mode: StepMode::Full,
            s_min_factor: 1e-3,
            max_halvings: 20,
            band_budget: 10.0,
            keep_dominance: true,
        }
    }
}

/// Installed restriction vectors and the witnesses used to build them.
#[derive(Clone, Debug, Default)]
pub struct RestrictionSet {
    pub w_list: Vec<HVector>,
    pub delta1: f64,
    pub delta2: f64,
    pub j1: usize,
    pub j2: usize,
    pub exponents: Vec<f64>,
}

impl RestrictionSet {
    pub fn len(&self) -> usize {
        self.w_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w_list.is_empty()
    }
}

/// Autocorrelation witnesses for `y'`.
#[derive(Clone, Debug)]
pub struct Witnesses {
    pub j1: usize,
    pub j2: usize,
    pub delta1: Float,
    pub delta2: Float,
}

/// `j1` maximizes `|<T^j y', y'>| / ||y'||^2` over `1..=n0`, `j2` over `n0+1..=j_max`.
pub fn autocorrelation_witnesses(t: &OperatorSpec, y_prime: &HVector, n0: usize, j_max: usize) -> LabResult<Witnesses> {
    if y_prime.is_zero() {
        return Err(LabError::ZeroVector);
    }
    if n0 == 0 || j_max <= n0 {
        return Err(LabError::Precondition(format!("need 1 <= n0 < j_max, got n0={n0} j_max={j_max}")));
    }
    let prec = y_prime.prec();
    let c = autocorrelation(t, y_prime, j_max);
    let n2 = y_prime.norm_sqr();
    let rel: Vec<Float> = c.iter().map(|cj| Float::with_val(prec, cj.abs() / &n2)).collect();
    let argmax = |lo: usize, hi: usize| {
        let mut best = lo;
        for j in lo..=hi {
            if rel[j] > rel[best] {
                best = j;
            }
        }
        best
    };
    let j1 = argmax(1, n0);
    let j2 = argmax(n0 + 1, j_max);
    Ok(Witnesses {
        j1,
        j2,
        delta1: rel[j1].clone(),
        delta2: rel[j2].clone(),
    })
}

/// `w = y' + delta2^p (T*^j1 y' + T*^j2 y')`.
pub fn build_restriction(t: &OperatorSpec, y_prime: &HVector, delta2: &Float, j1: usize, j2: usize, p: f64) -> HVector {
    let prec = y_prime.prec();
    let coef = Float::with_val(prec, delta2.pow(&Float::with_val(prec, p)));
    let mut w = y_prime.clone();
    if coef.is_zero() {
        return w;
    }
    w.axpy_real(&coef, &t.apply_pow(y_prime, j1, true));
    w.axpy_real(&coef, &t.apply_pow(y_prime, j2, true));
    w
}

/// Outcome of the two-column least-squares fit `A u1 + B u2 ~ u3`.
#[derive(Clone, Debug)]
pub struct FallbackReport {
    pub a: Cx,
    pub b: Cx,
    pub residual: Float,
    pub threshold: Float,
    /// `|B| (eps_theta)^(1/2)`
    pub b_scaled: Float,
    pub b_in_window: bool,
    /// `||A G (x0 - z)||`
    pub a_term: Float,
}

/// Least squares `A G z + B G (I+G)^-2 x0 ~ (I+G)^-1 y`; succeeds only when the
/// residual is at most `(eps_theta)^p_fallback`.
pub fn fallback_ab_solve(state: &ExtremalState, ctx: &PrecisionCtx) -> LabResult<FallbackReport> {
    let prec = state.prec();
    let [u1, u2, u3] = change_triple(state)?;
    let n1 = u1.norm();
    if n1.is_zero() {
        return Err(LabError::ZeroVector);
    }
    let q1 = u1.scale_real(&(Float::with_val(prec, 1) / &n1));
    let r12 = u2.inner(&q1);
    let mut w = u2.clone();
    w.axpy(&(-&r12), &q1);
    let nw = w.norm();
    let c1 = u3.inner(&q1);
    let mut fit = q1.scale(&c1);
    let b = if nw > Float::with_val(prec, u2.norm() * ctx.unit_eps()) {
        let q2 = w.scale_real(&(Float::with_val(prec, 1) / &nw));
        let c2 = u3.inner(&q2);
        fit.axpy(&c2, &q2);
        c2.scale(&(Float::with_val(prec, 1) / &nw))
    } else {
        Cx::zero(prec)
    };
    let a = (&c1 - &(&r12 * &b)).scale(&(Float::with_val(prec, 1) / &n1));
    let residual = u3.sub(&fit).norm();
    let threshold = Float::with_val(prec, (&state.eps_theta).pow(&Float::with_val(prec, ctx.exponents.p_fallback)));
    if residual > threshold {
        return Err(LabError::NotDegenerate {
            residual: residual.to_f64(),
            threshold: threshold.to_f64(),
        });
    }
    let b_scaled = b.abs() * Float::with_val(prec, state.eps_theta.sqrt_ref());
    let b_in_window = b_scaled > 0.01 && b_scaled < 10u32;
    let a_term = Float::with_val(prec, a.abs() * gram_apply(&state.basis, &u1).norm());
    Ok(FallbackReport {
        a,
        b,
        residual,
        threshold,
        b_scaled,
        b_in_window,
        a_term,
    })
}

/// Minimal-norm real solution of `rows * x = targets`, dropping rows whose
/// orthogonal part falls below `tol` relative to their norm and checking
/// that dropped rows are consistent. Returns the solution and the number of
/// dropped rows.
pub fn min_norm_solve(rows: &[Vec<Float>], targets: &[Float], tol: &Float) -> LabResult<(Vec<Float>, usize)> {
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    let prec = tol.prec();
    let dot = |x: &[Float], y: &[Float]| {
        let mut s = Float::new(prec);
        for (a, b) in x.iter().zip(y) {
            s += Float::with_val(prec, a * b);
        }
        s
    };
    let mut q: Vec<Vec<Float>> = Vec::new();
    let mut qt: Vec<Float> = Vec::new();
    let mut dropped: Vec<usize> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let rn = dot(row, row).sqrt();
        let mut v = row.clone();
        let mut t = targets[i].clone();
        for _pass in 0..2 {
            for (qk, tk) in q.iter().zip(&qt) {
                let c = dot(&v, qk);
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= Float::with_val(prec, &c * qi);
                }
                t -= Float::with_val(prec, &c * tk);
            }
        }
        let vn = dot(&v, &v).sqrt();
        if rn.is_zero() || vn <= Float::with_val(prec, &rn * tol) {
            dropped.push(i);
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= &vn;
        }
        t /= &vn;
        q.push(v);
        qt.push(t);
    }
    let mut x = vec![Float::new(prec); n];
    for (qk, tk) in q.iter().zip(&qt) {
        for (xi, qi) in x.iter_mut().zip(qk) {
            *xi += Float::with_val(prec, tk * qi);
        }
    }
    let xn = dot(&x, &x).sqrt();
    for &i in &dropped {
        let got = dot(&rows[i], &x);
        let miss = Float::with_val(prec, &got - &targets[i]).abs();
        let rn = dot(&rows[i], &rows[i]).sqrt();
        let scale = Float::with_val(prec, targets[i].abs_ref()) + Float::with_val(prec, &rn * &xn);
        if miss > Float::with_val(prec, &scale * tol) {
            return Err(LabError::Degenerate {
                measure: Float::with_val(prec, &miss / &scale).to_f64(),
                threshold: tol.to_f64(),
            });
        }
    }
    Ok((x, dropped.len()))
}

/// One accepted step of the construction.
#[derive(Clone, Debug)]
pub struct McStep {
    pub r: CoeffSeq,
    pub beta: f64,
    pub scale: f64,
    pub mode: StepMode,
    /// First-order changes at the applied scale.
    pub predicted: Prediction,
    pub actual: Prediction,
    pub state: ExtremalState,
    /// `band_budget * beta * eps_theta - |actual band change|`
    pub band_slack: Float,
    /// `eps_theta (1 - beta s) - new eps_theta`
    pub decrease_slack: Float,
    /// `1 - (eps_theta)^p_lower / 2 - |a_0|^2 / eps_theta` after the step
    pub dominance_slack: Float,
    /// Largest `|<ch z, w>| / (||ch z|| ||w||)` over installed restrictions.
    pub restriction_residual: Float,
    pub dropped_rows: usize,
}

fn push_form(rows: &mut Vec<Vec<Float>>, targets: &mut Vec<Float>, f: &LinearForm, real: &Float, imag: Option<&Float>) {
    rows.push(f.real_row());
    targets.push(real.clone());
    if let Some(im) = imag {
        rows.push(f.imag_row());
        targets.push(im.clone());
    }
}

/// Minimal-norm `r` meeting the first-order constraints, then a halving line
/// search on the recomputed state.
pub fn select_step(
    t: &OperatorSpec,
    state: &ExtremalState,
    restrictions: &RestrictionSet,
    opts: &StepOptions,
    ctx: &PrecisionCtx,
) -> LabResult<McStep> {
    let prec = state.prec();
    let len = state.a.len();
    let zero_pred = || Prediction {
        band: Float::new(prec),
        eps_theta: Float::new(prec),
        a0: Float::new(prec),
    };
    if opts.beta == 0.0 {
        return Ok(McStep {
            r: CoeffSeq::zeros(len, prec),
            beta: 0.0,
            scale: 1.0,
            mode: opts.mode,
            predicted: zero_pred(),
            actual: zero_pred(),
            state: state.clone(),
            band_slack: Float::new(prec),
            decrease_slack: Float::new(prec),
            dominance_slack: dominance_slack(state, ctx),
            restriction_residual: Float::new(prec),
            dropped_rows: 0,
        });
    }
    if opts.mode == StepMode::Full {
        let s = independence_measure(&change_triple(state)?)?;
        let thr = Float::with_val(prec, &state.eps_theta * opts.s_min_factor);
        if s < thr {
            return Err(LabError::Degenerate {
                measure: s.to_f64(),
                threshold: thr.to_f64(),
            });
        }
    }

    let f = ChangeFunctionals::from_state(state);
    let beta = Float::with_val(prec, opts.beta);
    let zero = Float::new(prec);
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let et_target = Float::with_val(prec, &state.eps_theta * &beta) * -2i32;
    push_form(&mut rows, &mut targets, &f.eps_theta_form(), &et_target, None);
    push_form(&mut rows, &mut targets, &f.band_form(), &zero, None);
    if opts.mode == StepMode::Full {
        let a0_target = -Float::with_val(prec, &state.a[0].re * &beta);
        push_form(&mut rows, &mut targets, &f.a0_form(), &a0_target, None);
    }
    for w in &restrictions.w_list {
        let omega = restriction_sequence(state, w)?;
        push_form(&mut rows, &mut targets, &f.restriction_form(&omega), &zero, Some(&zero));
    }
    let (x, dropped_rows) = min_norm_solve(&rows, &targets, &ctx.rank_tol())?;
    let r: Vec<Cx> = (0..len).map(|j| Cx::new(x[j].clone(), x[len + j].clone())).collect();

    let mut restriction_residual = Float::new(prec);
    if !restrictions.is_empty() {
        let ch = linear_change_z(state, &r)?;
        let chn = ch.norm();
        for w in &restrictions.w_list {
            let den = Float::with_val(prec, &chn * &w.norm());
            if !den.is_zero() {
                let v = Float::with_val(prec, ch.inner(w).abs() / &den);
                if v > restriction_residual {
                    restriction_residual = v;
                }
            }
        }
    }

    let p1 = f.predict(&r);
    let dir = state.basis.combine(&r);
    let old_a0 = state.a[0].re.clone();
    let budget = Float::with_val(prec, &state.eps_theta * &beta) * opts.band_budget;
    let (lo, hi) = ctx.band;
    let mut s = 1.0f64;
    for _ in 0..=opts.max_halvings {
        let sf = Float::with_val(prec, s);
        let mut y = state.y.clone();
        y.axpy_real(&sf, &dir);
        if let Ok(next) = solve_extremal(t, &y, &state.x0, ctx) {
            let need = Float::with_val(prec, &state.eps_theta * (Float::with_val(prec, 1) - Float::with_val(prec, &beta * &sf)));
            let decrease_slack = Float::with_val(prec, &need - &next.eps_theta);
            let band = next.band_value();
            let db = Float::with_val(prec, &band - &state.band_value());
            let band_slack = Float::with_val(prec, &budget - db.clone().abs());
            let dom = dominance_slack(&next, ctx);
            let ok = !decrease_slack.is_sign_negative()
                && !band_slack.is_sign_negative()
                && band > lo
                && band < hi
                && dom.is_sign_positive()
                && !dom.is_zero()
                && (!opts.keep_dominance || !state.is_dominant() || next.is_dominant());
            if ok {
                let new_a0 = (&next.phase * &next.a[0]).re;
                let actual = Prediction {
                    band: db,
                    eps_theta: Float::with_val(prec, &next.eps_theta - &state.eps_theta),
                    a0: Float::with_val(prec, &new_a0 - &old_a0),
                };
                let predicted = Prediction {
                    band: Float::with_val(prec, &p1.band * &sf),
                    eps_theta: Float::with_val(prec, &p1.eps_theta * &sf),
                    a0: Float::with_val(prec, &p1.a0 * &sf),
                };
                return Ok(McStep {
                    r: CoeffSeq::new(r.iter().map(|c| c.scale(&sf)).collect()),
                    beta: opts.beta,
                    scale: s,
                    mode: opts.mode,
                    predicted,
                    actual,
                    state: next,
                    band_slack,
                    decrease_slack,
                    dominance_slack: dom,
                    restriction_residual,
                    dropped_rows,
                });
            }
        }
        s *= 0.5;
    }
    Err(LabError::LineSearchFail)
}

/// `1 - (eps_theta)^p_lower / 2 - |a_0|^2 / eps_theta`.
pub fn dominance_slack(state: &ExtremalState, ctx: &PrecisionCtx) -> Float {
    let prec = state.prec();
    let p = Float::with_val(prec, ctx.exponents.p_lower);
    let cap = Float::with_val(prec, 1) - Float::with_val(prec, (&state.eps_theta).pow(&p)) / 2u32;
    cap - state.a0_ratio()
}
