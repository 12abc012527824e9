//! Operator-class probes: type evidence from autocorrelations, the
//! feasibility threshold search, the shift phenomenon and the tail-average
//! extraction surrogate.

use rand::Rng;
use rug::Float;

use crate::error::{LabError, LabResult};
use crate::generators::{rng, unit_vector};
use crate::linalg::{CMatrix, HVector};
use crate::operator::{autocorrelation, OperatorSpec};
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;
use crate::solver::calibrate_scale;

/// Lower bound on `<y/||y||, u0>` for admissible probes.
pub const PROBE_FLOOR: f64 = 0.01;

/// `<y/||y||, u0>` when it is real to `half_eps`, else `None`.
fn u0_pairing(y: &HVector, u0: &HVector, ctx: &PrecisionCtx) -> Option<Float> {
    let n = y.norm();
    if n.is_zero() {
        return None;
    }
    let p = y.inner(u0);
    let im = Float::with_val(ctx.prec(), p.im.abs_ref()) / &n;
    if im > ctx.half_eps() {
        return None;
    }
    Some(Float::with_val(ctx.prec(), &p.re / &n))
}

pub fn is_admissible(y: &HVector, u0: &HVector, ctx: &PrecisionCtx) -> bool {
    u0_pairing(y, u0, ctx).map(|p| p >= PROBE_FLOOR).unwrap_or(false)
}

/// Seeded random unit vectors rotated so the `u0` pairing is real, lifted to
/// at least `2 * PROBE_FLOOR` when short, plus the admissible basis vectors.
pub fn default_probes(u0: &HVector, count: usize, seed: u64, ctx: &PrecisionCtx) -> Vec<HVector> {
    let prec = ctx.prec();
    let dim = u0.dim();
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count + dim);
    for _ in 0..count {
        let v = unit_vector(&mut r, dim, prec);
        let p = v.inner(u0);
        let v = if p.is_zero() { v } else { v.scale(&p.phase().conj()) };
        let c = v.inner(u0).re;
        if c >= 2.0 * PROBE_FLOOR {
            out.push(v);
            continue;
        }
        let mut w = v.clone();
        w.axpy(&(-&v.inner(u0)), u0);
        let alpha: f64 = 2.0 * PROBE_FLOOR + 0.1 * r.gen::<f64>();
        let wn = w.norm();
        let mut y = u0.scale_real(&Float::with_val(prec, alpha));
        if !wn.is_zero() {
            let s = Float::with_val(prec, 1.0 - alpha * alpha).sqrt() / &wn;
            y.axpy_real(&s, &w);
        }
        out.push(y);
    }
    for k in 0..dim {
        let e = HVector::basis(dim, k, prec);
        if is_admissible(&e, u0, ctx) {
            out.push(e);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeVerdict {
    /// Every `delta_n` stays above the floor.
    Type1Evidence,
    /// Smallest `m` with some probe whose autocorrelations beyond `m` fall
    /// below the floor, with the indices of those probes.
    Type2Evidence { m: usize, witnesses: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct TypeProbe {
    pub u0: HVector,
    pub probes: Vec<HVector>,
    /// `(n, delta_n)` with `delta_n = inf_probes sup_{j>=n} |c_j| / ||y||^2`.
    pub delta_table: Vec<(usize, Float)>,
    pub floor: Float,
    pub verdict: TypeVerdict,
}

/// Type evidence over a finite probe set, with autocorrelations up to
/// `n_max + J`. `floor` defaults to `2^(-bits/2)`.
pub fn classify_type(
    t: &OperatorSpec,
    u0: &HVector,
    probes: &[HVector],
    n_max: usize,
    floor: Option<f64>,
    ctx: &PrecisionCtx,
) -> LabResult<TypeProbe> {
    if probes.is_empty() {
        return Err(LabError::EmptyProbeSet);
    }
    let prec = ctx.prec();
    for (i, p) in probes.iter().enumerate() {
        p.check_dim(t.dim())?;
        if !is_admissible(p, u0, ctx) {
            return Err(LabError::Precondition(format!("probe {i} violates the u0 pairing floor")));
        }
    }
    let floor = floor.map(|f| Float::with_val(prec, f)).unwrap_or_else(|| ctx.half_eps());
    let j_max = n_max + ctx.krylov_degree(t.dim()).max(1);
    // tails[i][n] = sup_{n<=j<=j_max} |c_j| / ||y||^2
    let tails: Vec<Vec<Float>> = probes
        .iter()
        .map(|p| {
            let c = autocorrelation(t, p, j_max);
            let n2 = p.norm_sqr();
            let mut tail = vec![Float::new(prec); j_max + 2];
            for j in (0..=j_max).rev() {
                let v = Float::with_val(prec, c[j].abs() / &n2);
                tail[j] = if v > tail[j + 1] { v } else { tail[j + 1].clone() };
            }
            tail
        })
        .collect();
    let delta_table = (1..=n_max)
        .map(|n| {
            let inf = tails.iter().map(|t| t[n].clone()).min_by(|a, b| a.partial_cmp(b).unwrap()).unwrap();
            (n, inf)
        })
        .collect();
    let mut verdict = TypeVerdict::Type1Evidence;
    for m in 1..=j_max {
        let witnesses: Vec<usize> = tails
            .iter()
            .enumerate()
            .filter(|(_, t)| t[m] <= floor)
            .map(|(i, _)| i)
            .collect();
        if !witnesses.is_empty() {
            verdict = TypeVerdict::Type2Evidence { m, witnesses };
            break;
        }
    }
    Ok(TypeProbe {
        u0: u0.clone(),
        probes: probes.to_vec(),
        delta_table,
        floor,
        verdict,
    })
}

/// Index of the candidate with the smallest `||T* u||`, and that norm.
pub fn select_u1(t: &OperatorSpec, candidates: &[HVector]) -> LabResult<(usize, Float)> {
    let mut best: Option<(usize, Float)> = None;
    for (i, u) in candidates.iter().enumerate() {
        let n = t.apply(u, true).norm();
        if best.as_ref().map(|b| n < b.1).unwrap_or(true) {
            best = Some((i, n));
        }
    }
    best.ok_or(LabError::EmptyProbeSet)
}

#[derive(Clone, Debug)]
pub struct FeasibilityOptions {
    /// `L0` is the first grid value with `M(L) > blowup * M(0)`.
    pub blowup: f64,
    /// Target distance; defaults to the lower band edge.
    pub eps_target: Option<f64>,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        FeasibilityOptions {
            blowup: 100.0,
            eps_target: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FeasibilityProfile {
    pub y0: HVector,
    pub s_family: Vec<HVector>,
    pub l_grid: Vec<f64>,
    /// `per_n[k][n]`: minimal `||l||_2` at `l_grid[k]` for `s_n`, `None` when unattainable.
    pub per_n: Vec<Vec<Option<Float>>>,
    /// `sup_n` of `per_n`, `None` meaning infinite.
    pub m_of_l: Vec<Option<Float>>,
    pub l0_estimate: Option<f64>,
    pub monotone: bool,
    /// Largest ratio of the distance change between grid neighbours to
    /// `|dL| D ||l_n||_2`.
    pub perturbation_ratio: f64,
}

fn sup_opt(v: &[Option<Float>]) -> Option<Float> {
    let mut best: Option<Float> = None;
    for x in v {
        match x {
            None => return None,
            Some(x) => {
                if best.as_ref().map(|b| x > b).unwrap_or(true) {
                    best = Some(x.clone());
                }
            }
        }
    }
    best
}

/// `M(L) = sup_n min ||l||_2` with `||l(T)(y0 + L s_n) - x0|| <= eps_target`.
pub fn feasibility_profile(
    t: &OperatorSpec,
    x0: &HVector,
    y0: &HVector,
    s_family: &[HVector],
    l_grid: &[f64],
    opts: &FeasibilityOptions,
    ctx: &PrecisionCtx,
) -> LabResult<FeasibilityProfile> {
    if s_family.is_empty() {
        return Err(LabError::EmptyProbeSet);
    }
    let prec = ctx.prec();
    let eps = opts.eps_target.unwrap_or(ctx.band.0);
    let d = s_family.iter().map(|s| s.norm().to_f64()).fold(0.0, f64::max);
    let mut per_n = Vec::with_capacity(l_grid.len());
    let mut ells: Vec<Vec<Option<crate::operator::CoeffSeq>>> = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let mut row = Vec::with_capacity(s_family.len());
        let mut erow = Vec::with_capacity(s_family.len());
        for s in s_family {
            let mut y = y0.clone();
            y.axpy_real(&Float::with_val(prec, l), s);
            match calibrate_scale(t, &y, x0, eps, ctx) {
                Ok(st) => {
                    let ell = st.ell_primed_input();
                    row.push(Some(ell.two_norm.clone()));
                    erow.push(Some(ell));
                }
                Err(LabError::Unattainable { .. }) | Err(LabError::ZeroVector) => {
                    row.push(None);
                    erow.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        per_n.push(row);
        ells.push(erow);
    }
    let m_of_l: Vec<Option<Float>> = per_n.iter().map(|r| sup_opt(r)).collect();
    let mut monotone = true;
    for w in m_of_l.windows(2) {
        match (&w[0], &w[1]) {
            (Some(a), Some(b)) if b < a => monotone = false,
            (None, Some(_)) => monotone = false,
            _ => {}
        }
    }
    let base = m_of_l.first().cloned().flatten();
    let l0_estimate = match &base {
        Some(b) => l_grid.iter().zip(&m_of_l).find_map(|(l, m)| match m {
            None => Some(*l),
            Some(m) if m.to_f64() > opts.blowup * b.to_f64() => Some(*l),
            _ => None,
        }),
        None => None,
    };
    // moving the datum from L to a neighbour L' with the coefficients of L fixed
    let mut ratio: f64 = 0.0;
    for k in 0..l_grid.len().saturating_sub(1) {
        let dl = l_grid[k + 1] - l_grid[k];
        for (n, s) in s_family.iter().enumerate() {
            let Some(ell) = &ells[k][n] else { continue };
            let mut ya = y0.clone();
            ya.axpy_real(&Float::with_val(prec, l_grid[k]), s);
            let mut yb = y0.clone();
            yb.axpy_real(&Float::with_val(prec, l_grid[k + 1]), s);
            let da = ell.eval(t, &ya).sub(x0).norm();
            let db = ell.eval(t, &yb).sub(x0).norm();
            let change = Float::with_val(prec, &db - &da).abs().to_f64();
            let bound = dl.abs() * d * ell.two_norm.to_f64();
            if bound > 0.0 {
                ratio = ratio.max(change / bound);
            }
        }
    }
    Ok(FeasibilityProfile {
        y0: y0.clone(),
        s_family: s_family.to_vec(),
        l_grid: l_grid.to_vec(),
        per_n,
        m_of_l,
        l0_estimate,
        monotone,
        perturbation_ratio: ratio,
    })
}

#[derive(Clone, Debug)]
pub struct ShiftOptions {
    /// Weight on `e_n` in the datum `e_0 + factor e_n`.
    pub factor: f64,
    /// Distance to reach; defaults to the upper band edge.
    pub threshold: Option<f64>,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        ShiftOptions {
            factor: 10.0,
            threshold: None,
        }
    }
}

/// Shift on `C^(n+1)` with the first `n` weights; a zero `1 x 1` operator for `n = 0`.
pub fn truncated_shift(weights: &[Cx], n: usize, prec: u32) -> LabResult<OperatorSpec> {
    if n == 0 {
        return OperatorSpec::dense(CMatrix::zeros(1, 1, prec));
    }
    if weights.len() < n {
        return Err(LabError::DimensionMismatch {
            expected: n,
            found: weights.len(),
        });
    }
    OperatorSpec::weighted_shift(weights[..n].iter().map(|w| w.with_prec(prec)).collect())
}

/// Minimal `||l||_2` with `||l(T)(e_0 + factor e_n) - e_0|| <= threshold`
/// for each `n`, on the shift truncated to `C^(n+1)`. `None` when unattainable.
pub fn shift_phenomenon(
    weights: &[Cx],
    n_range: std::ops::RangeInclusive<usize>,
    opts: &ShiftOptions,
    ctx: &PrecisionCtx,
) -> LabResult<Vec<(usize, Option<Float>)>> {
    let prec = ctx.prec();
    let mut tail = Float::new(prec);
    for w in weights {
        tail += w.norm_sqr();
    }
    if !tail.is_finite() {
        return Err(LabError::Precondition("weights not square-summable".into()));
    }
    let thr = opts.threshold.unwrap_or(ctx.band.1);
    let mut out = Vec::new();
    for n in n_range {
        let t = truncated_shift(weights, n, prec)?;
        let dim = n + 1;
        let mut y = HVector::basis(dim, 0, prec);
        let en = HVector::basis(dim, n, prec);
        y.axpy_real(&Float::with_val(prec, opts.factor), &en);
        let x0 = HVector::basis(dim, 0, prec);
        match calibrate_scale(&t, &y, &x0, thr, ctx) {
            Ok(st) => out.push((n, Some(st.ell_primed_input().two_norm))),
            Err(LabError::Unattainable { .. }) => out.push((n, None)),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Tail average of the sequence and `|<T^j y_inf, x0>|` for `m <= j <= j_max`.
pub fn type2_extract(
    t: &OperatorSpec,
    sequence: &[HVector],
    x0: &HVector,
    m: usize,
    j_max: usize,
) -> LabResult<(HVector, Vec<Float>)> {
    if sequence.is_empty() {
        return Err(LabError::EmptyProbeSet);
    }
    let dim = sequence[0].dim();
    let prec = sequence[0].prec();
    for s in sequence {
        s.check_dim(dim)?;
    }
    let start = sequence.len() / 2;
    let tail = &sequence[start..];
    let mut y = HVector::zeros(dim, prec);
    for s in tail {
        y = y.add(s);
    }
    let y = y.scale_real(&(Float::with_val(prec, 1) / tail.len() as u32));
    let mut v = t.apply_pow(&y, m, false);
    let mut res = Vec::new();
    for _ in m..=j_max {
        res.push(v.inner(x0).abs());
        v = t.apply(&v, false);
    }
    Ok((y, res))
}

/// `<T^j a y, a y> + <T^j s, s>` for a split `y_n / ||y_n|| = a y + s`.
pub fn paired_autocorrelation(t: &OperatorSpec, alpha: &Cx, y: &HVector, s: &HVector, j: usize) -> Cx {
    let ay = y.scale(alpha);
    let u = t.apply_pow(&ay, j, false).inner(&ay);
    let v = t.apply_pow(s, j, false).inner(s);
    &u + &v
}
