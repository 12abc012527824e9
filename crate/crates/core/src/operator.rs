//! Operators, Krylov bases and the Gram map `x -> sum <x, T^j y> T^j y`.

use rug::Float;

use crate::error::{LabError, LabResult};
use crate::linalg::{sigma_max, singular_values, CMatrix, HVector};
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    Dense(CMatrix),
    /// `e_n -> w_n e_{n+1}` for `n < dim - 1`; the last basis vector maps to zero.
    WeightedShift(Vec<Cx>),
    Diagonal(Vec<Cx>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    /// Product of all scale factors applied since construction.
    pub norm_scale: Float,
}

impl OperatorSpec {
    pub fn dense(m: CMatrix) -> LabResult<OperatorSpec> {
        if m.rows() != m.cols() {
            return Err(LabError::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Err(LabError::Precondition("empty matrix".into()));
        }
        let prec = m.prec();
        Ok(OperatorSpec {
            kind: OperatorKind::Dense(m),
            norm_scale: Float::with_val(prec, 1),
        })
    }

    /// Shift on `C^(weights.len() + 1)`.
    pub fn weighted_shift(weights: Vec<Cx>) -> LabResult<OperatorSpec> {
        if weights.is_empty() {
            return Err(LabError::Precondition("shift needs at least one weight".into()));
        }
        let prec = weights[0].prec();
        Ok(OperatorSpec {
            kind: OperatorKind::WeightedShift(weights),
            norm_scale: Float::with_val(prec, 1),
        })
    }

    pub fn diagonal(entries: Vec<Cx>) -> LabResult<OperatorSpec> {
        if entries.is_empty() {
            return Err(LabError::Precondition("empty diagonal".into()));
        }
        let prec = entries[0].prec();
        Ok(OperatorSpec {
            kind: OperatorKind::Diagonal(entries),
            norm_scale: Float::with_val(prec, 1),
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            OperatorKind::Dense(m) => m.rows(),
            OperatorKind::WeightedShift(w) => w.len() + 1,
            OperatorKind::Diagonal(d) => d.len(),
        }
    }

    pub fn prec(&self) -> u32 {
        self.norm_scale.prec()
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            OperatorKind::Dense(_) => "dense",
            OperatorKind::WeightedShift(_) => "weighted_shift",
            OperatorKind::Diagonal(_) => "diagonal",
        }
    }

    /// Re-round every entry to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> OperatorSpec {
        let kind = match &self.kind {
            OperatorKind::Dense(m) => OperatorKind::Dense(m.with_prec(prec)),
            OperatorKind::WeightedShift(w) => {
                OperatorKind::WeightedShift(w.iter().map(|c| c.with_prec(prec)).collect())
            }
            OperatorKind::Diagonal(d) => {
                OperatorKind::Diagonal(d.iter().map(|c| c.with_prec(prec)).collect())
            }
        };
        OperatorSpec {
            kind,
            norm_scale: Float::with_val(prec, &self.norm_scale),
        }
    }

    /// `T v`, or `T* v` when `adjoint`.
    pub fn apply(&self, v: &HVector, adjoint: bool) -> HVector {
        debug_assert_eq!(v.dim(), self.dim());
        match &self.kind {
            OperatorKind::Dense(m) => {
                if adjoint {
                    m.adjoint_mul_vec(v)
                } else {
                    m.mul_vec(v)
                }
            }
            OperatorKind::WeightedShift(w) => {
                let n = w.len() + 1;
                let prec = v.prec();
                let mut out = vec![Cx::zero(prec); n];
                if adjoint {
                    for (k, wk) in w.iter().enumerate() {
                        out[k] = v.get(k + 1).mul_conj(wk);
                    }
                } else {
                    for (k, wk) in w.iter().enumerate() {
                        out[k + 1] = wk * v.get(k);
                    }
                }
                HVector::from_coords(out)
            }
            OperatorKind::Diagonal(d) => HVector::from_coords(
                d.iter()
                    .zip(v.coords())
                    .map(|(l, x)| if adjoint { x.mul_conj(l) } else { l * x })
                    .collect(),
            ),
        }
    }

    /// `T^k v`.
    pub fn apply_pow(&self, v: &HVector, k: usize, adjoint: bool) -> HVector {
        let mut w = v.clone();
        for _ in 0..k {
            w = self.apply(&w, adjoint);
        }
        w
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.dim();
        let prec = self.prec();
        match &self.kind {
            OperatorKind::Dense(m) => m.clone(),
            OperatorKind::WeightedShift(w) => {
                let mut m = CMatrix::zeros(n, n, prec);
                for (k, wk) in w.iter().enumerate() {
                    m.set(k + 1, k, wk.clone());
                }
                m
            }
            OperatorKind::Diagonal(d) => {
                let mut m = CMatrix::zeros(n, n, prec);
                for (k, l) in d.iter().enumerate() {
                    m.set(k, k, l.clone());
                }
                m
            }
        }
    }

    pub fn op_norm(&self) -> Float {
        match &self.kind {
            OperatorKind::Dense(m) => sigma_max(m),
            OperatorKind::WeightedShift(w) | OperatorKind::Diagonal(w) => max_abs(w),
        }
    }

    fn scaled(&self, s: &Float) -> OperatorSpec {
        let kind = match &self.kind {
            OperatorKind::Dense(m) => OperatorKind::Dense(m.scale_real(s)),
            OperatorKind::WeightedShift(w) => {
                OperatorKind::WeightedShift(w.iter().map(|c| c.scale(s)).collect())
            }
            OperatorKind::Diagonal(d) => {
                OperatorKind::Diagonal(d.iter().map(|c| c.scale(s)).collect())
            }
        };
        OperatorSpec {
            kind,
            norm_scale: Float::with_val(self.prec(), &self.norm_scale * s),
        }
    }
}

fn max_abs(v: &[Cx]) -> Float {
    let mut m = Float::new(v[0].prec());
    for c in v {
        let a = c.abs();
        if a > m {
            m = a;
        }
    }
    m
}

/// Scale so that `||T|| = 1/K`, after checking the operator is nonzero and injective.
///
/// For the shift kind only the weights are checked: the last basis vector is
/// annihilated by construction of the finite section.
pub fn normalize_operator(raw: &OperatorSpec, ctx: &PrecisionCtx) -> LabResult<OperatorSpec> {
    ctx.validate()?;
    let t = raw.with_prec(ctx.prec());
    let prec = ctx.prec();
    let norm = match &t.kind {
        OperatorKind::Dense(m) => {
            if m.is_zero() {
                return Err(LabError::ZeroOperator);
            }
            let sv = singular_values(m);
            let smax = sv[0].clone();
            let smin = sv.last().unwrap().clone();
            let floor = Float::with_val(prec, &smax * m.rows() as u32) >> (prec.saturating_sub(8));
            if smin <= floor {
                return Err(LabError::NonInjective {
                    sigma_min: smin.to_f64(),
                });
            }
            smax
        }
        OperatorKind::WeightedShift(w) | OperatorKind::Diagonal(w) => {
            if w.iter().all(|c| c.is_zero()) {
                return Err(LabError::ZeroOperator);
            }
            if w.iter().any(|c| c.is_zero()) {
                return Err(LabError::NonInjective { sigma_min: 0.0 });
            }
            max_abs(w)
        }
    };
    let target = Float::with_val(prec, 1) / ctx.k();
    let factor = Float::with_val(prec, &target / &norm);
    Ok(t.scaled(&factor))
}

/// `T^0 y, ..., T^J y` with the tail bound `||T^(J+1) y||`.
#[derive(Clone, Debug)]
pub struct KrylovBasis {
    pub vectors: Vec<HVector>,
    pub tail_bound: Float,
}

impl KrylovBasis {
    pub fn degree(&self) -> usize {
        self.vectors.len() - 1
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn y(&self) -> &HVector {
        &self.vectors[0]
    }

    /// Every vector multiplied by the same scalar.
    pub fn scaled(&self, c: &Cx) -> KrylovBasis {
        KrylovBasis {
            vectors: self.vectors.iter().map(|v| v.scale(c)).collect(),
            tail_bound: Float::with_val(self.tail_bound.prec(), &self.tail_bound * &c.abs()),
        }
    }

    /// `V* x`, i.e. `(<x, T^j y>)_j`.
    pub fn pairings(&self, x: &HVector) -> Vec<Cx> {
        self.vectors.iter().map(|v| x.inner(v)).collect()
    }

    /// `V c = sum c_j T^j y`.
    pub fn combine(&self, c: &[Cx]) -> HVector {
        crate::linalg::combine(c, &self.vectors)
    }

    /// Dense `N x N` Gram operator `V V*`.
    pub fn gram_matrix(&self) -> CMatrix {
        let n = self.vectors[0].dim();
        let mut g = CMatrix::zeros(n, n, self.vectors[0].prec());
        for v in &self.vectors {
            g.add_outer(v);
        }
        g
    }

    /// Coefficient-space Gram `V* V`.
    pub fn coefficient_gram(&self) -> CMatrix {
        CMatrix::gram_of(&self.vectors)
    }
}

pub(crate) fn build_krylov(t: &OperatorSpec, y: &HVector, degree: usize) -> KrylovBasis {
    let mut vectors = Vec::with_capacity(degree + 1);
    vectors.push(y.clone());
    for j in 0..degree {
        let next = t.apply(&vectors[j], false);
        vectors.push(next);
    }
    let tail_bound = t.apply(&vectors[degree], false).norm();
    KrylovBasis {
        vectors,
        tail_bound,
    }
}

pub fn krylov_basis(t: &OperatorSpec, y: &HVector, ctx: &PrecisionCtx) -> LabResult<KrylovBasis> {
    y.check_dim(t.dim())?;
    if y.is_zero() {
        return Err(LabError::ZeroVector);
    }
    Ok(build_krylov(t, y, ctx.krylov_degree(t.dim())))
}

/// `x -> sum_j <x, T^j y> T^j y` over the basis.
pub fn gram_apply(basis: &KrylovBasis, x: &HVector) -> HVector {
    let c = basis.pairings(x);
    basis.combine(&c)
}

/// `c_j = <T^j y, y>` for `j = 0..=j_max`.
pub fn autocorrelation(t: &OperatorSpec, y: &HVector, j_max: usize) -> Vec<Cx> {
    let mut out = Vec::with_capacity(j_max + 1);
    let mut w = y.clone();
    for j in 0..=j_max {
        if j > 0 {
            w = t.apply(&w, false);
        }
        out.push(w.inner(y));
    }
    out
}

/// Polynomial coefficients `l_0, ..., l_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffSeq {
    pub coeffs: Vec<Cx>,
    pub two_norm: Float,
}

impl CoeffSeq {
    pub fn new(coeffs: Vec<Cx>) -> CoeffSeq {
        let prec = coeffs.first().map(|c| c.prec()).unwrap_or(64);
        let mut s = Float::new(prec);
        for c in &coeffs {
            s += c.norm_sqr();
        }
        CoeffSeq {
            coeffs,
            two_norm: s.sqrt(),
        }
    }

    pub fn zeros(len: usize, prec: u32) -> CoeffSeq {
        CoeffSeq::new(vec![Cx::zero(prec); len])
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `l(T) y`.
    pub fn eval(&self, t: &OperatorSpec, y: &HVector) -> HVector {
        let mut out = HVector::zeros(y.dim(), y.prec());
        let mut w = y.clone();
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                w = t.apply(&w, false);
            }
            out.axpy(c, &w);
        }
        out
    }

    pub fn scale(&self, s: &Cx) -> CoeffSeq {
        CoeffSeq::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn dist(&self, o: &CoeffSeq) -> Float {
        let n = self.len().max(o.len());
        let prec = self.two_norm.prec();
        let z = Cx::zero(prec);
        let mut s = Float::new(prec);
        for k in 0..n {
            let a = self.coeffs.get(k).unwrap_or(&z);
            let b = o.coeffs.get(k).unwrap_or(&z);
            s += (a - b).norm_sqr();
        }
        s.sqrt()
    }
}
