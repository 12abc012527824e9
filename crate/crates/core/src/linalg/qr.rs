use rug::Float;

use super::vector::HVector;

/// Orthonormal basis built by modified Gram-Schmidt with one
/// reorthogonalization pass.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    pub q: Vec<HVector>,
    /// Indices of the input vectors that were judged dependent.
    pub dependent: Vec<usize>,
}

impl OrthoBasis {
    pub fn rank(&self) -> usize {
        self.q.len()
    }

    /// `x - Q Q* x`.
    pub fn project_out(&self, x: &HVector) -> HVector {
        project_out(&self.q, x)
    }

    /// `Q Q* x`.
    pub fn project(&self, x: &HVector) -> HVector {
        x.sub(&self.project_out(x))
    }
}

pub fn project_out(q: &[HVector], x: &HVector) -> HVector {
    let mut w = x.clone();
    for _pass in 0..2 {
        for qi in q {
            let c = w.inner(qi);
            w.axpy(&(-&c), qi);
        }
    }
    w
}

/// A vector is kept when its component orthogonal to the previous ones
/// exceeds `rel_tol` times its own norm.
pub fn orthonormalize(vecs: &[HVector], rel_tol: &Float) -> OrthoBasis {
    let mut q: Vec<HVector> = Vec::new();
    let mut dependent = Vec::new();
    for (k, v) in vecs.iter().enumerate() {
        let vn = v.norm();
        if vn.is_zero() {
            dependent.push(k);
            continue;
        }
        let w = project_out(&q, v);
        let wn = w.norm();
        if wn <= Float::with_val(v.prec(), &vn * rel_tol) {
            dependent.push(k);
            continue;
        }
        let inv = Float::with_val(v.prec(), 1) / &wn;
        q.push(w.scale_real(&inv));
    }
    OrthoBasis { q, dependent }
}

/// Leading run of independent vectors: stops at the first dependent one.
pub fn orthonormalize_prefix(vecs: &[HVector], rel_tol: &Float) -> OrthoBasis {
    let mut q: Vec<HVector> = Vec::new();
    for (k, v) in vecs.iter().enumerate() {
        let vn = v.norm();
        let w = project_out(&q, v);
        let wn = w.norm();
        if vn.is_zero() || wn <= Float::with_val(v.prec(), &vn * rel_tol) {
            return OrthoBasis {
                q,
                dependent: (k..vecs.len()).collect(),
            };
        }
        let inv = Float::with_val(v.prec(), 1) / &wn;
        q.push(w.scale_real(&inv));
    }
    OrthoBasis { q, dependent: vec![] }
}
