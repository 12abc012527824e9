use rug::Float;

use super::matrix::CMatrix;
use super::vector::HVector;
use crate::error::{LabError, LabResult};
use crate::scalar::Cx;

/// `P A Q = L U` with full pivoting. Keeps `A` for residual refinement.
#[derive(Clone, Debug)]
pub struct LuFactor {
    n: usize,
    lu: CMatrix,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    a: CMatrix,
    a_max: Float,
    pivot_max: Float,
    pivot_min: Float,
}

#[derive(Clone, Debug)]
pub struct SolveInfo {
    /// `||b - A x|| / (||A||_max ||x|| + ||b||)` after refinement.
    pub residual_rel: Float,
    pub refinements: usize,
}

impl LuFactor {
    pub fn factor(a: &CMatrix) -> LabResult<LuFactor> {
        let n = a.rows();
        if n != a.cols() {
            return Err(LabError::DimensionMismatch {
                expected: n,
                found: a.cols(),
            });
        }
        let prec = a.prec();
        let a_max = a.max_abs();
        let mut lu = a.clone();
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut pivot_max = Float::new(prec);
        let mut pivot_min = Float::with_val(prec, rug::float::Special::Infinity);
        let tiny = Float::with_val(prec, &a_max * n as u32) >> (prec.saturating_sub(8));
        for k in 0..n {
            let (mut pi, mut pj) = (k, k);
            let mut best = Float::new(prec);
            for i in k..n {
                for j in k..n {
                    let v = lu.get(i, j).norm_sqr();
                    if v > best {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            }
            let piv_abs = best.sqrt();
            if piv_abs.is_zero() || piv_abs <= tiny {
                return Err(LabError::SolveFailure {
                    reason: format!("matrix numerically singular at pivot {k}"),
                });
            }
            if pi != k {
                for j in 0..n {
                    let t = lu.get(k, j).clone();
                    let s = lu.get(pi, j).clone();
                    lu.set(k, j, s);
                    lu.set(pi, j, t);
                }
                row_perm.swap(k, pi);
            }
            if pj != k {
                for i in 0..n {
                    let t = lu.get(i, k).clone();
                    let s = lu.get(i, pj).clone();
                    lu.set(i, k, s);
                    lu.set(i, pj, t);
                }
                col_perm.swap(k, pj);
            }
            if piv_abs > pivot_max {
                pivot_max = piv_abs.clone();
            }
            if piv_abs < pivot_min {
                pivot_min = piv_abs;
            }
            let inv = lu.get(k, k).recip();
            for i in (k + 1)..n {
                let l = lu.get(i, k) * &inv;
                if l.is_zero() {
                    lu.set(i, k, l);
                    continue;
                }
                for j in (k + 1)..n {
                    let ukj = lu.get(k, j).clone();
                    let mut t = lu.get(i, j).clone();
                    t.sub_mul(&l, &ukj);
                    lu.set(i, j, t);
                }
                lu.set(i, k, l);
            }
        }
        Ok(LuFactor {
            n,
            lu,
            row_perm,
            col_perm,
            a: a.clone(),
            a_max,
            pivot_max,
            pivot_min,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    /// Ratio of the extreme pivots: a cheap lower estimate of the condition number.
    pub fn cond_estimate(&self) -> Float {
        Float::with_val(self.a.prec(), &self.pivot_max / &self.pivot_min)
    }

    fn solve_raw(&self, b: &HVector) -> HVector {
        let n = self.n;
        let prec = self.a.prec();
        let mut y: Vec<Cx> = (0..n).map(|k| b.get(self.row_perm[k]).with_prec(prec)).collect();
        for i in 0..n {
            for k in 0..i {
                let yk = y[k].clone();
                y[i].sub_mul(self.lu.get(i, k), &yk);
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let yk = y[k].clone();
                y[i].sub_mul(self.lu.get(i, k), &yk);
            }
            y[i] = y[i].div(self.lu.get(i, i));
        }
        let mut x = vec![Cx::zero(prec); n];
        for k in 0..n {
            x[self.col_perm[k]] = y[k].clone();
        }
        HVector::from_coords(x)
    }

    /// Residual `b - A x` evaluated at doubled precision.
    fn residual(&self, b: &HVector, x: &HVector) -> HVector {
        let hp = self.a.prec() * 2;
        let mut r = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut acc = b.get(i).with_prec(hp);
            for j in 0..self.n {
                let aij = self.a.get(i, j).with_prec(hp);
                acc.sub_mul(&aij, &x.get(j).with_prec(hp));
            }
            r.push(acc);
        }
        HVector::from_coords(r)
    }

    /// Solve `A x = b`, refining while the relative residual exceeds the
    /// working unit roundoff; fails if it stays above `2^(-bits/2)`.
    pub fn solve(&self, b: &HVector) -> LabResult<(HVector, SolveInfo)> {
        b.check_dim(self.n)?;
        let prec = self.a.prec();
        let mut x = self.solve_raw(b);
        let bn = b.norm();
        let refine_tol = Float::with_val(prec, 1) >> (prec.saturating_sub(8));
        let accept_tol = Float::with_val(prec, 1) >> (prec / 2);
        let mut refinements = 0;
        let mut rel;
        loop {
            let r = self.residual(b, &x);
            let denom = Float::with_val(prec, &self.a_max * &x.norm()) + &bn;
            rel = if denom.is_zero() {
                Float::new(prec)
            } else {
                Float::with_val(prec, r.norm() / &denom)
            };
            if rel <= refine_tol || refinements >= 6 {
                break;
            }
            let d = self.solve_raw(&r.with_prec(prec));
            x = x.add(&d);
            refinements += 1;
        }
        if !x.coords().iter().all(|c| c.is_finite()) || rel > accept_tol {
            return Err(LabError::SolveFailure {
                reason: format!("relative residual {:e} after refinement", rel.to_f64()),
            });
        }
        Ok((
            x,
            SolveInfo {
                residual_rel: rel,
                refinements,
            },
        ))
    }

    pub fn solve_vec(&self, b: &HVector) -> LabResult<HVector> {
        self.solve(b).map(|(x, _)| x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize, prec: u32) -> CMatrix {
        let mut m = CMatrix::zeros(n, n, prec);
        for i in 0..n {
            for j in 0..n {
                let v = Float::with_val(prec, 1) / ((i + j + 1) as u32);
                m.set(i, j, Cx::from_real(v));
            }
        }
        m
    }

    #[test]
    fn solves_ill_conditioned_hilbert() {
        let prec = 256;
        let n = 10;
        let h = hilbert(n, prec);
        let x_true = HVector::from_f64(prec, &vec![1.0; n], &vec![-0.5; n]);
        let b = h.mul_vec(&x_true);
        let lu = LuFactor::factor(&h).unwrap();
        let (x, _) = lu.solve(&b).unwrap();
        assert!(x.dist(&x_true) < 1e-50);
        assert!(lu.cond_estimate() > 1e6);
    }

    #[test]
    fn singular_is_reported() {
        let prec = 128;
        let mut m = CMatrix::zeros(2, 2, prec);
        m.set(0, 0, Cx::one(prec));
        m.set(0, 1, Cx::one(prec));
        m.set(1, 0, Cx::one(prec));
        m.set(1, 1, Cx::one(prec));
        assert!(matches!(LuFactor::factor(&m), Err(LabError::SolveFailure { .. })));
    }
}
