use rug::Float;

use super::matrix::CMatrix;
use crate::error::{LabError, LabResult};
use crate::scalar::Cx;

/// `A = Z S Z*` with `Z` unitary and `S` upper triangular.
#[derive(Clone, Debug)]
pub struct Schur {
    pub z: CMatrix,
    pub s: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Cx> {
        (0..self.s.rows()).map(|i| self.s.get(i, i).clone()).collect()
    }
}

fn hessenberg(a: &mut CMatrix, z: &mut CMatrix) {
    let n = a.rows();
    let prec = a.prec();
    if n < 3 {
        return;
    }
    for k in 0..(n - 2) {
        let mut tail = Float::new(prec);
        for i in (k + 2)..n {
            tail += a.get(i, k).norm_sqr();
        }
        if tail.is_zero() {
            continue;
        }
        let x0 = a.get(k + 1, k).clone();
        let alpha = Float::with_val(prec, &tail + &x0.norm_sqr()).sqrt();
        let mut v: Vec<Cx> = (k + 1..n).map(|i| a.get(i, k).clone()).collect();
        let ph = x0.phase();
        v[0] += &ph.scale(&alpha);
        let mut vv = Float::new(prec);
        for c in &v {
            vv += c.norm_sqr();
        }
        let two_over = Float::with_val(prec, 2u32) / &vv;
        // left: rows k+1.., all columns
        for j in 0..n {
            let mut s = Cx::zero(prec);
            for (t, vi) in v.iter().enumerate() {
                s.add_mul(&vi.conj(), a.get(k + 1 + t, j));
            }
            let s = s.scale(&two_over);
            for (t, vi) in v.iter().enumerate() {
                a.get_mut(k + 1 + t, j).sub_mul(vi, &s);
            }
        }
        // right on a and z: columns k+1..
        for m in [&mut *a, &mut *z] {
            for i in 0..n {
                let mut s = Cx::zero(prec);
                for (t, vj) in v.iter().enumerate() {
                    s.add_mul(m.get(i, k + 1 + t), vj);
                }
                let s = s.scale(&two_over);
                for (t, vj) in v.iter().enumerate() {
                    let c = vj.conj();
                    m.get_mut(i, k + 1 + t).sub_mul(&s, &c);
                }
            }
        }
        for i in (k + 2)..n {
            a.set(i, k, Cx::zero(prec));
        }
    }
}

/// Givens pair `(c, s)` with `[c s; -conj(s) c] [x; y] = [r; 0]`.
fn givens(x: &Cx, y: &Cx) -> (Float, Cx) {
    let prec = x.prec();
    if y.is_zero() {
        return (Float::with_val(prec, 1), Cx::zero(prec));
    }
    if x.is_zero() {
        return (Float::new(prec), Cx::one(prec));
    }
    let ax = x.abs();
    let r = Float::with_val(prec, &ax * &ax + &y.norm_sqr()).sqrt();
    let c = Float::with_val(prec, &ax / &r);
    let mut s = x.phase().mul_conj(y);
    s.re /= &r;
    s.im /= &r;
    (c, s)
}

fn rotate_rows(a: &mut CMatrix, k: usize, c: &Float, s: &Cx, cols: std::ops::Range<usize>) {
    let sc = s.conj();
    for j in cols {
        let u = a.get(k, j).clone();
        let w = a.get(k + 1, j).clone();
        let mut nu = u.scale(c);
        nu.add_mul(s, &w);
        let mut nw = w.scale(c);
        nw.sub_mul(&sc, &u);
        a.set(k, j, nu);
        a.set(k + 1, j, nw);
    }
}

fn rotate_cols(a: &mut CMatrix, k: usize, c: &Float, s: &Cx, rows: std::ops::Range<usize>) {
    let sc = s.conj();
    for i in rows {
        let u = a.get(i, k).clone();
        let w = a.get(i, k + 1).clone();
        let mut nu = u.scale(c);
        nu.add_mul(&sc, &w);
        let mut nw = w.scale(c);
        nw.sub_mul(s, &u);
        a.set(i, k, nu);
        a.set(i, k + 1, nw);
    }
}

fn wilkinson_shift(a: &Cx, b: &Cx, c: &Cx, d: &Cx) -> Cx {
    let prec = a.prec();
    let half = Float::with_val(prec, 0.5);
    let m = (&(a + d)).scale(&half);
    let h = (&(a - d)).scale(&half);
    let disc = (&(&h * &h) + &(b * c)).sqrt();
    let l1 = &m + &disc;
    let l2 = &m - &disc;
    if (&l1 - d).abs() <= (&l2 - d).abs() {
        l1
    } else {
        l2
    }
}

pub fn schur(a: &CMatrix) -> LabResult<Schur> {
    let n = a.rows();
    if n != a.cols() {
        return Err(LabError::DimensionMismatch {
            expected: n,
            found: a.cols(),
        });
    }
    let prec = a.prec();
    let mut h = a.clone();
    let mut z = CMatrix::identity(n, prec);
    hessenberg(&mut h, &mut z);
    let eps = Float::with_val(prec, 1) >> (prec.saturating_sub(4));
    let abs_tol = Float::with_val(prec, &eps * &h.frobenius());
    let mut hi = n.saturating_sub(1);
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h.get(l, l - 1).abs();
            let diag = Float::with_val(prec, h.get(l, l).abs() + h.get(l - 1, l - 1).abs());
            if sub <= Float::with_val(prec, &eps * &diag) || sub <= abs_tol {
                h.set(l, l - 1, Cx::zero(prec));
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 200 * n {
            return Err(LabError::NoConvergence("Schur QR iteration".into()));
        }
        let mu = if iter % 11 == 10 {
            let mut m = h.get(hi, hi).clone();
            m.re += Float::with_val(prec, h.get(hi, hi - 1).abs() * 0.75f64);
            m
        } else {
            wilkinson_shift(
                h.get(hi - 1, hi - 1),
                h.get(hi - 1, hi),
                h.get(hi, hi - 1),
                h.get(hi, hi),
            )
        };
        for k in l..hi {
            let (x, y) = if k == l {
                (h.get(l, l) - &mu, h.get(l + 1, l).clone())
            } else {
                (h.get(k, k - 1).clone(), h.get(k + 1, k - 1).clone())
            };
            let (c, s) = givens(&x, &y);
            let c0 = if k == l { l } else { k - 1 };
            rotate_rows(&mut h, k, &c, &s, c0..n);
            let r1 = (k + 3).min(hi + 1);
            rotate_cols(&mut h, k, &c, &s, 0..r1);
            rotate_cols(&mut z, k, &c, &s, 0..n);
            if k > l {
                h.set(k + 1, k - 1, Cx::zero(prec));
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            h.set(i, j, Cx::zero(prec));
        }
    }
    Ok(Schur { z, s: h })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, prec: u32) -> CMatrix {
        let mut m = CMatrix::zeros(n, n, prec);
        for i in 0..n {
            for j in 0..n {
                let re = ((i * 7 + j * 3) % 5) as f64 - 2.0;
                let im = ((i * 2 + j * 5) % 7) as f64 * 0.3 - 1.0;
                m.set(i, j, Cx::from_f64(prec, re, im));
            }
        }
        m
    }

    #[test]
    fn reconstructs() {
        let prec = 192;
        for n in [1, 2, 3, 6] {
            let a = sample(n, prec);
            let sc = schur(&a).unwrap();
            let back = sc.z.mul(&sc.s).mul(&sc.z.adjoint());
            assert!(back.sub(&a).max_abs() < 1e-45, "n={n}");
            let zz = sc.z.adjoint().mul(&sc.z);
            assert!(zz.sub(&CMatrix::identity(n, prec)).max_abs() < 1e-45);
        }
    }
}
