use rug::Float;

use super::matrix::CMatrix;
use super::vector::HVector;
use crate::scalar::Cx;

/// Singular values in descending order, by one-sided Jacobi on the columns.
pub fn singular_values(a: &CMatrix) -> Vec<Float> {
    let cols = if a.rows() >= a.cols() {
        a.columns()
    } else {
        a.adjoint().columns()
    };
    let mut s = jacobi_column_norms(cols);
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn sigma_max(a: &CMatrix) -> Float {
    singular_values(a).swap_remove(0)
}

pub fn sigma_min(a: &CMatrix) -> Float {
    singular_values(a).pop().unwrap()
}

fn jacobi_column_norms(mut cols: Vec<HVector>) -> Vec<Float> {
    let n = cols.len();
    if n == 0 {
        return vec![];
    }
    let prec = cols[0].prec();
    let tol = Float::with_val(prec, 1) >> (prec.saturating_sub(8));
    let mut norms: Vec<Float> = cols.iter().map(|c| c.norm_sqr()).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let g = cols[q].inner(&cols[p]);
                let ga = g.abs();
                if ga.is_zero() {
                    continue;
                }
                let alpha = &norms[p];
                let beta = &norms[q];
                let scale = Float::with_val(prec, alpha * beta).sqrt() * &tol;
                if ga <= scale {
                    continue;
                }
                rotated = true;
                let e = g.phase();
                let zeta = Float::with_val(prec, beta - alpha) / (Float::with_val(prec, &ga * 2u32));
                let root = (Float::with_val(prec, &zeta * &zeta) + 1u32).sqrt();
                let t = if zeta.is_zero() {
                    Float::with_val(prec, 1)
                } else {
                    let mag = Float::with_val(prec, zeta.abs_ref()) + &root;
                    let t = Float::with_val(prec, 1) / mag;
                    if zeta.is_sign_negative() {
                        -t
                    } else {
                        t
                    }
                };
                let c = (Float::with_val(prec, &t * &t) + 1u32).sqrt().recip();
                let s = Float::with_val(prec, &c * &t);
                let ec = e.conj();
                let cp = cols[p].clone();
                let cq = cols[q].clone();
                let mut np = HVector::zeros(cp.dim(), prec);
                let mut nq = HVector::zeros(cp.dim(), prec);
                let neg_s_ec = ec.scale(&Float::with_val(prec, -&s));
                let c_ec = ec.scale(&c);
                let cc = Cx::from_real(c.clone());
                let sc = Cx::from_real(s.clone());
                np.axpy(&cc, &cp);
                np.axpy(&neg_s_ec, &cq);
                nq.axpy(&sc, &cp);
                nq.axpy(&c_ec, &cq);
                norms[p] = np.norm_sqr();
                norms[q] = nq.norm_sqr();
                cols[p] = np;
                cols[q] = nq;
            }
        }
        if !rotated {
            break;
        }
    }
    norms.into_iter().map(|v| v.sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        let prec = 128;
        let mut d = CMatrix::zeros(3, 3, prec);
        d.set(0, 0, Cx::from_f64(prec, 3.0, 0.0));
        d.set(1, 1, Cx::from_f64(prec, 0.0, -5.0));
        d.set(2, 2, Cx::from_f64(prec, 0.5, 0.0));
        let s = singular_values(&d);
        let got: Vec<f64> = s.iter().map(|x| x.to_f64()).collect();
        assert_eq!(got, vec![5.0, 3.0, 0.5]);

        let u = HVector::from_f64(prec, &[1.0, 2.0], &[0.0, 1.0]);
        let mut r1 = CMatrix::zeros(2, 2, prec);
        r1.add_outer(&u);
        let s = singular_values(&r1);
        assert!((Float::with_val(prec, &s[0] - 6.0)).abs() < 1e-30);
        assert!(s[1] < 1e-30);
    }

    #[test]
    fn wide_matrix_uses_adjoint() {
        let prec = 128;
        let m = CMatrix::from_rows(
            1,
            2,
            vec![Cx::from_f64(prec, 3.0, 0.0), Cx::from_f64(prec, 0.0, 4.0)],
        );
        let s = singular_values(&m);
        assert_eq!(s.len(), 1);
        assert!((Float::with_val(prec, &s[0] - 5.0)).abs() < 1e-30);
    }
}
