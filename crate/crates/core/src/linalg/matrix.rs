use rug::Float;

use super::vector::HVector;
use crate::scalar::Cx;

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Cx>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> CMatrix {
        CMatrix {
            rows,
            cols,
            data: vec![Cx::zero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> CMatrix {
        let mut m = CMatrix::zeros(n, n, prec);
        for i in 0..n {
            m.set(i, i, Cx::one(prec));
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Cx>) -> CMatrix {
        assert_eq!(data.len(), rows * cols);
        CMatrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[HVector]) -> CMatrix {
        assert!(!cols.is_empty());
        let rows = cols[0].dim();
        let prec = cols[0].prec();
        let mut m = CMatrix::zeros(rows, cols.len(), prec);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m.set(i, j, c.get(i).clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prec(&self) -> u32 {
        self.data.first().map(|c| c.prec()).unwrap_or(64)
    }

    pub fn get(&self, i: usize, j: usize) -> &Cx {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Cx {
        &mut self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cx) {
        self.data[i * self.cols + j] = v;
    }

    pub fn with_prec(&self, prec: u32) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c.with_prec(prec)).collect(),
        }
    }

    pub fn column(&self, j: usize) -> HVector {
        HVector::from_coords((0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn columns(&self) -> Vec<HVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn mul_vec(&self, v: &HVector) -> HVector {
        debug_assert_eq!(self.cols, v.dim());
        let prec = self.prec();
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = Cx::zero(prec);
            for j in 0..self.cols {
                acc.add_mul(self.get(i, j), v.get(j));
            }
            out.push(acc);
        }
        HVector::from_coords(out)
    }

    /// `A* v`.
    pub fn adjoint_mul_vec(&self, v: &HVector) -> HVector {
        debug_assert_eq!(self.rows, v.dim());
        let prec = self.prec();
        let mut out = vec![Cx::zero(prec); self.cols];
        for i in 0..self.rows {
            let vi = v.get(i);
            for (j, o) in out.iter_mut().enumerate() {
                // conj(a_ij) v_i
                o.add_mul_conj(vi, self.get(i, j));
            }
        }
        HVector::from_coords(out)
    }

    pub fn mul(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, o.rows);
        let prec = self.prec();
        let mut m = CMatrix::zeros(self.rows, o.cols, prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j).clone();
                    m.get_mut(i, j).add_mul(a, &b);
                }
            }
        }
        m
    }

    pub fn adjoint(&self) -> CMatrix {
        let prec = self.prec();
        let mut m = CMatrix::zeros(self.cols, self.rows, prec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).conj());
            }
        }
        m
    }

    pub fn scale_real(&self, s: &Float) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn sub(&self, o: &CMatrix) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, o: &CMatrix) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `self += v v*`.
    pub fn add_outer(&mut self, v: &HVector) {
        let n = v.dim();
        for i in 0..n {
            let vi = v.get(i).clone();
            for j in 0..n {
                let vj = v.get(j).clone();
                self.get_mut(i, j).add_mul_conj(&vi, &vj);
            }
        }
    }

    /// Gram matrix `M_ij = <v_j, v_i>` of the columns, i.e. `V* V`.
    pub fn gram_of(vecs: &[HVector]) -> CMatrix {
        let m = vecs.len();
        let prec = vecs[0].prec();
        let mut g = CMatrix::zeros(m, m, prec);
        for i in 0..m {
            for j in i..m {
                let v = vecs[j].inner(&vecs[i]);
                g.set(j, i, v.conj());
                g.set(i, j, v);
            }
        }
        g
    }

    pub fn frobenius(&self) -> Float {
        let mut s = Float::new(self.prec());
        for c in &self.data {
            s += c.norm_sqr();
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec());
        for c in &self.data {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    pub fn data(&self) -> &[Cx] {
        &self.data
    }
}
