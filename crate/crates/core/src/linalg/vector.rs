use rug::Float;

use crate::error::{LabError, LabResult};
use crate::scalar::Cx;

/// A vector in the truncated Hilbert space `C^N`.
///
/// Inner products are linear in the first slot: `<x, y> = sum x_i conj(y_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HVector {
    coords: Vec<Cx>,
}

impl HVector {
    pub fn zeros(dim: usize, prec: u32) -> HVector {
        HVector {
            coords: vec![Cx::zero(prec); dim],
        }
    }

    pub fn basis(dim: usize, k: usize, prec: u32) -> HVector {
        let mut v = HVector::zeros(dim, prec);
        v.coords[k] = Cx::one(prec);
        v
    }

    pub fn from_coords(coords: Vec<Cx>) -> HVector {
        HVector { coords }
    }

    pub fn from_f64(prec: u32, re: &[f64], im: &[f64]) -> HVector {
        assert_eq!(re.len(), im.len());
        HVector {
            coords: re
                .iter()
                .zip(im)
                .map(|(&r, &i)| Cx::from_f64(prec, r, i))
                .collect(),
        }
    }

    pub fn from_real_f64(prec: u32, re: &[f64]) -> HVector {
        HVector::from_f64(prec, re, &vec![0.0; re.len()])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn prec(&self) -> u32 {
        self.coords.first().map(|c| c.prec()).unwrap_or(64)
    }

    pub fn coords(&self) -> &[Cx] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [Cx] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<Cx> {
        self.coords
    }

    pub fn get(&self, i: usize) -> &Cx {
        &self.coords[i]
    }

    pub fn set(&mut self, i: usize, v: Cx) {
        self.coords[i] = v;
    }

    pub fn check_dim(&self, dim: usize) -> LabResult<()> {
        if self.dim() != dim {
            return Err(LabError::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }

    pub fn with_prec(&self, prec: u32) -> HVector {
        HVector {
            coords: self.coords.iter().map(|c| c.with_prec(prec)).collect(),
        }
    }

    /// `<self, o>`.
    pub fn inner(&self, o: &HVector) -> Cx {
        debug_assert_eq!(self.dim(), o.dim());
        let mut acc = Cx::zero(self.prec());
        for (a, b) in self.coords.iter().zip(&o.coords) {
            acc.add_mul_conj(a, b);
        }
        acc
    }

    pub fn norm_sqr(&self) -> Float {
        let mut s = Float::new(self.prec());
        for c in &self.coords {
            s += &c.re * &c.re;
            s += &c.im * &c.im;
        }
        s
    }

    pub fn norm(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec());
        for c in &self.coords {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, s: &Cx) -> HVector {
        HVector {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: &Float) -> HVector {
        HVector {
            coords: self.coords.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: &Cx, x: &HVector) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, xi) in self.coords.iter_mut().zip(&x.coords) {
            s.add_mul(a, xi);
        }
    }

    /// `self += a * x` with real `a`.
    pub fn axpy_real(&mut self, a: &Float, x: &HVector) {
        for (s, xi) in self.coords.iter_mut().zip(&x.coords) {
            s.re += a * &xi.re;
            s.im += a * &xi.im;
        }
    }

    pub fn add(&self, o: &HVector) -> HVector {
        HVector {
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &HVector) -> HVector {
        HVector {
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn normalized(&self) -> LabResult<HVector> {
        let n = self.norm();
        if n.is_zero() {
            return Err(LabError::ZeroVector);
        }
        let inv = Float::with_val(self.prec(), 1) / &n;
        Ok(self.scale_real(&inv))
    }

    pub fn dist(&self, o: &HVector) -> Float {
        self.sub(o).norm()
    }

    /// Coordinates as `(re, im)` pairs of `f64`, for reporting.
    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        self.coords.iter().map(|c| c.to_f64()).collect()
    }
}

/// Linear combination `sum c_j v_j`.
pub fn combine(coeffs: &[Cx], vecs: &[HVector]) -> HVector {
    assert!(!vecs.is_empty());
    let mut out = HVector::zeros(vecs[0].dim(), vecs[0].prec());
    for (c, v) in coeffs.iter().zip(vecs) {
        if !c.is_zero() {
            out.axpy(c, v);
        }
    }
    out
}
