//! Complex numbers over MPFR reals.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use rug::Float;

/// A complex number whose parts share one precision.
#[derive(Clone, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} {:+e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Cx {
    pub fn zero(prec: u32) -> Cx {
        Cx {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn one(prec: u32) -> Cx {
        Cx::from_f64(prec, 1.0, 0.0)
    }

    pub fn i(prec: u32) -> Cx {
        Cx::from_f64(prec, 0.0, 1.0)
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Cx {
        Cx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_real(re: Float) -> Cx {
        let im = Float::new(re.prec());
        Cx { re, im }
    }

    pub fn new(re: Float, im: Float) -> Cx {
        Cx { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Cx {
        Cx {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    /// `exp(i t)`.
    pub fn cis(t: &Float) -> Cx {
        let (s, c) = t.clone().sin_cos(Float::new(t.prec()));
        Cx { re: c, im: s }
    }

    pub fn conj(&self) -> Cx {
        Cx {
            re: self.re.clone(),
            im: Float::with_val(self.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let mut s = Float::with_val(p, &self.re * &self.re);
        s += &self.im * &self.im;
        s
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn scale(&self, s: &Float) -> Cx {
        let p = self.prec();
        Cx {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    /// `self * conj(o)`.
    pub fn mul_conj(&self, o: &Cx) -> Cx {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &o.re);
        re += &self.im * &o.im;
        let mut im = Float::with_val(p, &self.im * &o.re);
        im -= &self.re * &o.im;
        Cx { re, im }
    }

    /// `self += a * b`.
    pub fn add_mul(&mut self, a: &Cx, b: &Cx) {
        self.re += &a.re * &b.re;
        self.re -= &a.im * &b.im;
        self.im += &a.re * &b.im;
        self.im += &a.im * &b.re;
    }

    /// `self -= a * b`.
    pub fn sub_mul(&mut self, a: &Cx, b: &Cx) {
        self.re -= &a.re * &b.re;
        self.re += &a.im * &b.im;
        self.im -= &a.re * &b.im;
        self.im -= &a.im * &b.re;
    }

    /// `self += a * conj(b)`.
    pub fn add_mul_conj(&mut self, a: &Cx, b: &Cx) {
        self.re += &a.re * &b.re;
        self.re += &a.im * &b.im;
        self.im += &a.im * &b.re;
        self.im -= &a.re * &b.im;
    }

    pub fn recip(&self) -> Cx {
        let d = self.norm_sqr();
        let p = self.prec();
        Cx {
            re: Float::with_val(p, &self.re / &d),
            im: Float::with_val(p, -&self.im) / &d,
        }
    }

    pub fn div(&self, o: &Cx) -> Cx {
        let d = o.norm_sqr();
        let mut q = self.mul_conj(o);
        q.re /= &d;
        q.im /= &d;
        q
    }

    /// Unit-modulus phase; one for zero.
    pub fn phase(&self) -> Cx {
        if self.is_zero() {
            return Cx::one(self.prec());
        }
        let a = self.abs();
        let p = self.prec();
        Cx {
            re: Float::with_val(p, &self.re / &a),
            im: Float::with_val(p, &self.im / &a),
        }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Cx {
        let p = self.prec();
        let r = self.abs();
        let re = Float::with_val(p, &r + &self.re) / 2u32;
        let im = Float::with_val(p, &r - &self.re) / 2u32;
        let re = re.max(&Float::new(p)).sqrt();
        let mut im = im.max(&Float::new(p)).sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        Cx { re, im }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl Add<&Cx> for &Cx {
    type Output = Cx;
    fn add(self, o: &Cx) -> Cx {
        let p = self.prec();
        Cx {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }
}

impl Sub<&Cx> for &Cx {
    type Output = Cx;
    fn sub(self, o: &Cx) -> Cx {
        let p = self.prec();
        Cx {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }
}

impl Mul<&Cx> for &Cx {
    type Output = Cx;
    fn mul(self, o: &Cx) -> Cx {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &o.re);
        re -= &self.im * &o.im;
        let mut im = Float::with_val(p, &self.re * &o.im);
        im += &self.im * &o.re;
        Cx { re, im }
    }
}

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        let p = self.prec();
        Cx {
            re: Float::with_val(p, -&self.re),
            im: Float::with_val(p, -&self.im),
        }
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign<&Cx> for Cx {
    fn add_assign(&mut self, o: &Cx) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&Cx> for Cx {
    fn sub_assign(&mut self, o: &Cx) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}
