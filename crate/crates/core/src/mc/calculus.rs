//! First-order change calculus for `y -> y + sum r_j T^j y`.

use rug::Float;

use crate::error::LabResult;
use crate::linalg::HVector;
use crate::operator::OperatorSpec;
use crate::precision::PrecisionCtx;
use crate::scalar::Cx;
use crate::solver::{solve_extremal, ExtremalState};

/// A real-linear functional `r -> sum_j u_j r_j + v_j conj(r_j)`.
#[derive(Clone, Debug)]
pub struct LinearForm {
    pub u: Vec<Cx>,
    pub v: Vec<Cx>,
}

impl LinearForm {
    pub fn zero(len: usize, prec: u32) -> LinearForm {
        LinearForm {
            u: vec![Cx::zero(prec); len],
            v: vec![Cx::zero(prec); len],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn eval(&self, r: &[Cx]) -> Cx {
        let prec = self.u.first().map(|c| c.prec()).unwrap_or(64);
        let mut acc = Cx::zero(prec);
        for (j, rj) in r.iter().enumerate().take(self.len()) {
            acc.add_mul(&self.u[j], rj);
            acc.add_mul_conj(&self.v[j], rj);
        }
        acc
    }

    /// `self + s * o`.
    pub fn add_scaled(&self, o: &LinearForm, s: &Cx) -> LinearForm {
        LinearForm {
            u: self.u.iter().zip(&o.u).map(|(a, b)| a + &(b * s)).collect(),
            v: self.v.iter().zip(&o.v).map(|(a, b)| a + &(b * s)).collect(),
        }
    }

    /// Coefficients of the real part over `(Re r_0.., Im r_0..)`.
    pub fn real_row(&self) -> Vec<Float> {
        let prec = self.u[0].prec();
        let mut row: Vec<Float> = self
            .u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| Float::with_val(prec, &u.re + &v.re))
            .collect();
        row.extend(
            self.u
                .iter()
                .zip(&self.v)
                .map(|(u, v)| Float::with_val(prec, &v.im - &u.im)),
        );
        row
    }

    /// Coefficients of the imaginary part over `(Re r, Im r)`.
    pub fn imag_row(&self) -> Vec<Float> {
        let prec = self.u[0].prec();
        let mut row: Vec<Float> = self
            .u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| Float::with_val(prec, &u.im + &v.im))
            .collect();
        row.extend(
            self.u
                .iter()
                .zip(&self.v)
                .map(|(u, v)| Float::with_val(prec, &u.re - &v.re)),
        );
        row
    }
}

/// Form of `r -> -sum_j sum_m (r_j s1_m conj(s2_{m+j}) + conj(r_j) s1_{m+j} conj(s2_m))`
/// over `len` coefficients.
pub fn pairing_form(s1: &[Cx], s2: &[Cx], len: usize) -> LinearForm {
    let prec = s1[0].prec();
    let mut f = LinearForm::zero(len, prec);
    for j in 0..len {
        let mut u = Cx::zero(prec);
        let mut v = Cx::zero(prec);
        for m in 0..s1.len().min(s2.len().saturating_sub(j)) {
            u.add_mul_conj(&s1[m], &s2[m + j]);
        }
        for m in 0..s2.len().min(s1.len().saturating_sub(j)) {
            v.add_mul_conj(&s1[m + j], &s2[m]);
        }
        f.u[j] = -u;
        f.v[j] = -v;
    }
    f
}

/// `-<(M_r + M_r*) s1, s2>` for the shift-convolution `M_r`.
pub fn pairing_change(s1: &[Cx], s2: &[Cx], r: &[Cx]) -> Cx {
    pairing_form(s1, s2, r.len()).eval(r)
}

/// Sequences that drive the first-order changes of a state.
#[derive(Clone, Debug)]
pub struct ChangeFunctionals {
    pub a: Vec<Cx>,
    pub b: Vec<Cx>,
    /// `kappa` with one subtracted from the leading entry.
    pub kappa_tilde: Vec<Cx>,
}

#[derive(Clone, Debug)]
pub struct Prediction {
    pub band: Float,
    pub eps_theta: Float,
    pub a0: Float,
}

impl ChangeFunctionals {
    pub fn from_state(state: &ExtremalState) -> ChangeFunctionals {
        let mut kt = state.kappa.clone();
        let prec = state.prec();
        kt[0] = &kt[0] - &Cx::one(prec);
        ChangeFunctionals {
            a: state.a.clone(),
            b: state.b.clone(),
            kappa_tilde: kt,
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Change of `<z, x0>`.
    pub fn band_form(&self) -> LinearForm {
        pairing_form(&self.a, &self.a, self.len())
    }

    /// Change of `eps_theta` (real part): `P(a,a) - 2 P(a,b)`.
    pub fn eps_theta_form(&self) -> LinearForm {
        let aa = pairing_form(&self.a, &self.a, self.len());
        let ab = pairing_form(&self.a, &self.b, self.len());
        let prec = self.a[0].prec();
        aa.add_scaled(&ab, &Cx::from_f64(prec, -2.0, 0.0))
    }

    /// Change of `a_0 = <z, y>`: `P(a, kappa_tilde) - r_0 a_0`.
    pub fn a0_form(&self) -> LinearForm {
        let mut f = pairing_form(&self.a, &self.kappa_tilde, self.len());
        f.u[0] = &f.u[0] - &self.a[0];
        f
    }

    /// Change of `<z, w>` given `omega_k = <(I+G)^-1 w, T^k y>`.
    pub fn restriction_form(&self, omega: &[Cx]) -> LinearForm {
        pairing_form(&self.a, omega, self.len())
    }

    pub fn predict(&self, r: &[Cx]) -> Prediction {
        Prediction {
            band: self.band_form().eval(r).re,
            eps_theta: self.eps_theta_form().eval(r).re,
            a0: self.a0_form().eval(r).re,
        }
    }
}

/// `omega_k = <(I+G)^-1 w, T^k y>` for a restriction vector `w`.
pub fn restriction_sequence(state: &ExtremalState, w: &HVector) -> LabResult<Vec<Cx>> {
    let rw = state.resolve(w)?;
    Ok(state.basis.pairings(&rw))
}

/// First-order change of `z` as a vector: `-(I+G)^-1 V c` with
/// `c_n = sum_{k+j=n} a_k r_j + sum_j conj(r_j) a_{n+j}`.
pub fn linear_change_z(state: &ExtremalState, r: &[Cx]) -> LabResult<HVector> {
    let prec = state.prec();
    let n = state.a.len();
    let mut c = vec![Cx::zero(prec); n];
    for (k, ak) in state.a.iter().enumerate() {
        for (j, rj) in r.iter().enumerate() {
            if k + j < n {
                c[k + j].add_mul(ak, rj);
            }
        }
    }
    for (m, cm) in c.iter_mut().enumerate() {
        for (j, rj) in r.iter().enumerate() {
            if m + j < n {
                cm.add_mul_conj(&state.a[m + j], rj);
            }
        }
    }
    let gz = state.basis.combine(&c);
    let d = state.resolve(&gz)?;
    Ok(d.scale(&Cx::from_f64(prec, -1.0, 0.0)))
}

/// `y + h V r` in the stored frame.
pub fn perturbed_datum(state: &ExtremalState, r: &[Cx], h: &Float) -> HVector {
    let mut y = state.y.clone();
    let p = state.basis.combine(r);
    y.axpy_real(h, &p);
    y
}

fn observe(t: &OperatorSpec, y: &HVector, x0: &HVector, ctx: &PrecisionCtx) -> LabResult<(Float, Float, Float)> {
    let s = solve_extremal(t, y, x0, ctx)?;
    // a_0 on the unrotated datum
    let a0 = (&s.phase * &s.a[0]).re;
    Ok((s.band_value(), s.eps_theta.clone(), a0))
}

/// Centered differences `(f(y + h p) - f(y - h p)) / 2h` of band, `eps_theta`
/// and `Re a_0`, with `p = sum r_j T^j y`.
pub fn first_order_oracle(
    t: &OperatorSpec,
    state: &ExtremalState,
    r: &[Cx],
    h: f64,
    ctx: &PrecisionCtx,
) -> LabResult<Prediction> {
    let prec = state.prec();
    if r.iter().all(|c| c.is_zero()) {
        return Ok(Prediction {
            band: Float::new(prec),
            eps_theta: Float::new(prec),
            a0: Float::new(prec),
        });
    }
    let hp = Float::with_val(prec, h);
    let hm = Float::with_val(prec, -h);
    let (b1, e1, a1) = observe(t, &perturbed_datum(state, r, &hp), &state.x0, ctx)?;
    let (b2, e2, a2) = observe(t, &perturbed_datum(state, r, &hm), &state.x0, ctx)?;
    let den = Float::with_val(prec, h * 2.0);
    Ok(Prediction {
        band: Float::with_val(prec, &b1 - &b2) / &den,
        eps_theta: Float::with_val(prec, &e1 - &e2) / &den,
        a0: Float::with_val(prec, &a1 - &a2) / &den,
    })
}

/// `(actual, predicted)` change of `z` under `y -> (1 + delta) y`, the
/// prediction being `-2 delta ((I+G)^-1 - (I+G)^-2) x0`.
pub fn dilation_change(
    t: &OperatorSpec,
    state: &ExtremalState,
    delta: f64,
    ctx: &PrecisionCtx,
) -> LabResult<(HVector, HVector)> {
    let prec = state.prec();
    let y = state.y.scale_real(&(Float::with_val(prec, 1) + delta));
    let moved = solve_extremal(t, &y, &state.x0, ctx)?;
    let actual = moved.z.sub(&state.z);
    let rz = state.resolve(&state.z)?;
    let predicted = state.z.sub(&rz).scale_real(&(Float::with_val(prec, delta) * -2i32));
    Ok((actual, predicted))
}
