//! Structured-text documents for operators, vectors and solved states.
//!
//! Every real is stored as a full-precision decimal string so that reading
//! a document back at the same precision reproduces it exactly.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::linalg::{CMatrix, HVector};
use crate::operator::{OperatorKind, OperatorSpec};
use crate::precision::{decimal, parse_real, PrecisionCtx};
use crate::scalar::Cx;
use crate::solver::ExtremalState;

fn split(cs: &[Cx]) -> (Vec<String>, Vec<String>) {
    cs.iter().map(|c| (decimal(&c.re), decimal(&c.im))).unzip()
}

fn join(re: &[String], im: &[String], prec: u32) -> LabResult<Vec<Cx>> {
    if re.len() != im.len() {
        return Err(LabError::Parse(format!("{} real parts but {} imaginary parts", re.len(), im.len())));
    }
    re.iter()
        .zip(im)
        .map(|(r, i)| Ok(Cx::new(parse_real(r, prec)?, parse_real(i, prec)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub kind: String,
    pub dim: usize,
    /// Row-major entries, shift weights or diagonal entries.
    pub re: Vec<String>,
    pub im: Vec<String>,
    pub norm_scale: String,
    pub k: f64,
    pub mantissa_bits: u32,
}

impl OperatorDoc {
    pub fn from_spec(t: &OperatorSpec, ctx: &PrecisionCtx) -> OperatorDoc {
        let entries: Vec<Cx> = match &t.kind {
            OperatorKind::Dense(m) => m.data().to_vec(),
            OperatorKind::WeightedShift(w) => w.clone(),
            OperatorKind::Diagonal(d) => d.clone(),
        };
        let (re, im) = split(&entries);
        OperatorDoc {
            kind: t.kind_name().to_string(),
            dim: t.dim(),
            re,
            im,
            norm_scale: decimal(&t.norm_scale),
            k: ctx.norm_scale_k,
            mantissa_bits: ctx.mantissa_bits,
        }
    }

    pub fn to_spec(&self) -> LabResult<OperatorSpec> {
        let prec = self.mantissa_bits;
        let entries = join(&self.re, &self.im, prec)?;
        let expect = match self.kind.as_str() {
            "dense" => self.dim * self.dim,
            "weighted_shift" => self.dim.saturating_sub(1),
            "diagonal" => self.dim,
            k => return Err(LabError::Parse(format!("unknown operator kind {k:?}"))),
        };
        if entries.len() != expect {
            return Err(LabError::DimensionMismatch {
                expected: expect,
                found: entries.len(),
            });
        }
        let mut t = match self.kind.as_str() {
            "dense" => OperatorSpec::dense(CMatrix::from_rows(self.dim, self.dim, entries))?,
            "weighted_shift" => OperatorSpec::weighted_shift(entries)?,
            _ => OperatorSpec::diagonal(entries)?,
        };
        t.norm_scale = parse_real(&self.norm_scale, prec)?;
        Ok(t)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("operator document serializes")
    }

    pub fn from_toml(s: &str) -> LabResult<OperatorDoc> {
        toml::from_str(s).map_err(|e| LabError::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDoc {
    pub re: Vec<String>,
    pub im: Vec<String>,
}

impl VectorDoc {
    pub fn from_vector(v: &HVector) -> VectorDoc {
        let (re, im) = split(v.coords());
        VectorDoc { re, im }
    }

    pub fn to_vector(&self, prec: u32) -> LabResult<HVector> {
        Ok(HVector::from_coords(join(&self.re, &self.im, prec)?))
    }
}

/// The scalar summary and coefficient sequences of a solved state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub eps: String,
    pub eps_theta: String,
    pub c: String,
    pub band_value: String,
    pub a0_ratio: String,
    pub two_norm: String,
    pub degree: usize,
    pub cond_estimate: String,
    pub a: VectorDoc,
    pub b: VectorDoc,
    pub kappa: VectorDoc,
    pub z: VectorDoc,
    pub y: VectorDoc,
}

impl StateDoc {
    pub fn from_state(s: &ExtremalState) -> StateDoc {
        let cs = |v: &[Cx]| VectorDoc::from_vector(&HVector::from_coords(v.to_vec()));
        StateDoc {
            eps: decimal(&s.eps),
            eps_theta: decimal(&s.eps_theta),
            c: decimal(&s.c),
            band_value: decimal(&s.band_value()),
            a0_ratio: decimal(&s.a0_ratio()),
            two_norm: decimal(&s.ell_primed().two_norm),
            degree: s.degree(),
            cond_estimate: decimal(&s.cond_estimate),
            a: cs(&s.a),
            b: cs(&s.b),
            kappa: cs(&s.kappa),
            z: VectorDoc::from_vector(&s.z),
            y: VectorDoc::from_vector(&s.y),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("state document serializes")
    }

    pub fn from_toml(s: &str) -> LabResult<StateDoc> {
        toml::from_str(s).map_err(|e| LabError::Parse(e.to_string()))
    }
}
