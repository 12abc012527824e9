use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Named exponents that stand in for the fixed powers used by the lemmas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Exponents {
    /// Case I fires when some pairing reaches `eps_theta^p_case_i`.
    pub p_case_i: f64,
    /// Upper edge of the dominance band is `1 - eps_theta^p_lower / 2`.
    pub p_lower: f64,
    /// Fallback confirms near-dependence when the residual is below `eps_theta^p_fallback`.
    pub p_fallback: f64,
    /// Restriction vectors use weight `delta2^p_restrict`.
    pub p_restrict: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents {
            p_case_i: 4.0,
            p_lower: 15.0,
            p_fallback: 4.0,
            p_restrict: 2.0,
        }
    }
}

/// Working precision and the numeric knobs every solve reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrecisionCtx {
    pub mantissa_bits: u32,
    /// Operators are scaled to norm `1/norm_scale_k`.
    pub norm_scale_k: f64,
    /// Krylov truncation tolerance.
    pub tail_tol: f64,
    /// Admissible window for the distance, `(lo, hi)`.
    pub band: (f64, f64),
    pub exponents: Exponents,
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        PrecisionCtx {
            mantissa_bits: 256,
            norm_scale_k: 1.0e4,
            tail_tol: 1.0e-30,
            band: (0.3, 0.7),
            exponents: Exponents::default(),
        }
    }
}

impl PrecisionCtx {
    pub fn with_bits(bits: u32) -> Self {
        PrecisionCtx {
            mantissa_bits: bits,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.mantissa_bits < 64 {
            return Err(LabError::Precondition(format!(
                "mantissa_bits must be at least 64, got {}",
                self.mantissa_bits
            )));
        }
        if !(self.norm_scale_k > 1.0) || !self.norm_scale_k.is_finite() {
            return Err(LabError::Precondition(format!(
                "norm_scale_k must exceed 1, got {}",
                self.norm_scale_k
            )));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(LabError::Precondition(format!(
                "tail_tol must lie in (0,1), got {}",
                self.tail_tol
            )));
        }
        let (lo, hi) = self.band;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(LabError::Precondition(format!(
                "band must satisfy 0 < lo < hi < 1, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    pub fn prec(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn real(&self, v: f64) -> Float {
        Float::with_val(self.mantissa_bits, v)
    }

    pub fn k(&self) -> Float {
        self.real(self.norm_scale_k)
    }

    /// `2^-e` at working precision.
    pub fn pow2(&self, e: i32) -> Float {
        Float::with_val(self.mantissa_bits, 1) << e
    }

    /// Tolerance used for residual checks: `2^(-bits/2)`.
    pub fn half_eps(&self) -> Float {
        Float::with_val(self.mantissa_bits, 1) >> (self.mantissa_bits / 2)
    }

    /// Rank threshold: `2^(-bits/4)`.
    pub fn rank_tol(&self) -> Float {
        Float::with_val(self.mantissa_bits, 1) >> (self.mantissa_bits / 4)
    }

    /// Unit roundoff scaled up by a few bits.
    pub fn unit_eps(&self) -> Float {
        Float::with_val(self.mantissa_bits, 1) >> (self.mantissa_bits.saturating_sub(6))
    }

    /// Krylov degree `J = ceil(log_K(1/tau))`, capped at `dim - 1`.
    pub fn krylov_degree(&self, dim: usize) -> usize {
        let raw = (1.0 / self.tail_tol).ln() / self.norm_scale_k.ln();
        let j = (raw - 1e-9).ceil().max(0.0) as usize;
        j.min(dim.saturating_sub(1))
    }
}

/// Full-precision decimal rendering used in every artifact.
pub fn decimal(x: &Float) -> String {
    x.to_string_radix(10, None)
}

/// Parse a decimal string at the given precision.
pub fn parse_real(s: &str, prec: u32) -> LabResult<Float> {
    Float::parse(s.trim())
        .map(|p| Float::with_val(prec, p))
        .map_err(|e| LabError::Parse(format!("{s:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_from_tolerance() {
        let mut ctx = PrecisionCtx::default();
        ctx.tail_tol = 1e-12;
        assert_eq!(ctx.krylov_degree(100), 3);
        ctx.tail_tol = 1.0 / 64.0;
        ctx.norm_scale_k = 2.0;
        assert_eq!(ctx.krylov_degree(100), 6);
        assert_eq!(ctx.krylov_degree(4), 3);
    }

    #[test]
    fn decimal_round_trip() {
        let x = Float::with_val(256, 1) / 3;
        let s = decimal(&x);
        let y = parse_real(&s, 256).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn validate_rejects_bad_band() {
        let mut ctx = PrecisionCtx::default();
        ctx.band = (0.7, 0.3);
        assert!(ctx.validate().is_err());
    }
}
