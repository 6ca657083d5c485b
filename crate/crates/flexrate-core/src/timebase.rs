//! Exact rational representation of frame-time durations.
//!
//! Slot durations, scheduling intervals and the blockage coherence interval
//! are all dyadic millisecond quantities (0.0625, 0.125, 0.25, ... 5.0).
//! Divisions such as `tau / t_mu` must be decided exactly: 1 / 0.0625 is 16,
//! never 15.999..., and 0.3 / 0.25 must be rejected as a non-multiple. Every
//! finite f64 is itself a dyadic rational, so conversion from configuration
//! floats is exact.

use crate::error::{Error, Result};
use num_rational::Ratio;
use num_traits::ToPrimitive;

/// Exact rational used throughout the frame-timing code.
pub type ExactRatio = Ratio<i128>;

/// Largest binary exponent magnitude accepted when converting an f64
/// duration; rules out degenerate values like 1e-300 ms.
const MAX_BINARY_EXP: i64 = 96;

/// A duration in milliseconds held as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeMs(ExactRatio);

impl TimeMs {
    /// Exact conversion from an f64 millisecond value (every finite f64 is a
    /// dyadic rational). Rejects non-positive values and magnitudes that do
    /// not fit a sane duration range.
    pub fn from_ms_f64(ms: f64) -> Result<Self> {
        if !ms.is_finite() || ms <= 0.0 {
            return Err(Error::domain(format!(
                "duration must be a finite positive number of ms, got {ms}"
            )));
        }
        let bits = ms.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut mant, mut exp) = if raw_exp == 0 {
            (i128::from(frac), -1074i64)
        } else {
            (i128::from(frac | (1u64 << 52)), raw_exp - 1075)
        };
        while mant % 2 == 0 {
            mant /= 2;
            exp += 1;
        }
        if exp.abs() > MAX_BINARY_EXP {
            return Err(Error::domain(format!(
                "duration {ms} ms is outside the representable range"
            )));
        }
        let ratio = if exp >= 0 {
            ExactRatio::from_integer(mant << exp)
        } else {
            ExactRatio::new(mant, 1i128 << (-exp))
        };
        Ok(TimeMs(ratio))
    }

    /// Duration `num/den` ms, exact.
    pub fn from_ratio(num: i128, den: i128) -> Result<Self> {
        if den <= 0 || num <= 0 {
            return Err(Error::domain(format!(
                "duration ratio must be positive, got {num}/{den}"
            )));
        }
        Ok(TimeMs(ExactRatio::new(num, den)))
    }

    pub fn ratio(&self) -> ExactRatio {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact quotient `self / other` when it is a positive integer.
    /// Returns the non-integer quotient as the error payload otherwise.
    pub fn exact_multiple_of(&self, other: &TimeMs) -> Result<u64> {
        let q = self.0 / other.0;
        if q.is_integer() {
            let n = *q.numer();
            if n >= 1 && n <= i128::from(u64::MAX) {
                return Ok(n as u64);
            }
        }
        Err(Error::precondition(format!(
            "{} ms is not an integer multiple of {} ms (ratio {}/{} ~= {:.6}, residue {:.6})",
            self.as_f64(),
            other.as_f64(),
            q.numer(),
            q.denom(),
            q.to_f64().unwrap_or(f64::NAN),
            q.fract().to_f64().unwrap_or(f64::NAN),
        )))
    }
}

impl std::fmt::Display for TimeMs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ms", self.as_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_conversions_are_exact() {
        let t = TimeMs::from_ms_f64(0.0625).unwrap();
        assert_eq!(t.ratio(), ExactRatio::new(1, 16));
        let t = TimeMs::from_ms_f64(5.0).unwrap();
        assert_eq!(t.ratio(), ExactRatio::from_integer(5));
        let t = TimeMs::from_ms_f64(0.25).unwrap();
        assert_eq!(t.ratio(), ExactRatio::new(1, 4));
    }

    #[test]
    fn exact_division_never_truncates() {
        let tau = TimeMs::from_ms_f64(1.0).unwrap();
        let tti = TimeMs::from_ms_f64(0.0625).unwrap();
        assert_eq!(tau.exact_multiple_of(&tti).unwrap(), 16);
    }

    #[test]
    fn non_multiple_is_rejected_with_residue() {
        let tau = TimeMs::from_ms_f64(0.30).unwrap();
        let tti = TimeMs::from_ms_f64(0.25).unwrap();
        let err = tau.exact_multiple_of(&tti).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("not an integer multiple"), "message: {msg}");
        assert!(msg.contains("residue"), "message: {msg}");
    }

    #[test]
    fn rejects_non_positive_and_non_finite() {
        assert!(TimeMs::from_ms_f64(0.0).is_err());
        assert!(TimeMs::from_ms_f64(-1.0).is_err());
        assert!(TimeMs::from_ms_f64(f64::NAN).is_err());
        assert!(TimeMs::from_ms_f64(1e-300).is_err());
    }
}
