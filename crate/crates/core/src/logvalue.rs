//! Nonnegative extended reals stored by their natural logarithm.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Zero,
    Finite,
    Infinite,
}

/// A value in `[0, +inf]` represented as `exp(ln)`.
///
/// Bounds in this crate routinely exceed the range of `f64` (magnitudes
/// around `10^34345` appear), so every quantity travels in this form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub kind: Kind,
    /// Natural log of the value; only meaningful for `Kind::Finite`.
    pub ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { kind: Kind::Zero, ln: f64::NEG_INFINITY };
    pub const ONE: LogValue = LogValue { kind: Kind::Finite, ln: 0.0 };
    pub const INFINITY: LogValue = LogValue { kind: Kind::Infinite, ln: f64::INFINITY };

    /// Builds a value from its natural log. `-inf` maps to zero and `+inf`
    /// to infinity; NaN is rejected.
    pub fn from_ln(ln: f64) -> LogValue {
        assert!(!ln.is_nan(), "LogValue::from_ln called with NaN");
        if ln == f64::NEG_INFINITY {
            LogValue::ZERO
        } else if ln == f64::INFINITY {
            LogValue::INFINITY
        } else {
            LogValue { kind: Kind::Finite, ln }
        }
    }

    pub fn from_log10(l: f64) -> LogValue {
        LogValue::from_ln(l * std::f64::consts::LN_10)
    }

    /// Converts a nonnegative real.
    pub fn from_f64(x: f64) -> LogValue {
        assert!(x >= 0.0, "LogValue::from_f64 needs a nonnegative input, got {x}");
        if x == 0.0 {
            LogValue::ZERO
        } else {
            LogValue::from_ln(x.ln())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == Kind::Zero
    }

    pub fn is_finite(&self) -> bool {
        self.kind == Kind::Finite
    }

    /// Natural log with the conventions `ln 0 = -inf`, `ln inf = +inf`.
    pub fn ln(&self) -> f64 {
        match self.kind {
            Kind::Zero => f64::NEG_INFINITY,
            Kind::Finite => self.ln,
            Kind::Infinite => f64::INFINITY,
        }
    }

    pub fn log10(&self) -> f64 {
        self.ln() / std::f64::consts::LN_10
    }

    /// The value as an ordinary float (may overflow to `inf` or underflow to 0).
    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }

    /// Product; fails on `0 * inf`.
    pub fn try_mul(self, rhs: LogValue) -> Result<LogValue> {
        match (self.kind, rhs.kind) {
            (Kind::Zero, Kind::Infinite) | (Kind::Infinite, Kind::Zero) => {
                Err(Error::InvalidInput("product of zero and infinity".into()))
            }
            (Kind::Zero, _) | (_, Kind::Zero) => Ok(LogValue::ZERO),
            (Kind::Infinite, _) | (_, Kind::Infinite) => Ok(LogValue::INFINITY),
            _ => Ok(LogValue::from_ln(self.ln + rhs.ln)),
        }
    }

    /// Sum, computed as `max + log1p(exp(-|d|))`.
    pub fn sum(self, rhs: LogValue) -> LogValue {
        match (self.kind, rhs.kind) {
            (Kind::Infinite, _) | (_, Kind::Infinite) => LogValue::INFINITY,
            (Kind::Zero, _) => rhs,
            (_, Kind::Zero) => self,
            _ => {
                let (hi, lo) = if self.ln >= rhs.ln { (self.ln, rhs.ln) } else { (rhs.ln, self.ln) };
                LogValue::from_ln(hi + (lo - hi).exp().ln_1p())
            }
        }
    }

    pub fn pow(self, e: f64) -> LogValue {
        match self.kind {
            Kind::Finite => LogValue::from_ln(self.ln * e),
            _ if e == 0.0 => LogValue::ONE,
            _ => self,
        }
    }

    /// Mantissa in `[1, 10)` and decimal exponent after rounding to
    /// `digits` significant figures. Returns `None` for zero and infinity.
    pub fn sci_parts(&self, digits: usize) -> Option<(f64, i64)> {
        if !self.is_finite() {
            return None;
        }
        let digits = digits.max(1);
        let l = self.log10();
        let mut exp = l.floor();
        let scale = 10f64.powi(digits as i32 - 1);
        let mut mant = (10f64.powf(l - exp) * scale).round() / scale;
        if mant >= 10.0 {
            mant /= 10.0;
            exp += 1.0;
        }
        Some((mant, exp as i64))
    }

    /// Scientific rendering such as `4.7e17` or `1.5e-28`.
    pub fn to_display(&self, digits: usize) -> String {
        match self.kind {
            Kind::Zero => "0".to_string(),
            Kind::Infinite => "inf".to_string(),
            Kind::Finite => {
                let digits = digits.max(1);
                let (mant, exp) = self.sci_parts(digits).unwrap();
                format!("{:.*}e{}", digits - 1, mant, exp)
            }
        }
    }

    /// Whether this value displays like `expected` (a string such as
    /// `"3.0e30"`): same exponent, mantissa within one unit in the last
    /// printed digit. The number of digits is taken from `expected`.
    pub fn matches_display(&self, expected: &str) -> bool {
        let Some((emant, eexp, digits)) = parse_display(expected) else {
            return false;
        };
        let Some((mant, exp)) = self.sci_parts(digits) else {
            return false;
        };
        let ulp = 10f64.powi(1 - digits as i32);
        exp == eexp && (mant - emant).abs() <= ulp * (1.0 + 1e-9)
    }
}

/// Parses `"4.7e17"`-style strings into (mantissa, exponent, significant digits).
pub fn parse_display(s: &str) -> Option<(f64, i64, usize)> {
    let s = s.trim();
    let (m, e) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let mant: f64 = m.parse().ok()?;
    let digits = m.chars().filter(|c| c.is_ascii_digit()).count().max(1);
    Some((mant, e, digits))
}

impl Mul for LogValue {
    type Output = LogValue;

    /// Panics on `0 * inf`; use [`LogValue::try_mul`] to handle that case.
    fn mul(self, rhs: LogValue) -> LogValue {
        self.try_mul(rhs).expect("zero times infinity")
    }
}

impl Add for LogValue {
    type Output = LogValue;

    fn add(self, rhs: LogValue) -> LogValue {
        self.sum(rhs)
    }
}

impl Div for LogValue {
    type Output = LogValue;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogValue) -> LogValue {
        match (self.kind, rhs.kind) {
            (_, Kind::Zero) => panic!("division by zero LogValue"),
            (Kind::Infinite, Kind::Infinite) => panic!("inf / inf"),
            (Kind::Zero, _) | (_, Kind::Infinite) => LogValue::ZERO,
            (Kind::Infinite, _) => LogValue::INFINITY,
            _ => LogValue::from_ln(self.ln - rhs.ln),
        }
    }
}

impl std::iter::Product for LogValue {
    fn product<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        iter.fold(LogValue::ONE, |a, b| a * b)
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &LogValue) -> Option<Ordering> {
        self.ln().partial_cmp(&other.ln())
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map(|p| p + 1).unwrap_or(2);
        f.write_str(&self.to_display(digits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_rounds_and_bumps_exponent() {
        assert_eq!(LogValue::from_f64(4.7e17).to_display(2), "4.7e17");
        assert_eq!(LogValue::from_f64(1.5e-28).to_display(2), "1.5e-28");
        assert_eq!(LogValue::from_f64(9.96e5).to_display(2), "1.0e6");
        assert_eq!(LogValue::from_f64(0.0249).to_display(3), "2.49e-2");
        assert_eq!(LogValue::ZERO.to_display(2), "0");
    }

    #[test]
    fn display_of_huge_values() {
        let v = LogValue::from_log10(34345.0 + 1.3f64.log10());
        assert_eq!(v.to_display(2), "1.3e34345");
    }

    #[test]
    fn matching_allows_one_unit() {
        let v = LogValue::from_f64(4.86e41);
        assert!(v.matches_display("4.8e41"));
        assert!(v.matches_display("4.9e41"));
        assert!(!v.matches_display("4.7e41"));
        assert!(!v.matches_display("4.9e40"));
    }

    #[test]
    fn add_examples() {
        let two = LogValue::ONE + LogValue::ONE;
        assert!((two.ln() - 2f64.ln()).abs() < 1e-15);
        let big = LogValue::from_ln(1000.0) + LogValue::ONE;
        assert_eq!(big.ln(), 1000.0);
        assert_eq!(LogValue::ZERO + big, big);
    }

    #[test]
    fn zero_times_infinity_is_an_error() {
        assert!(LogValue::ZERO.try_mul(LogValue::INFINITY).is_err());
        assert!(LogValue::ZERO.try_mul(LogValue::ONE).unwrap().is_zero());
    }
}
