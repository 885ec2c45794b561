//! Software floating-point substrate with a configurable decimal digit count.
//!
//! The precision context is a value threaded through every computation that
//! needs it; nothing here is ambient or global. Backed by MPFR via `rug`.

mod complex;
mod jacobi;
mod matrix;

pub use complex::MpComplex;
pub use jacobi::{jacobi_eigen, mean_eigen_residual, SymEigen};
pub use matrix::{MpCMat, MpMat};

use rug::Float;

use crate::error::{Error, Result};

/// Working precision for extended-precision arithmetic, expressed in decimal
/// digits. Default is 100 digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionConfig {
    digits: u32,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { digits: 100 }
    }
}

impl PrecisionConfig {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < 16 {
            return Err(Error::Config(format!(
                "precision must be at least 16 decimal digits, got {digits}"
            )));
        }
        Ok(PrecisionConfig { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Mantissa bits: enough for `digits` decimal digits plus guard bits.
    pub fn bits(&self) -> u32 {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 64
    }

    /// 10^k at this precision.
    pub fn pow10(&self, k: i32) -> Float {
        Float::with_val(self.bits(), k).exp10()
    }

    /// Positivity floor for Gramian eigenvalues: `10^(-digits/2)`. An
    /// eigenvalue at or below this is treated as numerically zero and the
    /// triplet as not output controllable.
    pub fn controllability_floor(&self) -> Float {
        self.pow10(-((self.digits / 2) as i32))
    }

    /// Bound on eigensolver residuals: `10^(-digits+10)`.
    pub fn residual_bound(&self) -> Float {
        self.pow10(10 - self.digits as i32)
    }

    /// Tolerance for interlacing comparisons: `10^(-digits+12)`.
    pub fn interlacing_tol(&self) -> Float {
        self.pow10(12 - self.digits as i32)
    }

    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.bits(), v)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.bits())
    }
}

/// log10 of a positive value, as hardware float. Returns `-inf` for zero or
/// negative input.
pub fn log10_f64(x: &Float) -> f64 {
    if x.is_sign_negative() || x.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(64, x.log10_ref()).to_f64()
}

/// Decimal string with the full configured digit count.
pub fn decimal_string(x: &Float, digits: u32) -> String {
    let (sign, mantissa, exp) = x.to_sign_string_exp(10, Some(digits as usize));
    if x.is_zero() {
        return "0".into();
    }
    let s = if sign { "-" } else { "" };
    match exp {
        Some(e) => format!("{s}0.{mantissa}e{e}"),
        None => format!("{s}{mantissa}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_floor_is_enforced() {
        assert!(PrecisionConfig::new(15).is_err());
        assert!(PrecisionConfig::new(16).is_ok());
        assert_eq!(PrecisionConfig::default().digits(), 100);
    }

    #[test]
    fn bits_cover_digits() {
        let prec = PrecisionConfig::new(100).unwrap();
        assert!(prec.bits() >= 333 + 64);
    }

    #[test]
    fn log10_of_floor() {
        let prec = PrecisionConfig::new(100).unwrap();
        let f = prec.controllability_floor();
        assert!((log10_f64(&f) + 50.0).abs() < 1e-9);
    }

    #[test]
    fn decimal_string_roundtrip_scale() {
        let prec = PrecisionConfig::new(50).unwrap();
        let x = prec.float(0.5);
        let s = decimal_string(&x, 50);
        assert!(s.starts_with("0.5"));
    }
}
