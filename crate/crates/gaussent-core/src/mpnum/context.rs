//! Working-precision configuration shared by all numerical routines.

use crate::error::{Error, Result};
use rug::ops::Pow;
use rug::{Assign, Float, Rational};

/// Working precision plus the derived tolerances used throughout the crate.
///
/// `decimal_digits` is the nominal precision; `psd_tol_exponent` sets the
/// slack `10^-e` (relative to the matrix norm) accepted when deciding
/// positive semidefiniteness, and `convergence_exponent` sets the iteration
/// stopping target for eigensolvers and quadrature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionContext {
    decimal_digits: u32,
    psd_tol_exponent: u32,
    convergence_exponent: u32,
}

impl PrecisionContext {
    pub const MIN_DIGITS: u32 = 32;

    /// Context with explicit knobs. `decimal_digits >= 32` and both exponents
    /// must be strictly below it.
    pub fn new(decimal_digits: u32, psd_tol_exponent: u32, convergence_exponent: u32) -> Result<Self> {
        if decimal_digits < Self::MIN_DIGITS {
            return Err(Error::InvalidPrecision(format!(
                "decimal_digits must be >= {}, got {decimal_digits}",
                Self::MIN_DIGITS
            )));
        }
        if psd_tol_exponent >= decimal_digits {
            return Err(Error::InvalidPrecision(format!(
                "psd_tol_exponent ({psd_tol_exponent}) must be < decimal_digits ({decimal_digits})"
            )));
        }
        if convergence_exponent >= decimal_digits {
            return Err(Error::InvalidPrecision(format!(
                "convergence_exponent ({convergence_exponent}) must be < decimal_digits ({decimal_digits})"
            )));
        }
        Ok(Self {
            decimal_digits,
            psd_tol_exponent,
            convergence_exponent,
        })
    }

    /// Context with the standard tolerance split: PSD slack at half the
    /// digits, convergence target ten digits short of full precision.
    pub fn with_digits(decimal_digits: u32) -> Result<Self> {
        Self::new(decimal_digits, decimal_digits / 2, decimal_digits - 10)
    }

    /// Default for spectra and negativity work: 64 digits.
    pub fn negativity() -> Self {
        Self::with_digits(64).expect("static default")
    }

    /// Default for separability flows: 320 digits. Flow margins in the
    /// vacuum can sit below 1e-29 and the constructive decompositions lose
    /// digits through pseudoinverses, so this errs on the generous side.
    pub fn separability() -> Self {
        Self::with_digits(320).expect("static default")
    }

    pub fn decimal_digits(&self) -> u32 {
        self.decimal_digits
    }

    pub fn psd_tol_exponent(&self) -> u32 {
        self.psd_tol_exponent
    }

    pub fn convergence_exponent(&self) -> u32 {
        self.convergence_exponent
    }

    /// Binary precision backing the decimal digit count, with guard bits.
    pub fn prec_bits(&self) -> u32 {
        // log2(10) = 3.3219...; 32 guard bits.
        (self.decimal_digits as f64 * 3.3219280948873626).ceil() as u32 + 32
    }

    pub fn real<T>(&self, v: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.prec_bits(), v)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.prec_bits())
    }

    pub fn one(&self) -> Float {
        self.real(1u32)
    }

    pub fn pi(&self) -> Float {
        self.real(rug::float::Constant::Pi)
    }

    /// 10^-e at working precision.
    pub fn pow10_neg(&self, e: u32) -> Float {
        Float::with_val(self.prec_bits(), 10u32).pow(-(e as i32))
    }

    /// PSD decision slack, relative to a matrix norm of 1.
    pub fn psd_tol(&self) -> Float {
        self.pow10_neg(self.psd_tol_exponent)
    }

    /// Iteration convergence target, relative.
    pub fn conv_tol(&self) -> Float {
        self.pow10_neg(self.convergence_exponent)
    }

    /// Rank cutoff for pseudoinverses: singular values below
    /// `10^-(digits/2) * sigma_max` are treated as zero.
    pub fn rank_tol(&self) -> Float {
        self.pow10_neg(self.decimal_digits / 2)
    }

    /// Threshold below which a negativity contribution is no longer
    /// trustworthy at this precision.
    pub fn negativity_floor(&self) -> Float {
        self.pow10_neg(self.decimal_digits.saturating_sub(15))
    }

    /// Certification tolerance for symplectic transforms, relative to the
    /// norm of the symplectic form.
    pub fn symplectic_tol(&self) -> Float {
        self.pow10_neg(self.decimal_digits.saturating_sub(10))
    }

    pub fn real_from_str(&self, s: &str) -> Result<Float> {
        let parsed = Float::parse(s)
            .map_err(|e| Error::InvalidArgument(format!("cannot parse real '{s}': {e}")))?;
        Ok(Float::with_val(self.prec_bits(), parsed))
    }

    pub fn real_from_rational(&self, r: &Rational) -> Float {
        Float::with_val(self.prec_bits(), r)
    }
}
