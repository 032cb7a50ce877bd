//! Scalar fields the coefficient ring can be built over.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed};

/// A field of scalars. Exact rationals are the default; `f64` is available
/// for quick numeric evaluation.
pub trait Scalar: Num + Neg<Output = Self> + Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn from_rational(r: &BigRational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    /// Textual form used by the canonical printer.
    fn to_text(&self) -> String;

    fn is_negative(&self) -> bool;

    /// Whether arithmetic is exact (zero tests are meaningful).
    fn is_exact() -> bool;
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_text(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_text(&self) -> String {
        format!("{}", self)
    }

    fn is_negative(&self) -> bool {
        *self < 0.0
    }

    fn is_exact() -> bool {
        false
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
