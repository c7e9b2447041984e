//! Numeric abstraction shared by the energy models.
//!
//! Models are generic over [`Scalar`] so the same builders run in `f64` for
//! sampling and in exact rationals when an energy identity has to hold bit for
//! bit. Samplers convert coefficients to `f64` internally and re-evaluate the
//! final energies in the model's own scalar type.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Coefficient type of a QUBO or Ising model.
pub trait Scalar:
    Num
    + Signed
    + Copy
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion used by the samplers.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_finite_value(self) -> bool;

    fn from_usize_exact(v: usize) -> Self {
        Self::from_usize(v).expect("integer fits scalar")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    /// Total order used for sorting energies. NaN never occurs in validated
    /// models, so incomparable values are treated as equal.
    fn total_cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl Scalar for f64 {
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Rational64 {
    fn is_finite_value(self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parses_and_prints_fractions() {
        let q: Rational64 = "3/4".parse().unwrap();
        assert_eq!(q, Rational64::new(3, 4));
        assert_eq!(q.to_string(), "3/4");
        assert_eq!(Rational64::two(), Rational64::from_integer(2));
        assert!((q.to_f64_lossy() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn float_finiteness() {
        assert!(1.0f64.is_finite_value());
        assert!(!f64::INFINITY.is_finite_value());
        assert!(!f32::NAN.is_finite_value());
    }
}
