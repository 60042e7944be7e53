//! Field-like scalar types shared by every algorithm in the crate.
//!
//! Three instantiations are provided: exact Gaussian rationals, floating
//! complex numbers, and first-order dual numbers over either of them. All
//! linear algebra is written once against [`Scalar`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

/// Exact complex number with arbitrary-precision rational parts.
///
/// `BigRational` keeps numerator and denominator coprime with a positive
/// denominator, so every value is in canonical form.
pub type GaussianRational = Complex<BigRational>;

/// Default zero threshold for floating mode.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
}

/// A commutative field-like scalar.
///
/// Arithmetic operators are unchecked; callers that divide by data-dependent
/// values go through [`Scalar::checked_div`] or test the divisor first.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact and `tol` arguments are ignored.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;

    /// Modulus of the (primal) value, used to rank pivots and scale tolerances.
    fn modulus(&self) -> f64;

    /// Zero test: exact comparison in exact modes, `|z| <= tol` otherwise.
    fn is_zero_tol(&self, tol: f64) -> bool;

    /// Approximate complex value of the primal part.
    fn to_c64(&self) -> Complex64;

    fn checked_div(&self, rhs: &Self, tol: f64) -> Result<Self, ScalarError> {
        if rhs.is_zero_tol(tol) {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(self.clone() / rhs.clone())
        }
    }

    fn checked_inv(&self, tol: f64) -> Result<Self, ScalarError> {
        Self::one().checked_div(self, tol)
    }
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Scalar for GaussianRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(rat(0), rat(0))
    }

    fn one() -> Self {
        Complex::new(rat(1), rat(0))
    }

    fn from_i64(v: i64) -> Self {
        Complex::new(rat(v), rat(0))
    }

    fn modulus(&self) -> f64 {
        ratio_to_f64(&self.re).hypot(ratio_to_f64(&self.im))
    }

    fn is_zero_tol(&self, _tol: f64) -> bool {
        num_traits::Zero::is_zero(&self.re) && num_traits::Zero::is_zero(&self.im)
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn is_zero_tol(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Gaussian rational `re_num/re_den + i·im_num/im_den`.
///
/// Panics if a denominator is zero.
pub fn gaussian(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> GaussianRational {
    Complex::new(
        BigRational::new(re_num.into(), re_den.into()),
        BigRational::new(im_num.into(), im_den.into()),
    )
}

/// Real rational `num/den` as a Gaussian rational.
pub fn rational(num: i64, den: i64) -> GaussianRational {
    gaussian(num, den, 0, 1)
}

/// First-order dual number `value + ε·deriv` with `ε² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S> {
    pub value: S,
    pub deriv: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(value: S, deriv: S) -> Self {
        Dual { value, deriv }
    }

    /// A constant: zero derivative.
    pub fn constant(value: S) -> Self {
        Dual { value, deriv: S::zero() }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let deriv = self.value.clone() * rhs.deriv + self.deriv * rhs.value.clone();
        Dual::new(self.value * rhs.value, deriv)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let value = self.value.clone() / rhs.value.clone();
        // (a/b)' = (a' - (a/b) b') / b
        let deriv = (self.deriv - value.clone() * rhs.deriv) / rhs.value;
        Dual::new(value, deriv)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.value, -self.deriv)
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    const EXACT: bool = S::EXACT;

    fn zero() -> Self {
        Dual::constant(S::zero())
    }

    fn one() -> Self {
        Dual::constant(S::one())
    }

    fn from_i64(v: i64) -> Self {
        Dual::constant(S::from_i64(v))
    }

    fn modulus(&self) -> f64 {
        self.value.modulus()
    }

    // Branch decisions follow the primal value so that the derivative is
    // taken along the same branch as the base computation.
    fn is_zero_tol(&self, tol: f64) -> bool {
        self.value.is_zero_tol(tol)
    }

    fn to_c64(&self) -> Complex64 {
        self.value.to_c64()
    }
}
