//! Scalar abstraction shared by every numeric module.
//!
//! Algebraic code (brackets, spans, iterated integrals of piecewise-linear
//! paths, Gram systems of polynomial kernels) only needs field operations and
//! runs unchanged over `f32`, `f64` or exact `Rational64`. Code that needs
//! transcendental functions asks for [`Real`] instead.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_rational::Rational64;
use num_traits::{Float, FloatConst, Num, Signed, Zero};

/// A field element usable by the algebraic layers.
pub trait Scalar:
    Copy
    + PartialOrd
    + Debug
    + Display
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Exact arithmetic: rank and feasibility decisions compare against zero.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    /// Nearest representable value (continued-fraction approximation for rationals).
    fn from_f64_approx(v: f64) -> Self;

    fn as_f64(self) -> f64;

    fn magnitude(self) -> Self;

    /// `|self| <= tol` for floating types, `self == 0` for exact ones.
    fn negligible(self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude().as_f64() <= tol
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Floating-point scalars: everything in [`Scalar`] plus elementary functions.
pub trait Real: Scalar + Float + FloatConst {}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_f64_approx(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
    fn magnitude(self) -> Self {
        self.abs()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn from_int(v: i64) -> Self {
        v as f32
    }
    fn from_f64_approx(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn magnitude(self) -> Self {
        self.abs()
    }
}

impl Scalar for Rational64 {
    const EXACT: bool = true;
    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }
    fn from_f64_approx(v: f64) -> Self {
        Rational64::approximate_float(v).unwrap_or_else(Rational64::zero)
    }
    fn as_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn magnitude(self) -> Self {
        Signed::abs(&self)
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Convert an exact rational (grades, dilation exponents) into any scalar.
pub fn rational_to<S: Scalar>(q: Rational64) -> S {
    S::from_ratio(*q.numer(), *q.denom())
}

/// Shortest round-trip decimal, switching to exponent form outside `[1e-5, 1e15)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}
