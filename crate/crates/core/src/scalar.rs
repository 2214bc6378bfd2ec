//! Scalar abstractions shared by the geometry kernels.
//!
//! Everything in [`crate::geometry`] and the frame construction is written against
//! [`Scalar`], so the same code runs on plain floats and on truncated Taylor
//! jets ([`crate::jet::Jet`]). Branching decisions (pivot choice, sign
//! conventions) always look at the real part returned by [`Scalar::re`].

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, FloatConst};

/// Primitive floating point types usable as the base field.
pub trait Real:
    Float + FloatConst + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

/// A commutative ring element with the handful of analytic functions the
/// expression language and the frame construction need.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    type Real: Real;

    fn from_real(r: Self::Real) -> Self;

    /// Real part (the value at the expansion point for jets).
    fn re(&self) -> Self::Real;

    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;

    fn recip(self) -> Self;

    fn lit(v: f64) -> Self {
        Self::from_real(Self::Real::from_f64(v))
    }

    fn zero() -> Self {
        Self::lit(0.0)
    }

    fn one() -> Self {
        Self::lit(1.0)
    }

    fn re_f64(&self) -> f64 {
        self.re().as_f64()
    }

    /// Integer power by repeated squaring; exact for jets.
    fn powu(self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }

    fn scale(self, k: Self::Real) -> Self {
        self * Self::from_real(k)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;

            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }
            #[inline]
            fn re(&self) -> $t {
                *self
            }
            #[inline]
            fn sqrt(self) -> Self {
                Float::sqrt(self)
            }
            #[inline]
            fn sin(self) -> Self {
                Float::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                Float::cos(self)
            }
            #[inline]
            fn exp(self) -> Self {
                Float::exp(self)
            }
            #[inline]
            fn sinh(self) -> Self {
                Float::sinh(self)
            }
            #[inline]
            fn cosh(self) -> Self {
                Float::cosh(self)
            }
            #[inline]
            fn recip(self) -> Self {
                Float::recip(self)
            }
        }

        impl Real for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
