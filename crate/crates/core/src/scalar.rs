//! Scalar abstraction.
//!
//! Every numerical routine in the crate is generic over [`Real`]. The trait
//! builds on the `num-traits` arithmetic hierarchy and adds the handful of
//! elementary functions the solver actually evaluates, so that extended
//! precision types (see [`crate::dd::DoubleDouble`]) can plug in without
//! implementing the whole of `num_traits::Float`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{FromPrimitive, Num, NumAssign, ToPrimitive};

pub trait Real:
    Num
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Copy
    + PartialOrd
    + std::ops::Neg<Output = Self>
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Short name used in reports ("f64", "dd", ...).
    const NAME: &'static str;

    /// Unit roundoff of the type.
    fn epsilon() -> Self;
    fn pi() -> Self;
    fn euler() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self {
        self.sin() / self.cos()
    }
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: Self) -> Self;
    fn floor(self) -> Self;
    fn is_finite(self) -> bool;

    /// Lossless for every `f64` input on the types shipped here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("index fits in scalar")
    }

    #[inline]
    fn approx_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max(self, other: Self) -> Self {
        if other > self || self.is_nan_like() {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self || self.is_nan_like() {
            other
        } else {
            self
        }
    }

    #[inline]
    #[allow(clippy::eq_op)]
    fn is_nan_like(self) -> bool {
        self != self
    }
}

macro_rules! impl_real_prim {
    ($t:ty, $name:expr) => {
        impl Real for $t {
            const NAME: &'static str = $name;
            #[inline]
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            #[inline]
            fn pi() -> Self {
                core::f64::consts::PI as $t
            }
            #[inline]
            fn euler() -> Self {
                core::f64::consts::E as $t
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            #[inline]
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            #[inline]
            fn tan(self) -> Self {
                <$t>::tan(self)
            }
            #[inline]
            fn sinh(self) -> Self {
                <$t>::sinh(self)
            }
            #[inline]
            fn cosh(self) -> Self {
                <$t>::cosh(self)
            }
            #[inline]
            fn tanh(self) -> Self {
                <$t>::tanh(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            #[inline]
            fn powf(self, e: Self) -> Self {
                <$t>::powf(self, e)
            }
            #[inline]
            fn floor(self) -> Self {
                <$t>::floor(self)
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

impl_real_prim!(f32, "f32");
impl_real_prim!(f64, "f64");
