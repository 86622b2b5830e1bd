//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! giving roughly 106 bits of significand.
//!
//! Only what the solver needs is here: the field operations, square root,
//! and the elementary functions used by the benchmark problems. Algorithms
//! follow the classic error-free transformations (Dekker, Knuth) with
//! `f64::mul_add` for the exact product.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};

use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

use crate::scalar::Real;

#[derive(Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: DoubleDouble =
    DoubleDouble::new_unchecked(std::f64::consts::LN_2, 2.3190468138462996e-17);
const PI: DoubleDouble = DoubleDouble::new_unchecked(std::f64::consts::PI, 1.2246467991473532e-16);
const E: DoubleDouble = DoubleDouble::new_unchecked(std::f64::consts::E, 1.4456468917292502e-16);
const EPS: f64 = 4.930380657631324e-32; // 2^-104

impl DoubleDouble {
    const fn new_unchecked(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    /// Normalises an arbitrary pair.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    pub const fn from_f64_exact(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (h, l) = quick_two_sum(p, e);
        DoubleDouble { hi: h, lo: l }
    }

    fn ldexp(self, n: i32) -> Self {
        let s = 2f64.powi(n);
        DoubleDouble {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn square(self) -> Self {
        self * self
    }

    fn is_zero_dd(self) -> bool {
        self.hi == 0.0
    }

    fn round_nearest(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            // hi already integral; round the tail
            let lo = self.lo.round();
            let (h, l) = quick_two_sum(hi, lo);
            let mut r = DoubleDouble { hi: h, lo: l };
            if (self - r).abs().hi == 0.5 && self.lo < 0.0 {
                r -= DoubleDouble::one();
            }
            r
        } else {
            let mut hi = hi;
            if (hi - self.hi).abs() == 0.5 && self.lo < 0.0 {
                hi -= 1.0;
            }
            DoubleDouble::from_f64_exact(hi)
        }
    }

    // Taylor series for exp on |r| tiny.
    fn exp_taylor(r: Self) -> Self {
        let mut term = r;
        let mut sum = DoubleDouble::one() + r;
        let mut n = 2.0;
        loop {
            term = term * r / DoubleDouble::from_f64_exact(n);
            sum += term;
            if term.hi.abs() <= EPS * sum.hi.abs() {
                break;
            }
            n += 1.0;
            if n > 60.0 {
                break;
            }
        }
        sum
    }

    // sin and cos on |r| <= pi/4.
    fn sin_cos_taylor(r: Self) -> (Self, Self) {
        let r2 = r.square();
        let mut s = r;
        let mut term = r;
        let mut k = 1.0;
        loop {
            term = -(term * r2) / DoubleDouble::from_f64_exact((k + 1.0) * (k + 2.0));
            s += term;
            k += 2.0;
            if term.hi.abs() <= EPS * s.hi.abs().max(1e-300) || k > 80.0 {
                break;
            }
        }
        let mut c = DoubleDouble::one();
        let mut term = DoubleDouble::one();
        let mut k = 0.0;
        loop {
            term = -(term * r2) / DoubleDouble::from_f64_exact((k + 1.0) * (k + 2.0));
            c += term;
            k += 2.0;
            if term.hi.abs() <= EPS || k > 80.0 {
                break;
            }
        }
        (s, c)
    }

    fn sin_cos(self) -> (Self, Self) {
        if !self.hi.is_finite() {
            return (Self::nan(), Self::nan());
        }
        let half_pi = PI.ldexp(-1);
        let q = (self / half_pi).round_nearest();
        let r = self - q * half_pi;
        let (s, c) = Self::sin_cos_taylor(r);
        match (q.hi.rem_euclid(4.0)) as i32 {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn nan() -> Self {
        DoubleDouble {
            hi: f64::NAN,
            lo: f64::NAN,
        }
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (h, l) = quick_two_sum(s1, s2);
        DoubleDouble { hi: h, lo: l }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p, e);
        DoubleDouble { hi: h, lo: l }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return DoubleDouble::from_f64_exact(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        DoubleDouble { hi: h, lo: l } + DoubleDouble::from_f64_exact(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        let q = self / b;
        let t = if q.hi >= 0.0 {
            q.floor_dd()
        } else {
            -(-q).floor_dd()
        };
        self - t * b
    }
}

impl DoubleDouble {
    fn floor_dd(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (h, l) = quick_two_sum(hi, self.lo.floor());
            DoubleDouble { hi: h, lo: l }
        } else {
            DoubleDouble::from_f64_exact(hi)
        }
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DoubleDouble {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::from_f64_exact(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble::from_f64_exact(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDoubleDoubleError;

impl fmt::Display for ParseDoubleDoubleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid double-double literal")
    }
}

impl std::error::Error for ParseDoubleDoubleError {}

impl Num for DoubleDouble {
    type FromStrRadixErr = ParseDoubleDoubleError;

    /// Decimal only; accepts an optional sign, fraction and exponent.
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseDoubleDoubleError);
        }
        let s = s.trim();
        let (neg, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(p) => (
                &body[..p],
                body[p + 1..]
                    .parse::<i32>()
                    .map_err(|_| ParseDoubleDoubleError)?,
            ),
            None => (body, 0),
        };
        if mant.is_empty() {
            return Err(ParseDoubleDoubleError);
        }
        let ten = DoubleDouble::from_f64_exact(10.0);
        let mut acc = DoubleDouble::zero();
        let mut scale = exp;
        let mut seen_dot = false;
        let mut digits = 0;
        for c in mant.chars() {
            match c {
                '0'..='9' => {
                    acc = acc * ten + DoubleDouble::from_f64_exact(c as u8 as f64 - 48.0);
                    digits += 1;
                    if seen_dot {
                        scale -= 1;
                    }
                }
                '.' if !seen_dot => seen_dot = true,
                _ => return Err(ParseDoubleDoubleError),
            }
        }
        if digits == 0 {
            return Err(ParseDoubleDoubleError);
        }
        let p = ten.powi(scale.abs());
        let v = if scale >= 0 { acc * p } else { acc / p };
        Ok(if neg { -v } else { v })
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        // the rounding error of the conversion is exactly representable
        let lo = (n - hi as i64) as f64;
        Some(DoubleDouble::new(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(DoubleDouble::new(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(DoubleDouble::from_f64_exact(x))
    }
    fn from_f32(x: f32) -> Option<Self> {
        Some(DoubleDouble::from_f64_exact(x as f64))
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.floor_dd();
        let v = t.hi as i128 + t.lo as i128;
        i64::try_from(v).ok()
    }
    fn to_u64(&self) -> Option<u64> {
        let t = self.floor_dd();
        let v = t.hi as i128 + t.lo as i128;
        u64::try_from(v).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DoubleDouble::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a DoubleDouble> for DoubleDouble {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.fold(DoubleDouble::zero(), |a, b| a + *b)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&(self.hi + self.lo), f)
    }
}

impl fmt::LowerExp for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerExp::fmt(&(self.hi + self.lo), f)
    }
}

impl Real for DoubleDouble {
    const NAME: &'static str = "dd";

    fn epsilon() -> Self {
        DoubleDouble::from_f64_exact(EPS)
    }
    fn pi() -> Self {
        PI
    }
    fn euler() -> Self {
        E
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::zero()
            } else {
                Self::nan()
            };
        }
        // one Newton step from the f64 root
        let x = self.hi.sqrt();
        let ax = DoubleDouble::from_f64_exact(x);
        let r = self - ax.square();
        ax + DoubleDouble::from_f64_exact(r.hi / (2.0 * x))
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return DoubleDouble::from_f64_exact(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::zero();
        }
        if self.is_zero_dd() {
            return Self::one();
        }
        let m = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(m)).ldexp(-4);
        let mut s = Self::exp_taylor(r);
        for _ in 0..4 {
            s = s.square();
        }
        s.ldexp(m as i32)
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                DoubleDouble::from_f64_exact(f64::NEG_INFINITY)
            } else {
                Self::nan()
            };
        }
        // Newton on exp(y) = x, twice from the f64 estimate
        let mut y = DoubleDouble::from_f64_exact(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Self::one();
        }
        y
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn sinh(self) -> Self {
        if self.hi.abs() < 0.5 {
            let x2 = self.square();
            let mut term = self;
            let mut s = self;
            let mut k = 1.0;
            loop {
                term = term * x2 / DoubleDouble::from_f64_exact((k + 1.0) * (k + 2.0));
                s += term;
                k += 2.0;
                if term.hi.abs() <= EPS * s.hi.abs() || k > 80.0 {
                    break;
                }
            }
            s
        } else {
            let e = self.exp();
            (e - Self::one() / e).ldexp(-1)
        }
    }

    fn cosh(self) -> Self {
        let e = self.exp();
        (e + Self::one() / e).ldexp(-1)
    }

    fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            k >>= 1;
        }
        if n < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    fn powf(self, e: Self) -> Self {
        if e.floor_dd() == e && e.hi.abs() < 1e9 {
            return self.powi(e.hi as i32 + e.lo as i32);
        }
        (e * self.ln()).exp()
    }

    fn floor(self) -> Self {
        self.floor_dd()
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    fn lit(x: f64) -> Self {
        DoubleDouble::from_f64_exact(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(x: f64) -> DoubleDouble {
        DoubleDouble::lit(x)
    }

    fn close(a: DoubleDouble, b: DoubleDouble, tol: f64) -> bool {
        (a - b).abs().hi <= tol * b.abs().hi.max(1.0)
    }

    #[test]
    fn third_times_three_is_one() {
        let third = dd(1.0) / dd(3.0);
        assert!(third.lo != 0.0);
        assert!(close(third * dd(3.0), dd(1.0), 1e-31));
    }

    #[test]
    fn sqrt_two_squared() {
        let r = dd(2.0).sqrt();
        assert!(close(r * r, dd(2.0), 1e-31));
    }

    #[test]
    fn exp_ln_roundtrip() {
        for &x in &[-3.5, -0.1, 0.3, 1.0, 7.25] {
            let y = dd(x).exp().ln();
            assert!(close(y, dd(x), 1e-30), "x = {x}");
        }
        assert!(close(dd(1.0).exp(), E, 1e-30));
    }

    #[test]
    fn trig_identities() {
        for &x in &[0.0, 0.4, 1.3, 2.9, -5.1, 10.0] {
            let (s, c) = dd(x).sin_cos();
            assert!(close(s * s + c * c, dd(1.0), 1e-30), "x = {x}");
            assert!((s.hi - x.sin()).abs() < 1e-15);
        }
        assert!(PI.sin().abs().hi < 1e-31);
    }

    #[test]
    fn sinh_matches_identity() {
        for &x in &[0.2, 0.49, 0.8, 3.0] {
            let v = dd(x);
            let lhs = v.cosh().square() - v.sinh().square();
            assert!(close(lhs, dd(1.0), 1e-29), "x = {x}");
        }
    }

    #[test]
    fn parse_decimal() {
        let v = DoubleDouble::from_str_radix("0.1", 10).unwrap();
        assert!(close(v * dd(10.0), dd(1.0), 1e-31));
        let w = DoubleDouble::from_str_radix("-2.5e2", 10).unwrap();
        assert_eq!(w.approx_f64(), -250.0);
        assert!(DoubleDouble::from_str_radix("1.2.3", 10).is_err());
    }
}
