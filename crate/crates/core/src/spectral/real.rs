//! Fixed-point reals and complex numbers backed by big integers.
//!
//! A [`Real`] is `mantissa * 2^-bits`. The integer part is unbounded, so the
//! absolute resolution is `2^-bits` regardless of magnitude. Operands of a
//! binary operation must share `bits`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Real {
    mant: BigInt,
    bits: u32,
}

impl Real {
    pub fn zero(bits: u32) -> Self {
        Self { mant: BigInt::zero(), bits }
    }

    pub fn one(bits: u32) -> Self {
        Self { mant: BigInt::from(1) << bits, bits }
    }

    pub fn from_int(v: &BigInt, bits: u32) -> Self {
        Self { mant: v << bits, bits }
    }

    pub fn from_i64(v: i64, bits: u32) -> Self {
        Self::from_int(&BigInt::from(v), bits)
    }

    pub fn from_rational(v: &BigRational, bits: u32) -> Self {
        Self { mant: (v.numer() << bits) / v.denom(), bits }
    }

    pub fn from_f64(v: f64, bits: u32) -> Self {
        if v == 0.0 || !v.is_finite() {
            return Self::zero(bits);
        }
        let (m, e, s) = num_traits::Float::integer_decode(v);
        let mut mant = BigInt::from(m);
        let shift = e as i64 + bits as i64;
        if shift >= 0 {
            mant <<= shift as usize;
        } else {
            mant >>= (-shift) as usize;
        }
        if s < 0 {
            mant = -mant;
        }
        Self { mant, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.mant.to_f64().unwrap_or(f64::INFINITY);
        if m.is_finite() {
            let h = (self.bits / 2) as i32;
            m * 2f64.powi(-h) * 2f64.powi(h - self.bits as i32)
        } else {
            let shift = self.mant.bits().saturating_sub(64);
            let m = (&self.mant >> shift as usize).to_f64().unwrap_or(f64::NAN);
            m * 2f64.powi(shift as i32 - self.bits as i32)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self { mant: self.mant.abs(), bits: self.bits }
    }

    pub fn neg(&self) -> Self {
        Self { mant: -&self.mant, bits: self.bits }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        Self { mant: &self.mant + &o.mant, bits: self.bits }
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        Self { mant: &self.mant - &o.mant, bits: self.bits }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        Self { mant: (&self.mant * &o.mant) >> self.bits as usize, bits: self.bits }
    }

    pub fn mul_int(&self, v: &BigInt) -> Self {
        Self { mant: &self.mant * v, bits: self.bits }
    }

    /// `self * 2^e`, exact for `e >= 0`.
    pub fn mul_pow2(&self, e: i64) -> Self {
        let mant = if e >= 0 { &self.mant << e as usize } else { &self.mant >> (-e) as usize };
        Self { mant, bits: self.bits }
    }

    /// Panics on division by zero.
    pub fn div(&self, o: &Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        Self { mant: (&self.mant << self.bits as usize) / &o.mant, bits: self.bits }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of a negative number");
        Self { mant: num_integer::Roots::sqrt(&(&self.mant << self.bits as usize)), bits: self.bits }
    }

    /// Integer power, negative exponents through the reciprocal.
    pub fn powi(&self, e: i64) -> Self {
        let mut acc = Self::one(self.bits);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(self);
        }
        if e < 0 {
            Self::one(self.bits).div(&acc)
        } else {
            acc
        }
    }

    pub fn floor(&self) -> BigInt {
        &self.mant >> self.bits as usize
    }

    /// Nearest integer, halves rounded up.
    pub fn round(&self) -> BigInt {
        let half = BigInt::from(1) << (self.bits as usize).saturating_sub(1);
        (&self.mant + half) >> self.bits as usize
    }

    /// Exact dyadic value as a rational.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mant.clone(), BigInt::from(1) << self.bits as usize)
    }

    /// Decimal rendering truncated to `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scaled = (self.mant.abs() * BigInt::from(10).pow(digits as u32)) >> self.bits as usize;
        let s = scaled.to_string();
        let s = if s.len() <= digits {
            format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
        } else {
            s
        };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if self.is_negative() && !scaled.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.bits, other.bits);
        self.mant.cmp(&other.mant)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(f.precision().unwrap_or(20)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Self { re, im }
    }

    pub fn zero(bits: u32) -> Self {
        Self::new(Real::zero(bits), Real::zero(bits))
    }

    pub fn from_f64(re: f64, im: f64, bits: u32) -> Self {
        Self::new(Real::from_f64(re, bits), Real::from_f64(im, bits))
    }

    pub fn real(re: Real) -> Self {
        let bits = re.bits();
        Self::new(re, Real::zero(bits))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    pub fn norm_sqr(&self) -> Real {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Panics when `o` is zero.
    pub fn div(&self, o: &Self) -> Self {
        let d = o.norm_sqr();
        let re = self.re.mul(&o.re).add(&self.im.mul(&o.im)).div(&d);
        let im = self.im.mul(&o.re).sub(&self.re.mul(&o.im)).div(&d);
        Self::new(re, im)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}
