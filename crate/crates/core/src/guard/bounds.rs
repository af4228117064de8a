//! Column-ratio bounds, checking ranges and spiral enumeration.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;
use crate::spectral::Real;

/// A rational extended with both infinities. Variant order gives the
/// natural total order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extended {
    NegInf,
    Finite(BigRational),
    PosInf,
}

impl Extended {
    /// `num / den`, with `x / 0` read as an infinity of the sign of `x`.
    /// Returns `None` for `0 / 0`.
    pub fn ratio(num: &BigInt, den: &BigInt) -> Option<Self> {
        if den.is_zero() {
            match num.sign() {
                num_bigint::Sign::Plus => Some(Extended::PosInf),
                num_bigint::Sign::Minus => Some(Extended::NegInf),
                num_bigint::Sign::NoSign => None,
            }
        } else {
            Some(Extended::Finite(BigRational::new(num.clone(), den.clone())))
        }
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Extended::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::NegInf => f64::NEG_INFINITY,
            Extended::PosInf => f64::INFINITY,
            Extended::Finite(r) => rational_to_f64(r),
        }
    }

    /// Product with a finite scalar; the sign of `c` flips infinities.
    pub fn scale(&self, c: &BigInt) -> Self {
        match self {
            Extended::Finite(r) => Extended::Finite(r * BigRational::from_integer(c.clone())),
            _ if c.is_zero() => Extended::Finite(BigRational::zero()),
            Extended::PosInf if c.is_negative() => Extended::NegInf,
            Extended::NegInf if c.is_negative() => Extended::PosInf,
            other => other.clone(),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInf => f.write_str("-inf"),
            Extended::PosInf => f.write_str("+inf"),
            Extended::Finite(r) => write!(f, "{r}"),
        }
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    crate::exactmat::to_f64(&(n >> shift as usize)) / crate::exactmat::to_f64(&(d >> shift as usize))
}

/// Extremal same-row ratios `m_lj / m_lj'` over the rows of `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioBounds {
    pub min: Extended,
    pub max: Extended,
}

impl RatioBounds {
    pub fn contains(&self, r: &Extended) -> bool {
        self.min <= *r && *r <= self.max
    }

    pub fn width(&self) -> Option<BigRational> {
        Some(self.max.finite()? - self.min.finite()?)
    }
}

/// Min and max over rows `l` of `m[l][j] / m[l][jp]`.
///
/// Zero denominators count as signed infinities and `0/0` terms are
/// dropped; if every term is dropped the bounds are unconstrained.
pub fn column_ratio_bounds(m: &IntMatrix, j: usize, jp: usize) -> Result<RatioBounds> {
    let k = m.dim();
    if j >= k || jp >= k {
        return Err(Error::DimensionMismatch { expected: k, found: j.max(jp) + 1 });
    }
    if j == jp {
        let one = Extended::Finite(BigRational::one());
        return Ok(RatioBounds { min: one.clone(), max: one });
    }
    let ratios: Vec<Extended> = (0..k).filter_map(|l| Extended::ratio(m.get(l, j), m.get(l, jp))).collect();
    match (ratios.iter().min(), ratios.iter().max()) {
        (Some(lo), Some(hi)) => Ok(RatioBounds { min: lo.clone(), max: hi.clone() }),
        _ => Ok(RatioBounds { min: Extended::NegInf, max: Extended::PosInf }),
    }
}

fn ceil(r: &BigRational) -> BigInt {
    let (q, rem) = r.numer().div_mod_floor(r.denom());
    if rem.is_zero() {
        q
    } else {
        q + 1
    }
}

fn floor(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Admissible integer values for a suspect entry given one reference entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckingRange {
    /// `(row, col)` of the suspect entry, 0-based.
    pub target: (usize, usize),
    /// `(row, col)` of the reference entry, 0-based.
    pub reference: (usize, usize),
    pub lower: BigRational,
    pub upper: BigRational,
    pub lo: BigInt,
    pub hi: BigInt,
    /// Rounded `c_ref * tau^(j' - j)`.
    pub estimate: BigInt,
    /// Whether the unrounded estimate lies above `estimate`.
    pub estimate_above: bool,
}

impl CheckingRange {
    /// Number of integers in `[lo, hi]`.
    pub fn count(&self) -> BigInt {
        if self.hi < self.lo {
            BigInt::zero()
        } else {
            &self.hi - &self.lo + 1
        }
    }

    /// `upper - lower`.
    pub fn length(&self) -> BigRational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, v: &BigInt) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// Intersection with another range for the same target; keeps this
    /// range's estimate and reference.
    pub fn intersect(&self, other: &CheckingRange) -> CheckingRange {
        let mut r = self.clone();
        if other.lower > r.lower {
            r.lower = other.lower.clone();
        }
        if other.upper < r.upper {
            r.upper = other.upper.clone();
        }
        r.lo = ceil(&r.lower);
        r.hi = floor(&r.upper);
        r
    }

    pub fn spiral(&self) -> Spiral {
        Spiral::new(&self.estimate, self.estimate_above, &self.lo, &self.hi)
    }

    pub fn summary(&self) -> RangeSummary {
        RangeSummary {
            target: [self.target.0 + 1, self.target.1 + 1],
            reference: [self.reference.0 + 1, self.reference.1 + 1],
            lower: rational_to_f64(&self.lower),
            upper: rational_to_f64(&self.upper),
            lo: self.lo.to_string(),
            hi: self.hi.to_string(),
            count: self.count().to_string(),
            estimate: self.estimate.to_string(),
        }
    }
}

/// JSON view of a range with 1-based positions.
#[derive(Clone, Debug, Serialize)]
pub struct RangeSummary {
    pub target: [usize; 2],
    pub reference: [usize; 2],
    pub lower: f64,
    pub upper: f64,
    pub lo: String,
    pub hi: String,
    pub count: String,
    pub estimate: String,
}

/// `c_ref * tau^d` in fixed point.
pub fn tau_estimate(c_ref: &BigInt, tau: &Real, d: i64) -> Real {
    tau.powi(d).mul_int(c_ref)
}

/// Checking range for entry `target` from the reference entry `reference`
/// (same row) with value `c_ref`.
///
/// Without `tau` the estimate is the midpoint of the range.
pub fn checking_range(
    c_ref: &BigInt,
    bounds: &RatioBounds,
    target: (usize, usize),
    reference: (usize, usize),
    tau: Option<&Real>,
) -> Result<CheckingRange> {
    let (row, col) = target;
    let a = bounds.min.scale(c_ref);
    let b = bounds.max.scale(c_ref);
    let (lo_ext, hi_ext) = if a <= b { (a, b) } else { (b, a) };
    let (Some(lower), Some(upper)) = (lo_ext.finite().cloned(), hi_ext.finite().cloned()) else {
        return Err(Error::UnboundedRange { row, col });
    };
    let lo = ceil(&lower);
    let hi = floor(&upper);
    if lo > hi {
        return Err(Error::EmptyRange { row, col });
    }
    let (estimate, estimate_above) = match tau {
        Some(t) => {
            let d = reference.1 as i64 - target.1 as i64;
            let x = tau_estimate(c_ref, t, d);
            let e = x.round();
            let above = x >= Real::from_int(&e, x.bits());
            (e, above)
        }
        None => {
            let mid = (&lower + &upper) / BigRational::from_integer(BigInt::from(2));
            let e = floor(&(mid.clone() + BigRational::new(BigInt::one(), BigInt::from(2))));
            let above = mid >= BigRational::from_integer(e.clone());
            (e, above)
        }
    };
    Ok(CheckingRange { target, reference, lower, upper, lo, hi, estimate, estimate_above })
}

/// Integers of `[lo, hi]` ordered by distance from a real estimate.
///
/// The estimate is given as its rounding `center` plus the side on which the
/// unrounded value lies; at each distance the nearer side comes first. A
/// center outside the interval is clamped to it.
#[derive(Clone, Debug)]
pub struct Spiral {
    center: BigInt,
    up_first: bool,
    lo: BigInt,
    hi: BigInt,
    dist: BigInt,
    phase: u8,
}

impl Spiral {
    pub fn new(center: &BigInt, above: bool, lo: &BigInt, hi: &BigInt) -> Self {
        let (center, up_first) = match (center.cmp(lo), center.cmp(hi)) {
            (Ordering::Less, _) => (lo.clone(), true),
            (_, Ordering::Greater) => (hi.clone(), false),
            _ => (center.clone(), above),
        };
        Self { center, up_first, lo: lo.clone(), hi: hi.clone(), dist: BigInt::zero(), phase: 0 }
    }
}

impl Iterator for Spiral {
    type Item = BigInt;

    fn next(&mut self) -> Option<BigInt> {
        if self.lo > self.hi {
            return None;
        }
        loop {
            if self.phase == 0 {
                self.phase = 1;
                if self.dist.is_zero() {
                    self.dist = BigInt::one();
                    return Some(self.center.clone());
                }
            }
            let up = &self.center + &self.dist;
            let down = &self.center - &self.dist;
            if up > self.hi && down < self.lo {
                return None;
            }
            let (first, second) = if self.up_first { (up, down) } else { (down, up) };
            let candidate = if self.phase == 1 {
                self.phase = 2;
                first
            } else {
                self.phase = 1;
                self.dist += 1;
                second
            };
            if self.lo <= candidate && candidate <= self.hi {
                return Some(candidate);
            }
        }
    }
}
