use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer polynomial, coefficients in ascending powers with no trailing zeros.
///
/// Characteristic polynomials built by this crate are monic; general integer
/// polynomials only show up as intermediate results (remainders, family
/// constructions before normalisation).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `c * z^power`.
    pub fn monomial(c: BigInt, power: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `z^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// `z^deg f(1/z)`: the coefficient list reversed.
    pub fn reciprocal(&self) -> Self {
        Self::new(self.coeffs.iter().rev().cloned().collect())
    }

    pub fn eval(&self, z: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * z + c)
    }

    pub fn eval_f64(&self, z: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * z + to_f64(c))
    }

    /// Division by a monic divisor: `self = q * g + r` with `deg r < deg g`.
    pub fn divide(&self, g: &Self) -> Result<(Self, Self)> {
        if g.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        if !g.is_monic() {
            return Err(Error::NotMonic);
        }
        let dg = g.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dg {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dg];
        for shift in (0..quot.len()).rev() {
            let c = rem[shift + dg].clone();
            if c.is_zero() {
                continue;
            }
            for (i, gc) in g.coeffs.iter().enumerate() {
                rem[shift + i] -= &c * gc;
            }
            quot[shift] = c;
        }
        rem.truncate(dg);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Content-free version with a positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let g = self
            .coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if self.coeffs.last().unwrap().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        Self::new(self.coeffs.iter().map(|c| c / &g * &sign).collect())
    }

    /// Greatest common divisor over the rationals, returned as a primitive
    /// integer polynomial with positive leading coefficient.
    pub fn gcd(&self, other: &Self) -> Self {
        let a = RatPoly::from_int(self);
        let b = RatPoly::from_int(other);
        a.gcd(&b).to_primitive_int()
    }

    /// Square-free factorisation over the rationals (Yun's algorithm).
    ///
    /// Returns `(factor, multiplicity)` pairs with primitive integer factors
    /// so that `self` equals their product up to a constant.
    pub fn squarefree_decomposition(&self) -> Vec<(Self, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = RatPoly::from_int(self).monic();
        let df = f.derivative();
        let b = f.gcd(&df);
        let mut c = f.div_exact(&b);
        let mut d = df.div_exact(&b).sub(&c.derivative());
        let mut i = 1;
        while c.degree() > 0 {
            let a = c.gcd(&d);
            c = c.div_exact(&a);
            d = d.div_exact(&a).sub(&c.derivative());
            if a.degree() > 0 {
                out.push((a.to_primitive_int(), i));
            }
            i += 1;
        }
        out
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{i}")?,
            }
        }
        Ok(())
    }
}

pub(crate) fn to_f64(c: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN)
}

/// Dense polynomial over the rationals, used for gcd computations only.
#[derive(Debug, Clone, PartialEq)]
struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    fn from_int(p: &IntPolynomial) -> Self {
        Self::new(
            p.coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }

    /// Degree with the zero polynomial mapped to 0 as well.
    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn monic(&self) -> Self {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lead) => Self::new(self.coeffs.iter().map(|c| c / lead).collect()),
        }
    }

    fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        Self::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).unwrap_or(&zero) - other.coeffs.get(i).unwrap_or(&zero)
                })
                .collect(),
        )
    }

    fn div_rem(&self, g: &Self) -> (Self, Self) {
        assert!(!g.is_zero(), "division by zero polynomial");
        let dg = g.coeffs.len() - 1;
        let lead = g.coeffs.last().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dg {
            return (Self::new(Vec::new()), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dg];
        for shift in (0..quot.len()).rev() {
            let c = &rem[shift + dg] / lead;
            if c.is_zero() {
                continue;
            }
            for (i, gc) in g.coeffs.iter().enumerate() {
                rem[shift + i] -= &c * gc;
            }
            quot[shift] = c;
        }
        rem.truncate(dg);
        (Self::new(quot), Self::new(rem))
    }

    fn div_exact(&self, g: &Self) -> Self {
        self.div_rem(g).0
    }

    fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    fn to_primitive_int(&self) -> IntPolynomial {
        if self.is_zero() {
            return IntPolynomial::zero();
        }
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        IntPolynomial::new(ints).primitive_part()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divide_out_trivial_factor() {
        // z^7 - z^6 - z^5 - z^4 - z^3 + 1 = (z + 1)(z^6 - 2z^5 + z^4 - 2z^3 + z^2 - z + 1)
        let f = IntPolynomial::from_i64(&[1, 0, 0, -1, -1, -1, -1, 1]);
        let (q, r) = f.divide(&IntPolynomial::from_i64(&[1, 1])).unwrap();
        assert_eq!(q, IntPolynomial::from_i64(&[1, -1, 1, -2, 1, -2, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn divide_by_one_and_by_linear() {
        let f = IntPolynomial::from_i64(&[3, 0, -2, 1]);
        let (q, r) = f.divide(&IntPolynomial::one()).unwrap();
        assert_eq!((q, r), (f.clone(), IntPolynomial::zero()));
        let sq = IntPolynomial::from_i64(&[-1, 0, 1]);
        let (q, r) = sq.divide(&IntPolynomial::from_i64(&[-1, 1])).unwrap();
        assert_eq!(q, IntPolynomial::from_i64(&[1, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn divide_reconstructs_dividend() {
        let f = IntPolynomial::from_i64(&[5, -3, 7, 2, 1]);
        let g = IntPolynomial::from_i64(&[2, -1, 1]);
        let (q, r) = f.divide(&g).unwrap();
        assert!(r.degree().map_or(true, |d| d < 2));
        assert_eq!(q.mul(&g).add(&r), f);
    }

    #[test]
    fn divide_requires_monic() {
        let f = IntPolynomial::from_i64(&[1, 1, 1]);
        assert_eq!(f.divide(&IntPolynomial::from_i64(&[1, 2])), Err(Error::NotMonic));
        assert_eq!(f.divide(&IntPolynomial::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn gcd_and_squarefree() {
        // (z - 1)^2 (z + 2)
        let a = IntPolynomial::from_i64(&[-1, 1]);
        let b = IntPolynomial::from_i64(&[2, 1]);
        let f = a.mul(&a).mul(&b);
        assert_eq!(f.gcd(&f.derivative()), a);
        let parts = f.squarefree_decomposition();
        assert_eq!(parts, vec![(b.clone(), 1), (a.clone(), 2)]);
        let g = IntPolynomial::from_i64(&[-1, -1, 1]);
        assert_eq!(g.squarefree_decomposition(), vec![(g.clone(), 1)]);
    }

    #[test]
    fn display() {
        let f = IntPolynomial::from_i64(&[-1, -2, -1, -1, 1]);
        assert_eq!(f.to_string(), "z^4 - z^3 - z^2 - 2z - 1");
        assert_eq!(IntPolynomial::from_i64(&[1, 0, 0, -2, -1, -1, 1]).to_string(), "z^6 - z^5 - z^4 - 2z^3 + 1");
    }
}
