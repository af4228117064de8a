//! Order-k linear recurrences with integer coefficients.
//!
//! A recurrence `X_{n+k} = a_{k-1} X_{n+k-1} + ... + a_1 X_{n+1} + a_0 X_n`
//! stores its coefficients in ascending order, `coeffs[i] = a_i`. Windows of
//! consecutive terms and initial vectors are written in descending order,
//! `(X_{n+k-1}, ..., X_n)`, which is the order they appear in as matrix
//! columns. Term lists returned by the `extend_*` functions are in index
//! order.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmat::IntPolynomial;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Recurrence {
    coeffs: Vec<BigInt>,
}

impl Recurrence {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::OrderTooSmall(coeffs.len()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Fibonacci, `X_{n+2} = X_{n+1} + X_n`.
    pub fn fibonacci() -> Self {
        Self::k_bonacci(2)
    }

    pub fn tribonacci() -> Self {
        Self::k_bonacci(3)
    }

    pub fn tetranacci() -> Self {
        Self::k_bonacci(4)
    }

    /// All coefficients equal to one.
    pub fn k_bonacci(k: usize) -> Self {
        assert!(k >= 2);
        Self { coeffs: vec![BigInt::one(); k] }
    }

    /// `p`-Fibonacci of order `k = p + 1`: `X_{n+k} = X_{n+k-1} + X_n`.
    pub fn p_fibonacci(p: usize) -> Self {
        assert!(p >= 1);
        let k = p + 1;
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs[0] = BigInt::one();
        coeffs[k - 1] += 1;
        Self { coeffs }
    }

    /// Order-k Wielandt recurrence `X_{n+k} = X_{n+1} + X_n`.
    pub fn wielandt(k: usize) -> Self {
        assert!(k >= 2);
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs[0] = BigInt::one();
        coeffs[1] += 1;
        Self { coeffs }
    }

    /// Recurrence whose characteristic polynomial is the monic `f`.
    pub fn from_char_poly(f: &IntPolynomial) -> Result<Self> {
        if !f.is_monic() {
            return Err(Error::NotMonic);
        }
        let k = f.degree().ok_or(Error::NotMonic)?;
        Self::new(f.coeffs()[..k].iter().map(|c| -c).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn a0(&self) -> &BigInt {
        &self.coeffs[0]
    }

    pub fn is_invertible(&self) -> bool {
        !self.coeffs[0].is_zero()
    }

    /// `z^k - a_{k-1} z^{k-1} - ... - a_1 z - a_0`.
    pub fn char_poly(&self) -> IntPolynomial {
        let mut c: Vec<BigInt> = self.coeffs.iter().map(|a| -a).collect();
        c.push(BigInt::one());
        IntPolynomial::new(c)
    }
}

/// The `k` initial values `(X_{k-1}, ..., X_0)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedWindow {
    values: Vec<BigInt>,
}

impl SeedWindow {
    pub fn new(values: Vec<BigInt>) -> Self {
        Self { values }
    }

    pub fn from_i64(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| BigInt::from(v)).collect())
    }

    /// `(1, 0, ..., 0)`: `X_{k-1} = 1`, all earlier terms zero.
    pub fn standard(k: usize) -> Self {
        let mut values = vec![BigInt::zero(); k];
        values[0] = BigInt::one();
        Self { values }
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check(&self, rec: &Recurrence) -> Result<()> {
        if self.values.len() != rec.order() {
            return Err(Error::WindowLength {
                order: rec.order(),
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Next term after a descending window `(X_{n+k-1}, ..., X_n)`.
pub fn step_forward(rec: &Recurrence, window: &[BigInt]) -> Result<BigInt> {
    let k = rec.order();
    if window.len() != k {
        return Err(Error::WindowLength { order: k, found: window.len() });
    }
    // window[0] = X_{n+k-1} pairs with a_{k-1}
    Ok(window
        .iter()
        .zip(rec.coeffs.iter().rev())
        .map(|(x, a)| x * a)
        .sum())
}

/// Term preceding a descending window `(X_{n+k-1}, ..., X_n)`, i.e. `X_{n-1}`.
pub fn step_backward(rec: &Recurrence, window: &[BigRational]) -> Result<BigRational> {
    let k = rec.order();
    if window.len() != k {
        return Err(Error::WindowLength { order: k, found: window.len() });
    }
    if !rec.is_invertible() {
        return Err(Error::NotBackwardExtendable);
    }
    // X_{n+k-1} = a_{k-1} X_{n+k-2} + ... + a_1 X_n + a_0 X_{n-1}
    let mut num = window[0].clone();
    for (i, x) in window[1..].iter().enumerate() {
        let a = &rec.coeffs[k - 1 - i];
        num -= x * BigRational::from_integer(a.clone());
    }
    Ok(num / BigRational::from_integer(rec.a0().clone()))
}

/// The seed followed by `count` further terms, `X_0, ..., X_{count+k-1}`.
pub fn extend_forward(rec: &Recurrence, seed: &SeedWindow, count: usize) -> Result<Vec<BigInt>> {
    seed.check(rec)?;
    let k = rec.order();
    let mut terms: Vec<BigInt> = seed.values.iter().rev().cloned().collect();
    terms.reserve(count);
    let a = &rec.coeffs;
    for _ in 0..count {
        let n = terms.len();
        let next: BigInt = (0..k).map(|i| &a[i] * &terms[n - k + i]).sum();
        terms.push(next);
    }
    Ok(terms)
}

/// `X_{-1}, X_{-2}, ..., X_{-count}` as exact rationals.
pub fn extend_backward(
    rec: &Recurrence,
    seed: &SeedWindow,
    count: usize,
) -> Result<Vec<BigRational>> {
    seed.check(rec)?;
    if !rec.is_invertible() {
        return Err(Error::NotBackwardExtendable);
    }
    let mut window: Vec<BigRational> = seed
        .values
        .iter()
        .map(|v| BigRational::from_integer(v.clone()))
        .collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let prev = step_backward(rec, &window)?;
        window.remove(0);
        window.push(prev.clone());
        out.push(prev);
    }
    Ok(out)
}

/// `S_0, ..., S_{count-1}` with `S_{k-1} = 1` and `S_0 = ... = S_{k-2} = 0`.
pub fn standard_sequence(rec: &Recurrence, count: usize) -> Result<Vec<BigInt>> {
    let k = rec.order();
    let mut terms = extend_forward(rec, &SeedWindow::standard(k), count.saturating_sub(k))?;
    terms.truncate(count);
    Ok(terms)
}
