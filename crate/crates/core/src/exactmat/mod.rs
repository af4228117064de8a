//! Exact integer and rational linear algebra for small dense matrices.

mod matrix;
mod poly;

pub use matrix::{IntMatrix, RatMatrix};
pub use poly::IntPolynomial;

pub(crate) use poly::to_f64;

use crate::error::Result;

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix> {
    a.mul(b)
}

pub fn det_exact(a: &IntMatrix) -> num_bigint::BigInt {
    a.det()
}

pub fn inverse_exact(a: &IntMatrix) -> Result<RatMatrix> {
    a.inverse()
}

pub fn char_poly(a: &IntMatrix) -> IntPolynomial {
    a.char_poly()
}

pub fn poly_divide(f: &IntPolynomial, g: &IntPolynomial) -> Result<(IntPolynomial, IntPolynomial)> {
    f.divide(g)
}
