//! Simultaneous root finding for integer polynomials.
//!
//! Each square-free factor from Yun's decomposition is solved separately, so
//! the iteration only ever sees simple roots. A double precision Aberth pass
//! supplies starting points which are then polished with the same iteration
//! in fixed point.

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::real::{Complex, Real};
use crate::error::{Error, Result};
use crate::exactmat::{to_f64, IntPolynomial};

const F64_ITERATIONS: usize = 500;
const FIXED_ITERATIONS: usize = 200;

/// One root of a polynomial together with error information.
#[derive(Clone, Debug)]
pub struct Root {
    pub value: Complex,
    pub multiplicity: usize,
    /// `|f(value)|` for the full polynomial at working precision.
    pub residual: f64,
    /// Radius of a disk around `value` known to contain a root of the
    /// square-free factor it came from.
    pub radius: f64,
}

impl Root {
    pub fn modulus(&self) -> Real {
        self.value.abs()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        self.value.to_f64()
    }
}

#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub bits: u32,
}

impl RootSet {
    /// Number of roots counted with multiplicity.
    pub fn count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Indices sorted by decreasing modulus; real roots first among equal moduli.
    pub fn by_modulus(&self) -> Vec<usize> {
        let moduli: Vec<Real> = self.roots.iter().map(Root::modulus).collect();
        let mut idx: Vec<usize> = (0..self.roots.len()).collect();
        idx.sort_by(|&a, &b| {
            moduli[b]
                .cmp(&moduli[a])
                .then_with(|| self.roots[a].value.im.abs().cmp(&self.roots[b].value.im.abs()))
                .then_with(|| self.roots[b].value.re.cmp(&self.roots[a].value.re))
        });
        idx
    }

    pub fn summary(&self) -> Vec<RootSummary> {
        self.by_modulus()
            .into_iter()
            .map(|i| {
                let r = &self.roots[i];
                let (re, im) = r.to_f64();
                RootSummary {
                    re,
                    im,
                    modulus: r.modulus().to_f64(),
                    multiplicity: r.multiplicity,
                    residual: r.residual,
                    radius: r.radius,
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RootSummary {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub multiplicity: usize,
    pub residual: f64,
    pub radius: f64,
}

/// All complex roots of `f` at `bits` bits of fixed-point precision.
pub fn find_roots(f: &IntPolynomial, bits: u32) -> Result<RootSet> {
    let deg = f.degree().unwrap_or(0);
    if deg == 0 {
        return Ok(RootSet { roots: Vec::new(), bits });
    }
    let mut roots = Vec::with_capacity(deg);
    for (factor, mult) in f.squarefree_decomposition() {
        if factor.degree().unwrap_or(0) == 0 {
            continue;
        }
        let (values, radii) = solve_squarefree(&factor, bits)?;
        for (value, radius) in values.into_iter().zip(radii) {
            let residual = eval_complex(f, &value).abs().to_f64();
            roots.push(Root { value, multiplicity: mult, residual, radius });
        }
    }
    Ok(RootSet { roots, bits })
}

/// Horner evaluation at a fixed-point complex number.
pub fn eval_complex(f: &IntPolynomial, z: &Complex) -> Complex {
    let bits = z.re.bits();
    let mut acc = Complex::zero(bits);
    for c in f.coeffs().iter().rev() {
        acc = acc.mul(z);
        acc.re = acc.re.add(&Real::from_int(c, bits));
    }
    acc
}

/// Value and derivative at `z` in one Horner pass.
fn eval_with_derivative(f: &IntPolynomial, z: &Complex) -> (Complex, Complex) {
    let bits = z.re.bits();
    let mut p = Complex::zero(bits);
    let mut dp = Complex::zero(bits);
    for c in f.coeffs().iter().rev() {
        dp = dp.mul(z).add(&p);
        p = p.mul(z);
        p.re = p.re.add(&Real::from_int(c, bits));
    }
    (p, dp)
}

fn solve_squarefree(f: &IntPolynomial, bits: u32) -> Result<(Vec<Complex>, Vec<f64>)> {
    let deg = f.degree().unwrap_or(0);
    if deg == 1 {
        let c0 = f.coeff(0);
        let c1 = f.coeff(1);
        let root = num_rational::BigRational::new(-c0, c1);
        return Ok((vec![Complex::real(Real::from_rational(&root, bits))], vec![0.0]));
    }
    let start = aberth_f64(f);
    let mut z: Vec<Complex> =
        start.iter().map(|c| Complex::from_f64(c.re, c.im, bits)).collect();

    // Stop once corrections drop below roughly two thirds of the working bits,
    // then polish twice; convergence is cubic for simple roots.
    let target_bits = (bits as usize * 2) / 3;
    let mut polish = 0;
    let mut max_step = f64::INFINITY;
    for _ in 0..FIXED_ITERATIONS {
        max_step = 0.0;
        let mut small = true;
        for i in 0..deg {
            let (p, dp) = eval_with_derivative(f, &z[i]);
            if p.is_zero() {
                continue;
            }
            if dp.is_zero() {
                small = false;
                continue;
            }
            let w = p.div(&dp);
            let mut s = Complex::zero(bits);
            for j in 0..deg {
                if j != i {
                    let d = z[i].sub(&z[j]);
                    if !d.is_zero() {
                        s = s.add(&Complex::real(Real::one(bits)).div(&d));
                    }
                }
            }
            let denom = Complex::real(Real::one(bits)).sub(&w.mul(&s));
            let step = if denom.is_zero() { w } else { w.div(&denom) };
            z[i] = z[i].sub(&step);
            let step_mag = step.abs();
            let scale = z[i].abs().to_f64().max(1.0);
            let rel = step_mag.to_f64() / scale;
            max_step = max_step.max(rel);
            if !below_bits(&step_mag, scale, target_bits) {
                small = false;
            }
        }
        if small {
            polish += 1;
            if polish > 2 {
                let radii = inclusion_radii(f, &z);
                return Ok((z, radii));
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: FIXED_ITERATIONS,
        max_step,
        best: z.iter().map(Complex::to_f64).collect(),
    })
}

fn below_bits(step: &Real, scale: f64, target_bits: usize) -> bool {
    step.mul_pow2(target_bits as i64) <= Real::from_f64(scale, step.bits())
}

/// `deg * |f(z_i)| / (|lead| * prod |z_i - z_j|)` for each approximation.
fn inclusion_radii(f: &IntPolynomial, z: &[Complex]) -> Vec<f64> {
    let deg = z.len() as f64;
    let lead = f.leading().map(|c| to_f64(&c.abs())).unwrap_or(1.0);
    (0..z.len())
        .map(|i| {
            let p = eval_complex(f, &z[i]).abs().to_f64();
            let mut prod = lead;
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    prod *= z[i].sub(zj).abs().to_f64();
                }
            }
            if prod == 0.0 {
                f64::INFINITY
            } else {
                deg * p / prod
            }
        })
        .collect()
}

fn aberth_f64(f: &IntPolynomial) -> Vec<Complex64> {
    let deg = f.degree().unwrap_or(0);
    let lead = to_f64(f.leading().expect("nonzero polynomial"));
    let c: Vec<f64> = f.coeffs().iter().map(|x| to_f64(x) / lead).collect();

    // Fujiwara bound on root moduli.
    let mut bound: f64 = 0.0;
    for i in 1..=deg {
        let a = c[deg - i].abs();
        let t = if i == deg { (a / 2.0).powf(1.0 / i as f64) } else { a.powf(1.0 / i as f64) };
        bound = bound.max(t);
    }
    let radius = (2.0 * bound).max(1e-3) / 2.0;
    let center = -c[deg - 1] / deg as f64;
    let mut z: Vec<Complex64> = (0..deg)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / deg as f64 + 0.4;
            Complex64::new(center, 0.0) + Complex64::from_polar(radius.max(0.5), theta)
        })
        .collect();

    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for &ci in c.iter().rev() {
            dp = dp * x + p;
            p = p * x + ci;
        }
        (p, dp)
    };

    for _ in 0..F64_ITERATIONS {
        let mut max_step: f64 = 0.0;
        for i in 0..deg {
            let (p, dp) = eval(z[i]);
            if p == Complex64::zero() || dp == Complex64::zero() {
                continue;
            }
            let w = p / dp;
            let s: Complex64 = (0..deg)
                .filter(|&j| j != i && z[i] != z[j])
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = w / (Complex64::new(1.0, 0.0) - w * s);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-14 {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moduli(f: &IntPolynomial) -> Vec<f64> {
        let rs = find_roots(f, 256).unwrap();
        rs.by_modulus().iter().map(|&i| rs.roots[i].modulus().to_f64()).collect()
    }

    #[test]
    fn golden_roots() {
        let f = IntPolynomial::from_i64(&[-1, -1, 1]);
        let rs = find_roots(&f, 256).unwrap();
        let order = rs.by_modulus();
        let phi = rs.roots[order[0]].value.re.to_f64();
        let psi = rs.roots[order[1]].value.re.to_f64();
        assert!((phi - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((psi - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        for r in &rs.roots {
            assert!(r.residual < 1e-60);
        }
    }

    #[test]
    fn multiplicities_counted() {
        // (z-1)^2 (z+2)(z^2+1)
        let f = IntPolynomial::from_i64(&[1, -2, 1])
            .mul(&IntPolynomial::from_i64(&[2, 1]))
            .mul(&IntPolynomial::from_i64(&[1, 0, 1]));
        let rs = find_roots(&f, 192).unwrap();
        assert_eq!(rs.count(), 5);
        let double = rs.roots.iter().find(|r| r.multiplicity == 2).unwrap();
        assert!((double.value.re.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn product_of_moduli_is_constant_term() {
        for c in [
            vec![-1, -2, -1, -1, 1],
            vec![1, 0, 0, -2, -1, -1, 1],
            vec![-1, -1, 0, 0, 1],
            vec![7, -3, 0, 2, -5, 1],
        ] {
            let f = IntPolynomial::from_i64(&c);
            let prod: f64 = moduli(&f).iter().product();
            assert!((prod - (c[0] as f64).abs()).abs() < 1e-9 * (c[0] as f64).abs());
        }
    }

    #[test]
    fn inclusion_radius_is_small() {
        let f = IntPolynomial::from_i64(&[-1, -1, -1, 1]);
        let rs = find_roots(&f, 256).unwrap();
        for r in &rs.roots {
            assert!(r.radius < 1e-50, "{}", r.radius);
        }
    }
}
