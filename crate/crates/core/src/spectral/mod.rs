//! Spectral certification of transition matrices.
//!
//! All verdicts are computed from the characteristic polynomial, whose roots
//! are found at a working precision of twice the requested bits. Margins that
//! fall inside the tolerance band produce [`Verdict::Indeterminate`] rather
//! than a guess.

pub mod graph;
pub mod real;
pub mod roots;

use serde::{Deserialize, Serialize};
use num_traits::Zero;
use serde_json::json;

use crate::coding::left_companion;
use crate::error::{Error, Result};
use crate::exactmat::{IntMatrix, IntPolynomial};
use crate::recurrence::{step_forward, Recurrence, SeedWindow};

pub use graph::{is_primitive, is_primitive_companion};
pub use real::{Complex, Real};
pub use roots::{Root, RootSet, RootSummary};

/// Environment variable overriding the requested precision in bits.
pub const PRECISION_ENV: &str = "RMC_PRECISION_BITS";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Precision {
    /// Requested bits; root finding runs at twice this plus guard bits.
    pub bits: u32,
    /// Absolute tolerance used by every verdict.
    pub tolerance: f64,
}

impl Default for Precision {
    fn default() -> Self {
        Self { bits: 128, tolerance: 1e-9 }
    }
}

impl Precision {
    pub fn new(bits: u32, tolerance: f64) -> Self {
        Self { bits, tolerance }
    }

    /// Default precision with `RMC_PRECISION_BITS` applied when set.
    pub fn from_env() -> Self {
        let mut p = Self::default();
        if let Some(bits) = std::env::var(PRECISION_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            p.bits = bits;
        }
        p
    }

    pub fn working_bits(&self) -> u32 {
        2 * self.bits.max(64) + 32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

/// Shape of the largest-modulus part of a root set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// Index of a simple, real, positive root strictly dominating the rest.
    Simple(usize),
    /// The largest modulus is attained by a non-real conjugate pair.
    ComplexPair,
    /// The dominant root is real but repeated.
    Multiple,
    /// Two largest moduli agree within tolerance.
    Tie,
    /// The dominant root is real and not positive.
    NonPositive,
    Empty,
}

impl Dominance {
    fn describe(&self) -> &'static str {
        match self {
            Dominance::Simple(_) => "simple positive dominant root",
            Dominance::ComplexPair => "dominant modulus attained by a complex pair",
            Dominance::Multiple => "dominant root is not simple",
            Dominance::Tie => "two largest moduli agree within tolerance",
            Dominance::NonPositive => "dominant root is not positive",
            Dominance::Empty => "no roots",
        }
    }
}

pub fn all_roots(f: &IntPolynomial, prec: &Precision) -> Result<RootSet> {
    roots::find_roots(f, prec.working_bits())
}

pub fn dominance(roots: &RootSet, tol: f64) -> Dominance {
    let order = roots.by_modulus();
    let Some(&top) = order.first() else {
        return Dominance::Empty;
    };
    let r = &roots.roots[top];
    let modulus = r.modulus();
    if r.value.im.abs().to_f64() > tol * modulus.to_f64().max(1.0) {
        return Dominance::ComplexPair;
    }
    if let Some(&second) = order.get(1) {
        if modulus.sub(&roots.roots[second].modulus()).to_f64() < tol {
            return Dominance::Tie;
        }
    }
    if r.multiplicity > 1 {
        return Dominance::Multiple;
    }
    if r.value.re.to_f64() <= tol {
        return Dominance::NonPositive;
    }
    Dominance::Simple(top)
}

/// Largest modulus of the roots, which is the spectral radius.
fn spectral_radius(roots: &RootSet) -> Real {
    roots
        .by_modulus()
        .first()
        .map(|&i| roots.roots[i].modulus())
        .unwrap_or_else(|| Real::zero(roots.bits))
}

/// Largest modulus after removing one copy of the top root.
fn second_from_roots(roots: &RootSet) -> Real {
    let order = roots.by_modulus();
    match order.first() {
        None => Real::zero(roots.bits),
        Some(&top) if roots.roots[top].multiplicity > 1 => roots.roots[top].modulus(),
        Some(_) => order
            .get(1)
            .map(|&i| roots.roots[i].modulus())
            .unwrap_or_else(|| Real::zero(roots.bits)),
    }
}

pub fn second_eigenmodulus(f: &IntPolynomial, prec: &Precision) -> Result<Real> {
    Ok(second_from_roots(&all_roots(f, prec)?))
}

fn ratio_f64(num: &num_bigint::BigInt, den: &num_bigint::BigInt) -> f64 {
    let shift = num.bits().max(den.bits()).saturating_sub(900);
    let n = crate::exactmat::to_f64(&(num >> shift as usize));
    let d = crate::exactmat::to_f64(&(den >> shift as usize));
    n / d
}

/// Starting guess from consecutive standard-sequence ratios.
fn ratio_guess(rec: &Recurrence) -> f64 {
    const MAX_TERMS: usize = 10_000;
    let k = rec.order();
    let mut window = SeedWindow::standard(k).values().to_vec();
    let mut prev_ratio = f64::NAN;
    let mut agreements = 0;
    let mut ratio = 1.0;
    for _ in 0..MAX_TERMS {
        let next = step_forward(rec, &window).expect("window length matches order");
        if !window[0].is_zero() {
            ratio = ratio_f64(&next, &window[0]);
            if (ratio - prev_ratio).abs() <= 1e-6 * ratio.abs() {
                agreements += 1;
                if agreements >= 2 {
                    return ratio;
                }
            } else {
                agreements = 0;
            }
            prev_ratio = ratio;
        }
        window.pop();
        window.insert(0, next);
    }
    ratio
}

/// Real Newton iteration on `f` from `start`.
fn newton_real(f: &IntPolynomial, start: Real) -> Option<Real> {
    let bits = start.bits();
    let df = f.derivative();
    let target = (bits as i64 * 2) / 3;
    let mut z = start;
    let mut polish = 0;
    for _ in 0..200 {
        let p = eval_real(f, &z);
        let dp = eval_real(&df, &z);
        if dp.is_zero() {
            return None;
        }
        let step = p.div(&dp);
        z = z.sub(&step);
        let scale = z.abs().to_f64().max(1.0);
        if step.abs().mul_pow2(target) <= Real::from_f64(scale, bits) {
            polish += 1;
            if polish > 2 {
                return Some(z);
            }
        }
    }
    None
}

fn eval_real(f: &IntPolynomial, z: &Real) -> Real {
    let bits = z.bits();
    let mut acc = Real::zero(bits);
    for c in f.coeffs().iter().rev() {
        acc = acc.mul(z).add(&Real::from_int(c, bits));
    }
    acc
}

/// Dominant eigenvalue of the left companion matrix of `rec`.
///
/// Newton's method on the characteristic polynomial starts from a
/// standard-sequence ratio; the result is confirmed against the full root
/// set and fails with [`Error::NotSpf`] when no simple positive dominant
/// root exists.
pub fn transition_ratio(rec: &Recurrence, prec: &Precision) -> Result<Real> {
    if !rec.is_invertible() {
        return Err(Error::NotSpf("a_0 = 0, the companion matrix is singular".into()));
    }
    let bits = prec.working_bits();
    let f = rec.char_poly();
    let roots = all_roots(&f, prec)?;
    let d = match dominance(&roots, prec.tolerance) {
        Dominance::Simple(d) => d,
        other => return Err(Error::NotSpf(other.describe().into())),
    };
    let dominant = roots.roots[d].value.re.clone();
    let guess = Real::from_f64(ratio_guess(rec), bits);
    match newton_real(&f, guess) {
        Some(t) if t.sub(&dominant).abs().to_f64() <= prec.tolerance => Ok(t),
        _ => Ok(newton_real(&f, dominant.clone()).unwrap_or(dominant)),
    }
}

pub fn is_left_companion(l: &IntMatrix) -> bool {
    let k = l.dim();
    (1..k).all(|i| {
        (0..k).all(|j| {
            let v = l.get(i, j);
            if j + 1 == i {
                *v == num_bigint::BigInt::from(1)
            } else {
                v.is_zero()
            }
        })
    })
}

/// Null vector of `l - tau I` by Gauss-Jordan with full pivoting.
pub fn null_vector(l: &IntMatrix, tau: &Real) -> Vec<Real> {
    let k = l.dim();
    let bits = tau.bits();
    let mut b: Vec<Vec<Real>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let v = Real::from_int(l.get(i, j), bits);
                    if i == j {
                        v.sub(tau)
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let mut free_cols: Vec<usize> = (0..k).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut free_rows: Vec<usize> = (0..k).collect();
    for _ in 0..k.saturating_sub(1) {
        let mut best: Option<(usize, usize)> = None;
        for &r in &free_rows {
            for &c in &free_cols {
                if best.map_or(true, |(br, bc)| b[r][c].abs() > b[br][bc].abs()) {
                    best = Some((r, c));
                }
            }
        }
        let (pr, pc) = best.expect("nonempty");
        if b[pr][pc].is_zero() {
            break;
        }
        for r in 0..k {
            if r != pr && !b[r][pc].is_zero() {
                let factor = b[r][pc].div(&b[pr][pc]);
                for c in 0..k {
                    let t = factor.mul(&b[pr][c]);
                    b[r][c] = b[r][c].sub(&t);
                }
            }
        }
        pivots.push((pr, pc));
        free_rows.retain(|&r| r != pr);
        free_cols.retain(|&c| c != pc);
    }
    let mut v = vec![Real::zero(bits); k];
    let free = free_cols[0];
    v[free] = Real::one(bits);
    for &(pr, pc) in &pivots {
        v[pc] = b[pr][free].div(&b[pr][pc]).neg();
    }
    v
}

#[derive(Clone, Debug)]
pub struct SpfResult {
    pub verdict: Verdict,
    pub tau: Real,
    pub sigma: Real,
    /// Dominant eigenvector, present when a simple positive dominant root exists.
    pub vector: Option<Vec<Real>>,
    pub reason: Option<String>,
}

fn spf_from_roots(l: &IntMatrix, roots: &RootSet, tol: f64) -> SpfResult {
    let tau = spectral_radius(roots);
    let sigma = second_from_roots(roots);
    let d = match dominance(roots, tol) {
        Dominance::Simple(d) => d,
        Dominance::Tie => {
            return SpfResult {
                verdict: Verdict::Indeterminate,
                tau,
                sigma,
                vector: None,
                reason: Some(Dominance::Tie.describe().into()),
            }
        }
        other => {
            return SpfResult {
                verdict: Verdict::No,
                tau,
                sigma,
                vector: None,
                reason: Some(other.describe().into()),
            }
        }
    };
    let tau = roots.roots[d].value.re.clone();
    let k = l.dim();
    let mut v = if is_left_companion(l) {
        (0..k).map(|i| tau.powi((k - 1 - i) as i64)).collect::<Vec<_>>()
    } else {
        eigenvector(l, &tau)
    };
    let max_norm = v.iter().map(Real::abs).max().expect("k >= 1").to_f64();
    let threshold = tol * max_norm;
    let verdict = if v.iter().all(|x| x.to_f64() > threshold) {
        Verdict::Yes
    } else if v.iter().any(|x| x.to_f64() < -threshold) {
        Verdict::No
    } else {
        Verdict::Indeterminate
    };
    let reason = match verdict {
        Verdict::Yes => None,
        Verdict::No => Some("dominant eigenvector has entries of both signs".into()),
        Verdict::Indeterminate => Some("dominant eigenvector has entries within tolerance of 0".into()),
    };
    if v.iter().all(|x| x.is_negative() || x.is_zero()) {
        v = v.iter().map(Real::neg).collect();
    }
    SpfResult { verdict, tau, sigma, vector: Some(v), reason }
}

/// Eigenvector of `l` for the real eigenvalue `tau`, scaled so that its
/// largest-magnitude entry is `+1`.
pub fn eigenvector(l: &IntMatrix, tau: &Real) -> Vec<Real> {
    let v = null_vector(l, tau);
    let pivot = v.iter().max_by(|a, b| a.abs().cmp(&b.abs())).cloned().expect("k >= 1");
    if pivot.is_zero() {
        v
    } else {
        v.iter().map(|x| x.div(&pivot)).collect()
    }
}

pub fn is_strong_perron_frobenius(l: &IntMatrix, prec: &Precision) -> Result<SpfResult> {
    let roots = all_roots(&l.char_poly(), prec)?;
    Ok(spf_from_roots(l, &roots, prec.tolerance))
}

fn pisot_from_roots(f: &IntPolynomial, roots: &RootSet, prec: &Precision) -> Result<Verdict> {
    let tol = prec.tolerance;
    if f.constant_term().is_zero() {
        return Ok(Verdict::No);
    }
    let d = match dominance(roots, tol) {
        Dominance::Simple(d) => d,
        Dominance::Tie => return Ok(Verdict::Indeterminate),
        _ => return Ok(Verdict::No),
    };
    let mut near_unit = Vec::new();
    for (i, r) in roots.roots.iter().enumerate() {
        if i == d {
            continue;
        }
        let m = r.modulus().to_f64();
        if m > 1.0 + tol {
            return Ok(Verdict::No);
        }
        if m >= 1.0 - tol {
            near_unit.push(i);
        }
    }
    if near_unit.is_empty() {
        return Ok(Verdict::Yes);
    }
    // Roots shared with the reciprocal polynomial come in pairs beta, 1/beta,
    // so one of the pair has modulus at least 1.
    let g = f.gcd(&f.reciprocal());
    if g.degree().unwrap_or(0) >= 1 {
        let shared = all_roots(&g, prec)?;
        for &i in &near_unit {
            let z = &roots.roots[i].value;
            if shared.roots.iter().any(|s| s.value.sub(z).abs().to_f64() < 1e-20) {
                return Ok(Verdict::No);
            }
        }
    }
    Ok(Verdict::Indeterminate)
}

pub fn is_pisot(f: &IntPolynomial, prec: &Precision) -> Result<Verdict> {
    let roots = all_roots(f, prec)?;
    pisot_from_roots(f, &roots, prec)
}

#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub char_poly: IntPolynomial,
    pub roots: RootSet,
    /// Dominant root when it is simple and positive, otherwise the spectral radius.
    pub tau: Real,
    pub sigma: Real,
    pub dominant_vector: Option<Vec<Real>>,
    pub is_spf: Verdict,
    pub is_pisot: Verdict,
    pub is_primitive: Option<bool>,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl SpectralReport {
    pub fn tau_f64(&self) -> f64 {
        self.tau.to_f64()
    }

    pub fn sigma_f64(&self) -> f64 {
        self.sigma.to_f64()
    }

    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        json!({
            "char_poly": self.char_poly.to_string(),
            "tau": self.tau.to_decimal(digits),
            "sigma": self.sigma.to_decimal(digits),
            "dominant_vector": self
                .dominant_vector
                .as_ref()
                .map(|v| v.iter().map(|x| x.to_decimal(digits)).collect::<Vec<_>>()),
            "is_spf": self.is_spf,
            "is_pisot": self.is_pisot,
            "is_primitive": self.is_primitive,
            "tolerance": self.tolerance,
            "note": self.note,
            "roots": self.roots.summary(),
        })
    }
}

pub fn analyze_matrix(l: &IntMatrix, prec: &Precision) -> Result<SpectralReport> {
    let f = l.char_poly();
    let roots = all_roots(&f, prec)?;
    let spf = spf_from_roots(l, &roots, prec.tolerance);
    let pisot = pisot_from_roots(&f, &roots, prec)?;
    let is_primitive = if l.is_nonnegative() { Some(is_primitive(l)?) } else { None };
    Ok(SpectralReport {
        char_poly: f,
        tau: spf.tau,
        sigma: spf.sigma,
        dominant_vector: spf.vector,
        is_spf: spf.verdict,
        is_pisot: pisot,
        is_primitive,
        tolerance: prec.tolerance,
        note: spf.reason,
        roots,
    })
}

/// Report for the left companion matrix of `rec`.
pub fn analyze_recurrence(rec: &Recurrence, prec: &Precision) -> Result<SpectralReport> {
    analyze_matrix(&left_companion(rec), prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn fibonacci_ratio_is_phi() {
        let t = transition_ratio(&Recurrence::fibonacci(), &p()).unwrap();
        let five = Real::from_i64(5, t.bits());
        let phi = Real::one(t.bits()).add(&five.sqrt()).div(&Real::from_i64(2, t.bits()));
        assert!(t.sub(&phi).abs().to_f64() < 1e-70);
    }

    #[test]
    fn ratio_matches_dominant_root() {
        for rec in [Recurrence::tribonacci(), Recurrence::p_fibonacci(2), Recurrence::wielandt(4)] {
            let t = transition_ratio(&rec, &p()).unwrap();
            let roots = all_roots(&rec.char_poly(), &p()).unwrap();
            let Dominance::Simple(d) = dominance(&roots, 1e-9) else { panic!() };
            assert!(t.sub(&roots.roots[d].value.re).abs().to_f64() < 1e-60);
        }
    }

    #[test]
    fn non_spf_recurrences() {
        // X_{n+2} = X_n has roots +1 and -1.
        let rec = Recurrence::from_i64(&[1, 0]).unwrap();
        assert!(matches!(transition_ratio(&rec, &p()), Err(Error::NotSpf(_))));
        // X_{n+2} = -X_n has roots +-i.
        let rec = Recurrence::from_i64(&[-1, 0]).unwrap();
        assert!(matches!(transition_ratio(&rec, &p()), Err(Error::NotSpf(_))));
        let rec = Recurrence::from_i64(&[0, 1]).unwrap();
        assert!(transition_ratio(&rec, &p()).is_err());
    }

    #[test]
    fn spf_on_general_matrix_uses_null_vector() {
        let l = IntMatrix::from_i64(&[vec![0, 1, 1], vec![1, 2, 1], vec![0, 1, 0]]).unwrap();
        let r = is_strong_perron_frobenius(&l, &p()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        let v = r.vector.unwrap();
        // L v = tau v
        for i in 0..3 {
            let mut lhs = Real::zero(r.tau.bits());
            for j in 0..3 {
                lhs = lhs.add(&v[j].mul_int(l.get(i, j)));
            }
            assert!(lhs.sub(&r.tau.mul(&v[i])).abs().to_f64() < 1e-60);
        }
    }

    #[test]
    fn spf_rejects_mixed_eigenvector() {
        // Eigenvalues 3 and 1; the dominant eigenvector is (1, -1).
        let l = IntMatrix::from_i64(&[vec![2, -1], vec![-1, 2]]).unwrap();
        assert_eq!(is_strong_perron_frobenius(&l, &p()).unwrap().verdict, Verdict::No);
        assert_eq!(
            is_strong_perron_frobenius(&IntMatrix::identity(2), &p()).unwrap().verdict,
            Verdict::No
        );
    }

    #[test]
    fn pisot_boundary_uses_gcd() {
        // Salem-type quartic z^4 - z^3 - z^2 - z + 1 is self-reciprocal with
        // two roots on the unit circle.
        let f = IntPolynomial::from_i64(&[1, -1, -1, -1, 1]);
        assert_eq!(is_pisot(&f, &p()).unwrap(), Verdict::No);
        // (z^2 - z - 1)(z^2 + 1): unit-circle roots +-i.
        let f = IntPolynomial::from_i64(&[-1, -1, 1]).mul(&IntPolynomial::from_i64(&[1, 0, 1]));
        assert_eq!(is_pisot(&f, &p()).unwrap(), Verdict::No);
        assert_eq!(is_pisot(&IntPolynomial::from_i64(&[-1, -1, 1]), &p()).unwrap(), Verdict::Yes);
    }

    #[test]
    fn precision_env_override() {
        let p = Precision { bits: 100, tolerance: 1e-9 };
        assert_eq!(p.working_bits(), 232);
        assert_eq!(Precision::default().working_bits(), 288);
    }
}
