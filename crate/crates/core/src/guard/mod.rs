//! Error detection and correction from the checking relations between
//! entries of one ciphertext row.
//!
//! For a nonnegative plaintext and a nonnegative coding matrix, every ratio
//! `c_ij / c_ij'` lies between the smallest and largest `m_lj / m_lj'` over
//! the rows of `M_n`. Entries that break these relations are flagged, and a
//! flagged entry is recovered by enumerating the integers its trusted
//! neighbours allow, nearest to the `tau`-power estimate first.

mod bounds;
mod correct;
mod detect;

pub use bounds::{
    checking_range, column_ratio_bounds, rational_to_f64, tau_estimate, CheckingRange, Extended, RangeSummary, RatioBounds, Spiral,
};
pub use correct::{
    CandidateStatus, CorrectConfig, CorrectionResult, RowCorrection, RowOutcome, TestedCandidate, Validator,
    DEFAULT_BUDGET, TRACE_LIMIT,
};
pub use detect::{PairEvidence, RowDiagnosis, RowVerification, FALLBACK_TOL};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::cipher::Decryptor;
use crate::coding::{CodingKey, MatrixBuilder};
use crate::error::{Error, Result};
use crate::exactmat::{IntMatrix, RatMatrix};
use crate::spectral::{transition_ratio, Precision, Real};

/// Everything needed to check and repair ciphertext blocks made with one
/// coding matrix.
#[derive(Clone, Debug)]
pub struct Guard {
    n: u64,
    m: IntMatrix,
    /// `bounds[j][jp]` for all column pairs.
    bounds: Vec<Vec<RatioBounds>>,
    tau: Option<Real>,
    decryptor: Option<Decryptor>,
}

impl Guard {
    /// Guard for the key at its own index.
    pub fn new(key: &CodingKey, prec: &Precision) -> Result<Self> {
        Self::at(key, key.index(), prec)
    }

    /// Guard for the key at index `n`. `tau` is omitted when the key has no
    /// simple positive dominant root.
    pub fn at(key: &CodingKey, n: u64, prec: &Precision) -> Result<Self> {
        let mut builder = MatrixBuilder::new(key)?;
        let m = builder.matrix(n);
        let inverse = builder.inverse(n)?;
        let tau = transition_ratio(builder.recurrence(), prec).ok();
        let mut g = Self::from_parts(m, Some(&inverse), tau)?;
        g.n = n;
        Ok(g)
    }

    /// Guard from an explicit coding matrix; without `inverse` only
    /// detection is available.
    pub fn from_parts(m: IntMatrix, inverse: Option<&RatMatrix>, tau: Option<Real>) -> Result<Self> {
        let k = m.dim();
        let bounds = (0..k)
            .map(|j| (0..k).map(|jp| column_ratio_bounds(&m, j, jp)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: 0, m, bounds, tau, decryptor: inverse.map(Decryptor::new) })
    }

    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.m
    }

    pub fn tau(&self) -> Option<&Real> {
        self.tau.as_ref()
    }

    pub fn bounds(&self, j: usize, jp: usize) -> &RatioBounds {
        &self.bounds[j][jp]
    }

    /// Whether the checking relations hold for this coding matrix.
    pub fn relations_apply(&self) -> bool {
        self.m.is_nonnegative()
    }

    /// Checking range for `c[row][target]` from `c[row][reference]`.
    pub fn range(&self, c: &IntMatrix, row: usize, target: usize, reference: usize) -> Result<CheckingRange> {
        checking_range(
            c.get(row, reference),
            self.bounds(target, reference),
            (row, target),
            (row, reference),
            self.tau.as_ref(),
        )
    }
}

/// Consecutive-column check of every row of `c` against `m`.
pub fn verify_ciphertext(c: &IntMatrix, m: &IntMatrix) -> Result<Vec<RowVerification>> {
    Ok(Guard::from_parts(m.clone(), None, None)?.verify(c))
}

/// Detection with an explicit coding matrix and optional `tau`.
pub fn detect_errors(c: &IntMatrix, m: &IntMatrix, tau: Option<&Real>, tol: Option<f64>) -> Result<Vec<RowDiagnosis>> {
    Guard::from_parts(m.clone(), None, tau.cloned())?.detect(c, tol)
}

/// Width of the checking range for column `j` from a reference value
/// `c_ref` in column `jp`, under `M_n` of `key`.
pub fn range_length(key: &CodingKey, n: u64, j: usize, jp: usize, c_ref: &BigInt) -> Result<BigRational> {
    let m = MatrixBuilder::new(key)?.matrix(n);
    width(&m, j, jp, c_ref)
}

fn width(m: &IntMatrix, j: usize, jp: usize, c_ref: &BigInt) -> Result<BigRational> {
    let b = column_ratio_bounds(m, j, jp)?;
    let w = b.width().ok_or(Error::UnboundedRange { row: 0, col: j })?;
    Ok(w * BigRational::from_integer(c_ref.clone()))
}

/// Smallest `n <= cap` at which every row of `plaintext` encrypted under
/// `M_n` has a checking range for column `j` (reference `jp`) shorter than
/// one, so the range pins down a single integer.
pub fn smallest_unambiguous_n(
    key: &CodingKey,
    plaintext: &IntMatrix,
    j: usize,
    jp: usize,
    cap: u64,
) -> Result<Option<u64>> {
    let builder = MatrixBuilder::new(key)?;
    let one = BigRational::one();
    for n in 0..=cap {
        let m = builder.matrix(n);
        if !m.is_positive() {
            continue;
        }
        let c = plaintext.mul(&m)?;
        let mut ok = true;
        for i in 0..c.dim() {
            if width(&m, j, jp, c.get(i, jp))? >= one {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
