//! Encryption keys and the coding matrices they generate.
//!
//! Three key shapes are supported:
//!
//! - `Symmetric`: a recurrence and one seed window. `L` is the left companion
//!   matrix and `M_n` is a Hankel matrix of consecutive sequence terms.
//! - `General`: an arbitrary integer matrix `L` and a cyclic vector `x_0`.
//! - `RightForm`: a recurrence (giving the right companion `R`) and an
//!   invertible nonnegative initial matrix `M_0`, with `M_n = M_0 R^n`.
//!
//! In every case row `i` of `M_n` is the window `(Y_i(n+k-1), ..., Y_i(n))`
//! of a sequence satisfying a single recurrence and seeded by row `i` of
//! `M_0`, so `M_n` is produced by running `k` recurrences instead of
//! multiplying matrices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmat::{IntMatrix, RatMatrix};
use crate::recurrence::{step_backward, step_forward, Recurrence, SeedWindow};
use crate::spectral::{self, Precision, Real, SpectralReport, Verdict};

/// First row `(a_{k-1}, ..., a_0)`, ones on the subdiagonal.
pub fn left_companion(rec: &Recurrence) -> IntMatrix {
    let k = rec.order();
    let mut m = IntMatrix::zeros(k);
    for j in 0..k {
        m.set(0, j, rec.coeffs()[k - 1 - j].clone());
    }
    for i in 1..k {
        m.set(i, i - 1, BigInt::one());
    }
    m
}

pub fn right_companion(rec: &Recurrence) -> IntMatrix {
    left_companion(rec).transpose()
}

/// `M_0 = (L^{k-1} x_0, ..., L x_0, x_0)`.
pub fn initial_matrix(l: &IntMatrix, x0: &[BigInt]) -> Result<IntMatrix> {
    let k = l.dim();
    if x0.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: x0.len() });
    }
    let mut cols = vec![x0.to_vec()];
    for _ in 1..k {
        let next = l.mul_vec(cols.last().expect("nonempty"))?;
        cols.push(next);
    }
    cols.reverse();
    let mut m = IntMatrix::zeros(k);
    for (j, col) in cols.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    Ok(m)
}

pub fn is_cyclic(l: &IntMatrix, x0: &[BigInt]) -> bool {
    initial_matrix(l, x0).map(|m| !m.det().is_zero()).unwrap_or(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyKind {
    Symmetric,
    General,
    RightForm,
}

impl KeyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            KeyKind::Symmetric => "symmetric",
            KeyKind::General => "general",
            KeyKind::RightForm => "right_form",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodingKey {
    Symmetric { rec: Recurrence, x0: SeedWindow, index: u64 },
    General { left: IntMatrix, x0: Vec<BigInt>, index: u64 },
    RightForm { rec: Recurrence, m0: IntMatrix, index: u64 },
}

impl CodingKey {
    pub fn symmetric(rec: Recurrence, x0: SeedWindow, index: u64) -> Result<Self> {
        if x0.len() != rec.order() {
            return Err(Error::WindowLength { order: rec.order(), found: x0.len() });
        }
        Ok(Self::Symmetric { rec, x0, index })
    }

    /// Symmetric key with the standard seed `(1, 0, ..., 0)`.
    pub fn standard(rec: Recurrence, index: u64) -> Self {
        let x0 = SeedWindow::standard(rec.order());
        Self::Symmetric { rec, x0, index }
    }

    pub fn general(left: IntMatrix, x0: Vec<BigInt>, index: u64) -> Result<Self> {
        if x0.len() != left.dim() {
            return Err(Error::DimensionMismatch { expected: left.dim(), found: x0.len() });
        }
        Ok(Self::General { left, x0, index })
    }

    pub fn right_form(rec: Recurrence, m0: IntMatrix, index: u64) -> Result<Self> {
        if m0.dim() != rec.order() {
            return Err(Error::DimensionMismatch { expected: rec.order(), found: m0.dim() });
        }
        Ok(Self::RightForm { rec, m0, index })
    }

    pub fn kind(&self) -> KeyKind {
        match self {
            CodingKey::Symmetric { .. } => KeyKind::Symmetric,
            CodingKey::General { .. } => KeyKind::General,
            CodingKey::RightForm { .. } => KeyKind::RightForm,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            CodingKey::Symmetric { rec, .. } | CodingKey::RightForm { rec, .. } => rec.order(),
            CodingKey::General { left, .. } => left.dim(),
        }
    }

    pub fn index(&self) -> u64 {
        match self {
            CodingKey::Symmetric { index, .. }
            | CodingKey::General { index, .. }
            | CodingKey::RightForm { index, .. } => *index,
        }
    }

    pub fn with_index(&self, n: u64) -> Self {
        let mut key = self.clone();
        match &mut key {
            CodingKey::Symmetric { index, .. }
            | CodingKey::General { index, .. }
            | CodingKey::RightForm { index, .. } => *index = n,
        }
        key
    }

    /// The recurrence shared by all row sequences.
    ///
    /// For general keys it is read off the characteristic polynomial of `L`.
    pub fn recurrence(&self) -> Result<Recurrence> {
        match self {
            CodingKey::Symmetric { rec, .. } | CodingKey::RightForm { rec, .. } => Ok(rec.clone()),
            CodingKey::General { left, .. } => Recurrence::from_char_poly(&left.char_poly()),
        }
    }

    /// `L` for symmetric and general keys, `R` for right-form keys.
    pub fn transition_matrix(&self) -> IntMatrix {
        match self {
            CodingKey::Symmetric { rec, .. } => left_companion(rec),
            CodingKey::General { left, .. } => left.clone(),
            CodingKey::RightForm { rec, .. } => right_companion(rec),
        }
    }

    pub fn initial_matrix(&self) -> Result<IntMatrix> {
        match self {
            CodingKey::Symmetric { rec, x0, .. } => initial_matrix(&left_companion(rec), x0.values()),
            CodingKey::General { left, x0, .. } => initial_matrix(left, x0),
            CodingKey::RightForm { m0, .. } => Ok(m0.clone()),
        }
    }

    /// Left transition matrix `M_0 R M_0^{-1}` of a right-form key, which is
    /// rational in general. Other kinds return their integer `L`.
    pub fn left_matrix(&self) -> Result<RatMatrix> {
        match self {
            CodingKey::RightForm { rec, m0, .. } => {
                let inv = m0.inverse()?;
                m0.mul(&right_companion(rec))?.mul_rat(&inv)
            }
            _ => Ok(self.transition_matrix().to_rat()),
        }
    }

    /// Same key with `x_0` (or `M_0`) negated, flipping the sign of every `M_n`.
    pub fn negated(&self) -> Self {
        let minus = BigInt::from(-1);
        match self {
            CodingKey::Symmetric { rec, x0, index } => CodingKey::Symmetric {
                rec: rec.clone(),
                x0: SeedWindow::new(x0.values().iter().map(|v| -v).collect()),
                index: *index,
            },
            CodingKey::General { left, x0, index } => CodingKey::General {
                left: left.clone(),
                x0: x0.iter().map(|v| -v).collect(),
                index: *index,
            },
            CodingKey::RightForm { rec, m0, index } => {
                CodingKey::RightForm { rec: rec.clone(), m0: m0.scale(&minus), index: *index }
            }
        }
    }

    /// Hex fingerprint of the canonical key serialization.
    pub fn fingerprint(&self) -> String {
        crate::files::key_fingerprint(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingMatrix {
    pub n: u64,
    pub m: IntMatrix,
    pub fingerprint: String,
}

/// Row `i` of `M_0` read as a descending seed window.
fn row_windows(m0: &IntMatrix) -> Vec<Vec<BigInt>> {
    m0.rows().map(<[BigInt]>::to_vec).collect()
}

fn advance(rec: &Recurrence, mut window: Vec<BigInt>, steps: u64) -> Vec<BigInt> {
    for _ in 0..steps {
        let next = step_forward(rec, &window).expect("window length matches order");
        window.pop();
        window.insert(0, next);
    }
    window
}

/// Builds `M_n` and `M_n^{-1}` for a single key.
///
/// Backward row sequences are cached up to the deepest index requested so
/// far, so repeated inversions at the same or smaller `n` are cheap. The
/// cache makes the builder `!Sync` in spirit: use one builder per thread.
#[derive(Clone, Debug)]
pub struct MatrixBuilder {
    rec: Recurrence,
    m0: IntMatrix,
    m0_inv: Option<RatMatrix>,
    /// `backward[i][t]` is `Y_i(-(t + 1))`.
    backward: Vec<Vec<BigRational>>,
    fingerprint: String,
}

impl MatrixBuilder {
    pub fn new(key: &CodingKey) -> Result<Self> {
        let rec = key.recurrence()?;
        let m0 = key.initial_matrix()?;
        Ok(Self {
            backward: vec![Vec::new(); m0.dim()],
            rec,
            m0,
            m0_inv: None,
            fingerprint: key.fingerprint(),
        })
    }

    pub fn recurrence(&self) -> &Recurrence {
        &self.rec
    }

    pub fn initial_matrix(&self) -> &IntMatrix {
        &self.m0
    }

    pub fn matrix(&self, n: u64) -> IntMatrix {
        let k = self.m0.dim();
        let rows: Vec<Vec<BigInt>> =
            row_windows(&self.m0).into_iter().map(|w| advance(&self.rec, w, n)).collect();
        IntMatrix::from_rows(rows).unwrap_or_else(|_| IntMatrix::zeros(k))
    }

    pub fn coding_matrix(&self, n: u64) -> CodingMatrix {
        CodingMatrix { n, m: self.matrix(n), fingerprint: self.fingerprint.clone() }
    }

    fn extend_backward_to(&mut self, depth: usize) -> Result<()> {
        if !self.rec.is_invertible() {
            return Err(Error::NotBackwardExtendable);
        }
        let k = self.m0.dim();
        for i in 0..k {
            let have = self.backward[i].len();
            if have >= depth {
                continue;
            }
            // Current window (Y(-have+k-1), ..., Y(-have)).
            let mut window: Vec<BigRational> =
                (0..k).map(|c| self.term(i, (k - 1 - c) as i64 - have as i64)).collect();
            for _ in have..depth {
                let prev = step_backward(&self.rec, &window)?;
                window.remove(0);
                window.push(prev.clone());
                self.backward[i].push(prev);
            }
        }
        Ok(())
    }

    /// `Y_i(t)` for `t >= -cached depth`.
    fn term(&self, i: usize, t: i64) -> BigRational {
        let k = self.m0.dim() as i64;
        if t >= 0 {
            debug_assert!(t < k);
            BigRational::from_integer(self.m0.get(i, (k - 1 - t) as usize).clone())
        } else {
            self.backward[i][(-t - 1) as usize].clone()
        }
    }

    /// `M_{-n}` from backward row sequences.
    pub fn negative(&mut self, n: u64) -> Result<RatMatrix> {
        let k = self.m0.dim();
        self.extend_backward_to(n as usize)?;
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            for c in 0..k {
                let t = (k - 1 - c) as i64 - n as i64;
                if t >= k as i64 {
                    unreachable!();
                }
                data.push(self.term(i, t));
            }
        }
        RatMatrix::new(k, data)
    }

    pub fn initial_inverse(&mut self) -> Result<RatMatrix> {
        if self.m0_inv.is_none() {
            self.m0_inv = Some(self.m0.inverse()?);
        }
        Ok(self.m0_inv.clone().expect("just set"))
    }

    /// `M_n^{-1} = M_0^{-1} M_{-n} M_0^{-1}`.
    pub fn inverse(&mut self, n: u64) -> Result<RatMatrix> {
        let inv0 = self.initial_inverse()?;
        let neg = self.negative(n)?;
        inv0.mul(&neg)?.mul(&inv0)
    }
}

pub fn coding_matrix(key: &CodingKey, n: u64) -> Result<CodingMatrix> {
    Ok(MatrixBuilder::new(key)?.coding_matrix(n))
}

pub fn coding_matrix_inverse(key: &CodingKey, n: u64) -> Result<RatMatrix> {
    MatrixBuilder::new(key)?.inverse(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Required checks make a key unusable when they fail.
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct KeyValidation {
    pub checks: Vec<Check>,
    pub report: Option<SpectralReport>,
}

impl KeyValidation {
    pub fn is_usable(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn status(&self, name: &str) -> Option<CheckStatus> {
        self.check(name).map(|c| c.status)
    }

    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        serde_json::json!({
            "usable": self.is_usable(),
            "checks": self.checks,
            "spectral": self.report.as_ref().map(|r| r.to_json(digits)),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationConfig {
    pub precision: Precision,
    /// Advisory upper bound on the transition ratio.
    pub tau_cap: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { precision: Precision::from_env(), tau_cap: 3.0 }
    }
}

pub fn validate_key(key: &CodingKey, prec: &Precision) -> KeyValidation {
    validate_key_with(key, &ValidationConfig { precision: *prec, ..ValidationConfig::default() })
}

fn push(checks: &mut Vec<Check>, name: &'static str, status: CheckStatus, required: bool, detail: String) {
    checks.push(Check { name, status, required, detail });
}

fn verdict_status(v: Verdict) -> CheckStatus {
    match v {
        Verdict::Yes => CheckStatus::Pass,
        _ => CheckStatus::Warn,
    }
}

pub fn validate_key_with(key: &CodingKey, cfg: &ValidationConfig) -> KeyValidation {
    let mut checks = Vec::new();
    let t = key.transition_matrix();
    let det_t = t.det();
    let invertible = !det_t.is_zero();
    push(
        &mut checks,
        "invertible",
        if invertible { CheckStatus::Pass } else { CheckStatus::Fail },
        true,
        format!("det of transition matrix = {det_t}"),
    );

    let m0 = key.initial_matrix();
    let det_m0 = m0.as_ref().map(IntMatrix::det).unwrap_or_default();
    let m0_ok = !det_m0.is_zero();
    match key {
        CodingKey::RightForm { m0, .. } => {
            push(
                &mut checks,
                "initial_matrix_invertible",
                if m0_ok { CheckStatus::Pass } else { CheckStatus::Fail },
                true,
                format!("det M_0 = {det_m0}"),
            );
            let nonneg = m0.is_nonnegative();
            push(
                &mut checks,
                "initial_matrix_nonnegative",
                if nonneg { CheckStatus::Pass } else { CheckStatus::Fail },
                true,
                if nonneg { "all entries >= 0".into() } else { "negative entry in M_0".into() },
            );
        }
        _ => push(
            &mut checks,
            "cyclic",
            if m0_ok { CheckStatus::Pass } else { CheckStatus::Fail },
            true,
            format!("det M_0 = {det_m0}"),
        ),
    }

    let report = if invertible {
        spectral::analyze_matrix(&t, &cfg.precision).map_err(|e| e.to_string())
    } else {
        Err("transition matrix is singular".into())
    };
    match &report {
        Ok(r) => {
            let (spf, detail) = if key.kind() == KeyKind::RightForm {
                induced_spf(key, r, cfg.precision.tolerance)
            } else {
                (r.is_spf, format!("{} on L{}", r.is_spf, r.note.as_ref().map(|n| format!(": {n}")).unwrap_or_default()))
            };
            push(&mut checks, "strong_perron_frobenius", verdict_status(spf), false, detail);
            push(
                &mut checks,
                "pisot",
                verdict_status(r.is_pisot),
                false,
                format!("{}, sigma = {}", r.is_pisot, r.sigma.to_decimal(6)),
            );
            let tau = r.tau_f64();
            push(
                &mut checks,
                "tau_cap",
                if tau <= cfg.tau_cap { CheckStatus::Pass } else { CheckStatus::Warn },
                false,
                format!("tau = {} (cap {})", r.tau.to_decimal(6), cfg.tau_cap),
            );
            if spf == Verdict::Yes {
                let (status, detail) = match dominant_coordinates(key, r) {
                    Ok(c) => {
                        let tol = cfg.precision.tolerance;
                        let vals: Vec<f64> = c.iter().map(Real::to_f64).collect();
                        let text = vals.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(", ");
                        if vals.iter().all(|&v| v > tol) {
                            (CheckStatus::Pass, format!("dominant coordinates {text}"))
                        } else if vals.iter().all(|&v| v < -tol) {
                            (CheckStatus::Warn, format!("dominant coordinates {text}; negate the initial data"))
                        } else {
                            (CheckStatus::Warn, format!("dominant coordinates {text}; entries may stay mixed in sign"))
                        }
                    }
                    Err(e) => (CheckStatus::Warn, e.to_string()),
                };
                push(&mut checks, "eventually_positive", status, false, detail);
            }
        }
        Err(e) => push(&mut checks, "spectral", CheckStatus::Warn, false, e.clone()),
    }

    if m0_ok && invertible {
        if let Ok(b) = MatrixBuilder::new(key) {
            let m = b.matrix(key.index());
            let positive = m.is_positive();
            push(
                &mut checks,
                "positive_at_index",
                if positive { CheckStatus::Pass } else { CheckStatus::Warn },
                false,
                format!("M_{} {} strictly positive", key.index(), if positive { "is" } else { "is not" }),
            );
        }
    }
    KeyValidation { checks, report: report.ok() }
}

/// SPF of `L = M_0 R M_0^{-1}` for a right-form key: `L` shares the roots of
/// `R`, and its dominant eigenvector is `M_0 xi` with `xi` that of `R`.
fn induced_spf(key: &CodingKey, r: &SpectralReport, tol: f64) -> (Verdict, String) {
    if !matches!(spectral::dominance(&r.roots, tol), spectral::Dominance::Simple(_)) {
        let note = r.note.clone().unwrap_or_default();
        return (r.is_spf, format!("{} on L = M_0 R M_0^-1: {note}", r.is_spf));
    }
    let coords = match dominant_coordinates(key, r) {
        Ok(c) => c,
        Err(e) => return (Verdict::Indeterminate, e.to_string()),
    };
    let vals: Vec<f64> = coords.iter().map(Real::to_f64).collect();
    let thr = tol * vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let verdict = if vals.iter().all(|&v| v > thr) || vals.iter().all(|&v| v < -thr) {
        Verdict::Yes
    } else if vals.iter().any(|&v| v > thr) && vals.iter().any(|&v| v < -thr) {
        Verdict::No
    } else {
        Verdict::Indeterminate
    };
    (verdict, format!("{verdict} on L = M_0 R M_0^-1 (dominant eigenvector M_0 xi)"))
}

/// Coefficients of the initial data along the dominant eigendirection.
///
/// For `L`-keys this is `w . x_0` with `w` the dominant left eigenvector of
/// `L`; for right-form keys it is `r_i . u` for every row `r_i` of `M_0`
/// with `u` the dominant right eigenvector of `R`. Each eigenvector is
/// scaled so its largest entry is `+1`.
pub fn dominant_coordinates(key: &CodingKey, report: &SpectralReport) -> Result<Vec<Real>> {
    let tau = &report.tau;
    let bits = tau.bits();
    let dot = |a: &[Real], b: &[BigInt]| {
        a.iter().zip(b).fold(Real::zero(bits), |acc, (x, y)| acc.add(&x.mul_int(y)))
    };
    match key {
        CodingKey::Symmetric { .. } | CodingKey::General { .. } => {
            let w = spectral::eigenvector(&key.transition_matrix().transpose(), tau);
            let m0 = key.initial_matrix()?;
            Ok(vec![dot(&w, &m0.column(m0.dim() - 1))])
        }
        CodingKey::RightForm { rec, m0, .. } => {
            let u = spectral::eigenvector(&right_companion(rec), tau);
            Ok(m0.rows().map(|r| dot(&u, r)).collect())
        }
    }
}

/// Sum of `|entries|`, used by callers that need a size estimate.
pub fn entry_magnitude(m: &IntMatrix) -> BigInt {
    m.entries().iter().map(Signed::abs).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(rows).unwrap()
    }

    #[test]
    fn companions() {
        assert_eq!(left_companion(&Recurrence::tribonacci()), m(&[vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 0]]));
        assert_eq!(left_companion(&Recurrence::wielandt(3)), m(&[vec![0, 1, 1], vec![1, 0, 0], vec![0, 1, 0]]));
        assert_eq!(left_companion(&Recurrence::fibonacci()), m(&[vec![1, 1], vec![1, 0]]));
        let rec = Recurrence::from_i64(&[-4, 0, 5]).unwrap();
        assert_eq!(right_companion(&rec), m(&[vec![5, 1, 0], vec![0, 0, 1], vec![-4, 0, 0]]));
    }

    #[test]
    fn initial_matrices() {
        let l = left_companion(&Recurrence::p_fibonacci(2));
        let x0 = SeedWindow::standard(3);
        assert_eq!(initial_matrix(&l, x0.values()).unwrap(), m(&[vec![1, 1, 1], vec![1, 1, 0], vec![1, 0, 0]]));
        let l = m(&[vec![1, 2], vec![3, 4]]);
        let x0 = vec![BigInt::from(1), BigInt::from(0)];
        assert_eq!(initial_matrix(&l, &x0).unwrap(), m(&[vec![1, 1], vec![3, 0]]));
    }

    #[test]
    fn cyclicity() {
        let l = left_companion(&Recurrence::tribonacci());
        assert!(is_cyclic(&l, SeedWindow::standard(3).values()));
        assert!(!is_cyclic(&l, &[BigInt::zero(), BigInt::zero(), BigInt::zero()]));
        assert!(!is_cyclic(&IntMatrix::identity(3), &[BigInt::one(), BigInt::from(2), BigInt::from(3)]));
    }

    #[test]
    fn two_fibonacci_m15() {
        let key = CodingKey::standard(Recurrence::p_fibonacci(2), 15);
        let cm = coding_matrix(&key, 15).unwrap();
        assert_eq!(cm.m, m(&[vec![406, 277, 189], vec![277, 189, 129], vec![189, 129, 88]]));
        let inv = coding_matrix_inverse(&key, 15).unwrap();
        assert_eq!(inv.to_int().unwrap(), m(&[vec![9, -5, -12], vec![-5, -7, 21], vec![-12, 21, -5]]));
        assert_eq!(coding_matrix(&key, 0).unwrap().m, key.initial_matrix().unwrap());
    }

    #[test]
    fn general_and_right_form_examples() {
        let key = CodingKey::general(m(&[vec![1, 2], vec![3, 4]]), vec![BigInt::one(), BigInt::zero()], 9).unwrap();
        assert_eq!(coding_matrix(&key, 9).unwrap().m, m(&[vec![4783807, 890461], vec![10458075, 1946673]]));

        let rec = Recurrence::from_i64(&[-4, 0, 5]).unwrap();
        let m0 = m(&[vec![2, 1, 0], vec![1, 1, 1], vec![4, 2, 1]]);
        let key = CodingKey::right_form(rec.clone(), m0.clone(), 5).unwrap();
        let direct = m0.mul(&right_companion(&rec).pow(5)).unwrap();
        assert_eq!(coding_matrix(&key, 5).unwrap().m, direct);
        let inv = coding_matrix_inverse(&key, 5).unwrap();
        assert_eq!(inv, direct.inverse().unwrap());
    }

    #[test]
    fn builder_cache_reuse() {
        let key = CodingKey::standard(Recurrence::tribonacci(), 12);
        let mut b = MatrixBuilder::new(&key).unwrap();
        let deep = b.inverse(20).unwrap();
        let shallow = b.inverse(7).unwrap();
        assert_eq!(deep, b.matrix(20).inverse().unwrap());
        assert_eq!(shallow, b.matrix(7).inverse().unwrap());
    }

    #[test]
    fn validation_flags() {
        let p = Precision::default();
        let v = validate_key(&CodingKey::standard(Recurrence::p_fibonacci(2), 15), &p);
        assert!(v.is_usable());
        assert!(v.checks.iter().all(|c| c.status == CheckStatus::Pass), "{:?}", v.checks);

        let v = validate_key(&CodingKey::standard(Recurrence::wielandt(4), 15), &p);
        assert_eq!(v.status("strong_perron_frobenius"), Some(CheckStatus::Pass));
        assert_eq!(v.status("pisot"), Some(CheckStatus::Warn));

        let key = CodingKey::general(m(&[vec![1, 2], vec![3, 4]]), vec![BigInt::one(), BigInt::zero()], 9).unwrap();
        let v = validate_key(&key, &p);
        assert!(v.is_usable());
        assert_eq!(v.status("tau_cap"), Some(CheckStatus::Warn));
        assert!((v.report.unwrap().tau_f64() - 5.372).abs() < 1e-3);

        let key = CodingKey::standard(Recurrence::from_i64(&[0, 1, 1]).unwrap(), 3);
        assert!(!validate_key(&key, &p).is_usable());
    }

    #[test]
    fn negated_key_flips_dominant_sign() {
        let p = Precision::default();
        let key = CodingKey::standard(Recurrence::tribonacci(), 10).negated();
        let v = validate_key(&key, &p);
        assert_eq!(v.status("eventually_positive"), Some(CheckStatus::Warn));
        assert_eq!(v.status("positive_at_index"), Some(CheckStatus::Warn));
        assert!(v.is_usable());
    }
}
