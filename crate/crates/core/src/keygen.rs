//! Key generation: companion sieving, Pisot families near the
//! `(r+1)`-bonacci numbers, growth of primitive 0-1 seeds and right-form
//! keys with random initial matrices.
//!
//! Every candidate `i` of a stream draws from its own generator seeded with
//! `split_seed(seed, i)`, so streams are reproducible and candidates can be
//! produced in any order.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coding::{
    dominant_coordinates, is_cyclic, left_companion, right_companion, validate_key, CheckStatus, CodingKey,
    MatrixBuilder,
};
use crate::error::{Error, Result};
use crate::exactmat::{IntMatrix, IntPolynomial};
use crate::recurrence::{Recurrence, SeedWindow};
use crate::spectral::{
    analyze_matrix, analyze_recurrence, dominance, is_primitive, Dominance, Precision, SpectralReport, Verdict,
};

/// Attempts made by [`random_cyclic_vector`] and [`right_form_keygen`].
pub const RETRY_LIMIT: usize = 256;

/// Largest number of index increments tried while looking for `M_n > 0`.
pub const INDEX_BUMP_LIMIT: u64 = 500;

/// SplitMix64 finaliser applied to `seed + (i + 1) * gamma`.
pub fn split_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn candidate_rng(seed: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split_seed(seed, i))
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub k: usize,
    /// Inclusive coefficient (or entry) range.
    pub range: (i64, i64),
    pub tau_cap: f64,
    pub require_pisot: bool,
    pub seed: u64,
    /// Candidates examined before a stream ends.
    pub budget: u64,
    /// Inclusive range for the initial index before positivity bumping.
    pub index_range: (u64, u64),
    /// Inclusive range for initial-vector and initial-matrix entries.
    pub vector_range: (i64, i64),
    pub precision: Precision,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            k: 3,
            range: (0, 3),
            tau_cap: 3.0,
            require_pisot: false,
            seed: 0,
            budget: 1000,
            index_range: (10, 20),
            vector_range: (0, 3),
            precision: Precision::default(),
        }
    }
}

impl GenConfig {
    pub fn check(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::OrderTooSmall(self.k));
        }
        if self.range.0 > self.range.1 || self.vector_range.0 > self.vector_range.1 {
            return Err(Error::InvalidKey("empty range".into()));
        }
        if self.index_range.0 > self.index_range.1 {
            return Err(Error::InvalidKey("empty index range".into()));
        }
        if self.budget == 0 {
            return Err(Error::InvalidKey("budget must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Sieve,
    AbtFamily,
    PrimitiveGrowth,
    RightForm,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Sieve => "sieve",
            Provenance::AbtFamily => "abt_family",
            Provenance::PrimitiveGrowth => "primitive_growth",
            Provenance::RightForm => "right_form",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedKey {
    pub key: CodingKey,
    pub report: SpectralReport,
    pub provenance: Provenance,
}

/// Counters kept by a key stream.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GenStats {
    pub tried: u64,
    pub accepted: u64,
    pub rejected_spf: u64,
    pub rejected_tau: u64,
    pub rejected_pisot: u64,
    pub rejected_other: u64,
}

/// Why a candidate was discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reject {
    Spf,
    Tau,
    Pisot,
    Other,
}

impl From<Error> for Reject {
    fn from(_: Error) -> Self {
        Reject::Other
    }
}

pub type Candidate = std::result::Result<GeneratedKey, Reject>;

/// Pull-based stream of generated keys.
pub struct KeyStream<F> {
    next: u64,
    budget: u64,
    stats: GenStats,
    make: F,
}

impl<F: FnMut(u64) -> Candidate> KeyStream<F> {
    fn new(budget: u64, make: F) -> Self {
        Self { next: 0, budget, stats: GenStats::default(), make }
    }

    pub fn stats(&self) -> &GenStats {
        &self.stats
    }
}

impl<F: FnMut(u64) -> Candidate> Iterator for KeyStream<F> {
    type Item = GeneratedKey;

    fn next(&mut self) -> Option<GeneratedKey> {
        while self.next < self.budget {
            let i = self.next;
            self.next += 1;
            self.stats.tried += 1;
            match (self.make)(i) {
                Ok(g) => {
                    self.stats.accepted += 1;
                    return Some(g);
                }
                Err(Reject::Spf) => self.stats.rejected_spf += 1,
                Err(Reject::Tau) => self.stats.rejected_tau += 1,
                Err(Reject::Pisot) => self.stats.rejected_pisot += 1,
                Err(Reject::Other) => self.stats.rejected_other += 1,
            }
        }
        None
    }
}

/// Spectral screening shared by the generators.
fn screen(report: &SpectralReport, cfg: &GenConfig) -> std::result::Result<(), Reject> {
    if report.is_spf != Verdict::Yes {
        return Err(Reject::Spf);
    }
    if report.tau_f64() > cfg.tau_cap {
        return Err(Reject::Tau);
    }
    if cfg.require_pisot && report.is_pisot != Verdict::Yes {
        return Err(Reject::Pisot);
    }
    Ok(())
}

/// Rejection-samples an integer vector with entries in `range` until it is
/// cyclic for `l`.
pub fn random_cyclic_vector<R: Rng>(l: &IntMatrix, range: (i64, i64), rng: &mut R) -> Result<Vec<BigInt>> {
    let k = l.dim();
    for _ in 0..RETRY_LIMIT {
        let v: Vec<BigInt> = (0..k).map(|_| BigInt::from(rng.gen_range(range.0..=range.1))).collect();
        if v.iter().any(|x| !x.is_zero()) && is_cyclic(l, &v) {
            return Ok(v);
        }
    }
    Err(Error::NoCyclicVector(RETRY_LIMIT))
}

/// Orients the key so its dominant coordinates are positive, then moves the
/// index up from `start` until `M_n` is entrywise positive.
fn finish_key(key: CodingKey, report: &SpectralReport, start: u64) -> std::result::Result<CodingKey, Reject> {
    let coords = dominant_coordinates(&key, report)?;
    let key = if coords.iter().all(|c| c.is_negative()) { key.negated() } else { key };
    let builder = MatrixBuilder::new(&key)?;
    for n in start..=start + INDEX_BUMP_LIMIT {
        if builder.matrix(n).is_positive() {
            let key = key.with_index(n);
            return if validate_key(&key, &Precision::default()).is_usable() { Ok(key) } else { Err(Reject::Other) };
        }
    }
    Err(Reject::Other)
}

fn draw_index<R: Rng>(cfg: &GenConfig, rng: &mut R) -> u64 {
    rng.gen_range(cfg.index_range.0..=cfg.index_range.1)
}

/// Keys from random companion polynomials with coefficients in
/// `cfg.range` and `a_0 != 0`.
pub fn sieve_companion(cfg: GenConfig) -> Result<KeyStream<impl FnMut(u64) -> Candidate>> {
    cfg.check()?;
    if cfg.range == (0, 0) {
        return Err(Error::InvalidKey("coefficient range {0} leaves a_0 = 0".into()));
    }
    let budget = cfg.budget;
    Ok(KeyStream::new(budget, move |i| {
        let mut rng = candidate_rng(cfg.seed, i);
        let (lo, hi) = cfg.range;
        let mut coeffs: Vec<BigInt> = (0..cfg.k).map(|_| BigInt::from(rng.gen_range(lo..=hi))).collect();
        while coeffs[0].is_zero() {
            coeffs[0] = BigInt::from(rng.gen_range(lo..=hi));
        }
        let rec = Recurrence::new(coeffs)?;
        companion_key(rec, &cfg, &mut rng, Provenance::Sieve)
    }))
}

fn companion_key<R: Rng>(rec: Recurrence, cfg: &GenConfig, rng: &mut R, provenance: Provenance) -> Candidate {
    let report = analyze_recurrence(&rec, &cfg.precision)?;
    screen(&report, cfg)?;
    let l = left_companion(&rec);
    let x0 = random_cyclic_vector(&l, cfg.vector_range, rng)?;
    let n = draw_index(cfg, rng);
    let key = CodingKey::symmetric(rec, SeedWindow::new(x0), n)?;
    let key = finish_key(key, &report, n)?;
    Ok(GeneratedKey { key, report, provenance })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AbtSign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AbtVariant {
    /// `z^m Psi_r(z) +- (z^{r+1} - 1)`.
    PowerDifference,
    /// `z^m Psi_r(z) +- (z^r - 1)/(z - 1)`.
    Geometric,
}

#[derive(Clone, Debug)]
pub struct AbtPolynomial {
    pub poly: IntPolynomial,
    /// Trivial factors divided out, as their roots (`1` or `-1`).
    pub removed: Vec<i64>,
    pub report: SpectralReport,
    /// Dominant root above 2, as happens for small `m`.
    pub tau_above_two: bool,
}

/// `Psi_r(z) = z^{r+1} - z^r - ... - z - 1`.
pub fn psi(r: usize) -> IntPolynomial {
    let mut c = vec![BigInt::from(-1); r + 1];
    c.push(BigInt::one());
    IntPolynomial::new(c)
}

/// Member of the Amara-Boyd-Talmoudi families around the `(r+1)`-bonacci
/// number, with factors `z - 1` and `z + 1` divided out while they divide.
pub fn abt_family(r: usize, m: usize, sign: AbtSign, variant: AbtVariant, prec: &Precision) -> Result<AbtPolynomial> {
    if r == 0 || m == 0 {
        return Err(Error::InvalidKey("abt family needs r >= 1 and m >= 1".into()));
    }
    let base = IntPolynomial::monomial(BigInt::one(), m).mul(&psi(r));
    let tail = match variant {
        AbtVariant::PowerDifference => IntPolynomial::monomial(BigInt::one(), r + 1).sub(&IntPolynomial::one()),
        AbtVariant::Geometric => IntPolynomial::new(vec![BigInt::one(); r]),
    };
    let mut poly = match sign {
        AbtSign::Plus => base.add(&tail),
        AbtSign::Minus => base.sub(&tail),
    };
    let mut removed = Vec::new();
    for root in [1i64, -1] {
        let factor = IntPolynomial::from_i64(&[-root, 1]);
        while poly.degree().unwrap_or(0) > 1 && poly.eval(&BigInt::from(root)).is_zero() {
            poly = poly.divide(&factor)?.0;
            removed.push(root);
        }
    }
    let report = analyze_recurrence(&Recurrence::from_char_poly(&poly)?, prec)?;
    let tau_above_two = report.tau_f64() > 2.0;
    Ok(AbtPolynomial { poly, removed, report, tau_above_two })
}

/// Symmetric key over an ABT polynomial with a random cyclic vector.
pub fn abt_key(r: usize, m: usize, sign: AbtSign, variant: AbtVariant, cfg: &GenConfig) -> Result<GeneratedKey> {
    cfg.check()?;
    let fam = abt_family(r, m, sign, variant, &cfg.precision)?;
    let rec = Recurrence::from_char_poly(&fam.poly)?;
    let screen_cfg = GenConfig { tau_cap: f64::INFINITY, ..cfg.clone() };
    for attempt in 0..RETRY_LIMIT as u64 {
        let mut rng = candidate_rng(cfg.seed, attempt);
        match companion_key(rec.clone(), &screen_cfg, &mut rng, Provenance::AbtFamily) {
            Ok(g) => return Ok(g),
            Err(Reject::Spf) => return Err(Error::NotSpf(fam.poly.to_string())),
            Err(Reject::Pisot) => return Err(Error::InvalidKey(format!("{} is not certified Pisot", fam.poly))),
            Err(_) => {}
        }
    }
    Err(Error::RetryExhausted(RETRY_LIMIT))
}

fn is_zero_one(m: &IntMatrix) -> bool {
    m.entries().iter().all(|v| v.is_zero() || v.is_one())
}

fn max_line_sum(m: &IntMatrix) -> BigInt {
    let k = m.dim();
    let rows = (0..k).map(|i| m.row(i).iter().sum::<BigInt>());
    let cols = (0..k).map(|j| m.column(j).iter().sum::<BigInt>());
    let r = rows.max().unwrap_or_default();
    let c = cols.max().unwrap_or_default();
    r.min(c)
}

/// Random enlargements of a primitive 0-1 seed.
///
/// Each candidate increments a few entries, choosing an entry with
/// probability proportional to `1 / (1 + entry)` and never exceeding
/// `cfg.range.1`. When the smaller of the largest row and column sums is
/// within the cap, `tau` is within it too; otherwise `tau` is computed and
/// compared directly.
pub fn primitive_growth(seed01: IntMatrix, cfg: GenConfig) -> Result<KeyStream<impl FnMut(u64) -> Candidate>> {
    cfg.check()?;
    if !is_zero_one(&seed01) {
        return Err(Error::InvalidKey("seed must be a 0-1 matrix".into()));
    }
    if !is_primitive(&seed01)? {
        return Err(Error::NotPrimitive);
    }
    let budget = cfg.budget;
    let k = seed01.dim();
    let cap = BigInt::from(cfg.range.1.max(1));
    Ok(KeyStream::new(budget, move |i| {
        let mut rng = candidate_rng(cfg.seed, i);
        let mut l = seed01.clone();
        let steps = rng.gen_range(1..=k);
        for _ in 0..steps {
            let weights: Vec<f64> = l
                .entries()
                .iter()
                .map(|v| if *v >= cap { 0.0 } else { 1.0 / (1.0 + crate::exactmat::to_f64(v)) })
                .collect();
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                break;
            }
            let mut pick = rng.gen_range(0.0..total);
            let mut idx = weights.len() - 1;
            for (j, w) in weights.iter().enumerate() {
                if pick < *w {
                    idx = j;
                    break;
                }
                pick -= w;
            }
            let (r, c) = (idx / k, idx % k);
            let v = l.get(r, c) + 1;
            l.set(r, c, v);
        }
        if !is_primitive(&l)? {
            return Err(Reject::Other);
        }
        let report = analyze_matrix(&l, &cfg.precision)?;
        if max_line_sum(&l) > BigInt::from(cfg.tau_cap.floor() as i64) {
            screen(&report, &cfg)?;
        } else {
            screen(&report, &GenConfig { tau_cap: f64::INFINITY, ..cfg.clone() })?;
        }
        let x0 = random_cyclic_vector(&l, cfg.vector_range, &mut rng)?;
        let n = draw_index(&cfg, &mut rng);
        let key = CodingKey::general(l, x0, n)?;
        let key = finish_key(key, &report, n)?;
        Ok(GeneratedKey { key, report, provenance: Provenance::PrimitiveGrowth })
    }))
}

/// Right-form key with a random nonnegative invertible initial matrix.
pub fn right_form_keygen(rec: Recurrence, cfg: &GenConfig) -> Result<GeneratedKey> {
    cfg.check()?;
    if !rec.is_invertible() {
        return Err(Error::NotBackwardExtendable);
    }
    let report = analyze_matrix(&right_companion(&rec), &cfg.precision)?;
    if !matches!(dominance(&report.roots, cfg.precision.tolerance), Dominance::Simple(_)) {
        return Err(Error::NotSpf(rec.char_poly().to_string()));
    }
    let k = rec.order();
    let (lo, hi) = (cfg.vector_range.0.max(0), cfg.vector_range.1.max(1));
    let mut rng = candidate_rng(cfg.seed, 0);
    for _ in 0..RETRY_LIMIT {
        let data: Vec<BigInt> = (0..k * k).map(|_| BigInt::from(rng.gen_range(lo..=hi))).collect();
        let m0 = IntMatrix::new(k, data)?;
        if m0.det().is_zero() {
            continue;
        }
        let n = draw_index(cfg, &mut rng);
        let key = CodingKey::right_form(rec.clone(), m0, n)?;
        let v = validate_key(&key, &cfg.precision);
        if v.status("strong_perron_frobenius") != Some(CheckStatus::Pass) {
            continue;
        }
        if let Ok(key) = finish_key(key, &report, n) {
            return Ok(GeneratedKey { key, report, provenance: Provenance::RightForm });
        }
    }
    Err(Error::RetryExhausted(RETRY_LIMIT))
}

/// The right companion matrix a right-form key transitions with.
pub fn right_form_transition(rec: &Recurrence) -> IntMatrix {
    right_companion(rec)
}
