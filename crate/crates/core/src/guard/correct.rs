//! Candidate enumeration for flagged entries.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::CheckingRange;
use super::detect::RowDiagnosis;
use super::Guard;
use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;

/// Default cap on tested combinations per row.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Tested candidates kept per row for reporting.
pub const TRACE_LIMIT: usize = 32;

/// Acceptance rule for decrypted symbols.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validator {
    /// Any byte `0..=255`.
    #[default]
    Bytes,
    /// Printable ASCII plus tab, newline and carriage return.
    Printable,
    /// `A-Z`, `a-z` and space.
    Letters,
}

impl Validator {
    pub fn accepts(&self, v: &BigInt) -> bool {
        let Some(b) = v.to_u8() else { return false };
        match self {
            Validator::Bytes => true,
            Validator::Printable => (0x20..=0x7e).contains(&b) || matches!(b, b'\t' | b'\n' | b'\r'),
            Validator::Letters => b.is_ascii_alphabetic() || b == b' ',
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Validator::Bytes => "bytes",
            Validator::Printable => "printable",
            Validator::Letters => "letters",
        }
    }
}

impl FromStr for Validator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bytes" => Ok(Validator::Bytes),
            "printable" => Ok(Validator::Printable),
            "letters" => Ok(Validator::Letters),
            other => Err(Error::Parse(format!("unknown validator '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorrectConfig {
    pub validator: Validator,
    /// Maximum combinations tested per row.
    pub budget: u64,
    /// Keep searching after the first valid candidate, to expose ambiguity.
    pub exhaustive: bool,
}

impl Default for CorrectConfig {
    fn default() -> Self {
        Self { validator: Validator::Bytes, budget: DEFAULT_BUDGET, exhaustive: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CandidateStatus {
    Valid,
    NonIntegral { col: usize },
    OutOfAlphabet { col: usize },
    NonZeroPadding { col: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestedCandidate {
    /// Values for the flagged columns, in column order.
    pub values: Vec<BigInt>,
    pub status: CandidateStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOutcome {
    /// Nothing flagged.
    Clean,
    /// Exactly one valid candidate found (or the first, in non-exhaustive
    /// mode).
    Corrected,
    /// Several valid candidates; the first in search order is applied.
    Ambiguous,
    /// The search completed without a valid candidate.
    NoValidCandidate,
    /// The budget ran out before any valid candidate.
    BudgetExhausted,
    /// No trusted entry, or no bounded range.
    Uncorrectable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowCorrection {
    pub block: usize,
    pub row: usize,
    pub trusted: Vec<usize>,
    pub flagged: Vec<usize>,
    /// One intersected range per flagged column.
    pub ranges: Vec<CheckingRange>,
    /// Valid candidates in discovery order.
    pub accepted: Vec<Vec<BigInt>>,
    /// 1-based position of the first valid candidate in search order.
    pub first_accepted_at: Option<u64>,
    pub tested: u64,
    /// Whether the full candidate space was searched.
    pub complete: bool,
    pub trace: Vec<TestedCandidate>,
    pub outcome: RowOutcome,
}

impl RowCorrection {
    fn new(block: usize, d: &RowDiagnosis, outcome: RowOutcome) -> Self {
        Self {
            block,
            row: d.row,
            trusted: d.trusted.clone(),
            flagged: d.flagged.clone(),
            ranges: Vec::new(),
            accepted: Vec::new(),
            first_accepted_at: None,
            tested: 0,
            complete: true,
            trace: Vec::new(),
            outcome,
        }
    }

    pub fn is_resolved(&self) -> bool {
        matches!(self.outcome, RowOutcome::Clean | RowOutcome::Corrected)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectionResult {
    /// Blocks with the first valid candidate applied to every row that has
    /// one; other rows are left as received.
    pub blocks: Vec<IntMatrix>,
    /// One entry per row that had flagged columns.
    pub rows: Vec<RowCorrection>,
    pub tested: u64,
}

impl CorrectionResult {
    /// Every flagged row has exactly one valid candidate.
    pub fn is_success(&self) -> bool {
        self.rows.iter().all(RowCorrection::is_resolved)
    }

    pub fn budget_exhausted(&self) -> bool {
        self.rows.iter().any(|r| r.outcome == RowOutcome::BudgetExhausted)
    }
}

/// Visits index tuples with `t[i] < lens[i]` in order of increasing sum,
/// lexicographically within a sum. Stops when `f` returns false.
fn for_each_by_rank(lens: &[usize], f: &mut dyn FnMut(&[usize]) -> bool) {
    fn fill(lens: &[usize], pos: usize, left: usize, t: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if pos + 1 == lens.len() {
            if left < lens[pos] {
                t.push(left);
                let go = f(t);
                t.pop();
                return go;
            }
            return true;
        }
        let rest: usize = lens[pos + 1..].iter().map(|l| l - 1).sum();
        let lo = left.saturating_sub(rest);
        for r in lo..=left.min(lens[pos] - 1) {
            t.push(r);
            let go = fill(lens, pos + 1, left - r, t, f);
            t.pop();
            if !go {
                return false;
            }
        }
        true
    }
    if lens.is_empty() || lens.contains(&0) {
        return;
    }
    let max: usize = lens.iter().map(|l| l - 1).sum();
    let mut t = Vec::with_capacity(lens.len());
    for s in 0..=max {
        if !fill(lens, 0, s, &mut t, f) {
            return;
        }
    }
}

impl Guard {
    /// Range for a flagged column: the intersection over all trusted
    /// references, with the estimate taken from the nearest trusted column
    /// (the right one on a tie).
    fn flagged_range(&self, c: &IntMatrix, row: usize, col: usize, trusted: &[usize]) -> Result<CheckingRange> {
        let mut refs: Vec<usize> = trusted.to_vec();
        refs.sort_by_key(|&t| (t.abs_diff(col), std::cmp::Reverse(t)));
        let mut acc: Option<CheckingRange> = None;
        let mut empty = None;
        for t in refs {
            match self.range(c, row, col, t) {
                Ok(r) => acc = Some(acc.map_or(r.clone(), |a| a.intersect(&r))),
                Err(Error::UnboundedRange { .. }) => {}
                Err(e @ Error::EmptyRange { .. }) => empty = Some(e),
                Err(e) => return Err(e),
            }
        }
        if let Some(e) = empty {
            return Err(e);
        }
        let r = acc.ok_or(Error::UnboundedRange { row, col })?;
        if r.lo > r.hi {
            return Err(Error::EmptyRange { row, col });
        }
        Ok(r)
    }

    fn check_row(&self, values: &[BigInt], block: usize, row: usize, len: usize, v: Validator) -> CandidateStatus {
        let dec = self.decryptor.as_ref().expect("checked by caller");
        let plain = match dec.decrypt_row(values) {
            Ok(p) => p,
            Err(col) => return CandidateStatus::NonIntegral { col },
        };
        let k = self.order();
        for (col, x) in plain.iter().enumerate() {
            let pos = block * k * k + row * k + col;
            if pos >= len {
                if !num_traits::Zero::is_zero(x) {
                    return CandidateStatus::NonZeroPadding { col };
                }
            } else if !v.accepts(x) {
                return CandidateStatus::OutOfAlphabet { col };
            }
        }
        CandidateStatus::Valid
    }

    /// Searches candidates for one diagnosed row of block `block`. `len` is
    /// the plaintext length, used for padding checks.
    pub fn correct_row(
        &self,
        c: &IntMatrix,
        block: usize,
        len: usize,
        d: &RowDiagnosis,
        cfg: &CorrectConfig,
    ) -> Result<RowCorrection> {
        if self.decryptor.is_none() {
            return Err(Error::InvalidKey("correction needs the inverse coding matrix".into()));
        }
        if d.is_clean() {
            return Ok(RowCorrection::new(block, d, RowOutcome::Clean));
        }
        if d.trusted.is_empty() {
            return Ok(RowCorrection::new(block, d, RowOutcome::Uncorrectable));
        }
        let row = d.row;
        let mut out = RowCorrection::new(block, d, RowOutcome::NoValidCandidate);
        for &col in &d.flagged {
            match self.flagged_range(c, row, col, &d.trusted) {
                Ok(r) => out.ranges.push(r),
                Err(Error::EmptyRange { .. }) => return Ok(out),
                Err(Error::UnboundedRange { .. }) => {
                    out.outcome = RowOutcome::Uncorrectable;
                    return Ok(out);
                }
                Err(e) => return Err(e),
            }
        }
        let cap = usize::try_from(cfg.budget).unwrap_or(usize::MAX).saturating_add(1);
        let lists: Vec<Vec<BigInt>> = out.ranges.iter().map(|r| r.spiral().take(cap).collect()).collect();
        let lens: Vec<usize> = lists.iter().map(Vec::len).collect();
        let mut values: Vec<BigInt> = c.row(row).to_vec();
        let mut exhausted = false;
        for_each_by_rank(&lens, &mut |t| {
            if out.tested >= cfg.budget {
                exhausted = true;
                return false;
            }
            let chosen: Vec<BigInt> = t.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect();
            for (&col, v) in d.flagged.iter().zip(&chosen) {
                values[col] = v.clone();
            }
            out.tested += 1;
            let status = self.check_row(&values, block, row, len, cfg.validator);
            let valid = status == CandidateStatus::Valid;
            if out.trace.len() < TRACE_LIMIT {
                out.trace.push(TestedCandidate { values: chosen.clone(), status });
            }
            if valid {
                if out.first_accepted_at.is_none() {
                    out.first_accepted_at = Some(out.tested);
                }
                out.accepted.push(chosen);
                if !cfg.exhaustive {
                    return false;
                }
            }
            true
        });
        let searched_all = lens.iter().zip(&out.ranges).all(|(&l, r)| BigInt::from(l) == r.count())
            && out.tested as u128 == lens.iter().map(|&l| l as u128).product::<u128>();
        out.complete = !exhausted && searched_all;
        out.outcome = match out.accepted.len() {
            0 if exhausted || !searched_all => RowOutcome::BudgetExhausted,
            0 => RowOutcome::NoValidCandidate,
            1 => RowOutcome::Corrected,
            _ => RowOutcome::Ambiguous,
        };
        Ok(out)
    }

    /// Corrects one block from its diagnoses.
    pub fn correct_block(
        &self,
        c: &IntMatrix,
        block: usize,
        len: usize,
        diagnoses: &[RowDiagnosis],
        cfg: &CorrectConfig,
    ) -> Result<(IntMatrix, Vec<RowCorrection>)> {
        let mut fixed = c.clone();
        let mut rows = Vec::new();
        for d in diagnoses.iter().filter(|d| !d.is_clean()) {
            let rc = self.correct_row(c, block, len, d, cfg)?;
            if let Some(first) = rc.accepted.first() {
                for (&col, v) in rc.flagged.iter().zip(first) {
                    fixed.set(rc.row, col, v.clone());
                }
            }
            rows.push(rc);
        }
        Ok((fixed, rows))
    }

    /// Corrects every block of a message of `len` bytes.
    pub fn correct(
        &self,
        blocks: &[IntMatrix],
        len: usize,
        diagnoses: &[Vec<RowDiagnosis>],
        cfg: &CorrectConfig,
    ) -> Result<CorrectionResult> {
        if diagnoses.len() != blocks.len() {
            return Err(Error::DimensionMismatch { expected: blocks.len(), found: diagnoses.len() });
        }
        let parts = blocks
            .par_iter()
            .zip(diagnoses.par_iter())
            .enumerate()
            .map(|(b, (c, d))| self.correct_block(c, b, len, d, cfg))
            .collect::<Result<Vec<_>>>()?;
        let mut out = CorrectionResult { blocks: Vec::new(), rows: Vec::new(), tested: 0 };
        for (m, rows) in parts {
            out.tested += rows.iter().map(|r| r.tested).sum::<u64>();
            out.blocks.push(m);
            out.rows.extend(rows);
        }
        Ok(out)
    }
}
