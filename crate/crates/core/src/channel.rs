//! Simulated noisy transmission of ciphertext blocks.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;
use crate::keygen::split_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Uniform replacement within `magnitude` of the original value.
    ReplaceUniform,
    /// Swap of two adjacent, different decimal digits.
    DigitTranspose,
    /// Nonzero additive noise in `[-magnitude, magnitude]`.
    AdditiveNoise,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::ReplaceUniform => "replace_uniform",
            ErrorKind::DigitTranspose => "digit_transpose",
            ErrorKind::AdditiveNoise => "additive_noise",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "replace_uniform" => Ok(ErrorKind::ReplaceUniform),
            "digit_transpose" => Ok(ErrorKind::DigitTranspose),
            "additive_noise" => Ok(ErrorKind::AdditiveNoise),
            other => Err(Error::Parse(format!("unknown error model '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub kind: ErrorKind,
    /// Corrupted entries per block, at distinct positions.
    pub count: usize,
    pub magnitude: u64,
    pub seed: u64,
}

/// One corrupted entry; positions are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corruption {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    #[serde(with = "decimal")]
    pub original: BigInt,
    #[serde(with = "decimal")]
    pub value: BigInt,
}

mod decimal {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Record of what the channel changed, for auditing corrections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub model: Option<ErrorModel>,
    pub corruptions: Vec<Corruption>,
}

fn swap_digits<R: Rng>(v: &BigInt, rng: &mut R) -> Option<BigInt> {
    let s = v.abs().to_string();
    let b = s.as_bytes();
    let spots: Vec<usize> = (0..b.len().saturating_sub(1)).filter(|&i| b[i] != b[i + 1]).collect();
    let &i = spots.get(rng.gen_range(0..spots.len().max(1)))?;
    let mut t = b.to_vec();
    t.swap(i, i + 1);
    let out: BigInt = std::str::from_utf8(&t).ok()?.parse().ok()?;
    Some(if v.is_negative() { -out } else { out })
}

fn nonzero_offset<R: Rng>(magnitude: u64, rng: &mut R) -> BigInt {
    let m = magnitude.max(1) as i128;
    let d = rng.gen_range(1..=m);
    BigInt::from(if rng.gen_bool(0.5) { d } else { -d })
}

fn corrupt_value<R: Rng>(kind: ErrorKind, v: &BigInt, magnitude: u64, rng: &mut R) -> BigInt {
    match kind {
        ErrorKind::AdditiveNoise => v + nonzero_offset(magnitude, rng),
        ErrorKind::ReplaceUniform => {
            // Keep nonnegative entries nonnegative by reflecting.
            let w = v + nonzero_offset(magnitude, rng);
            if w.is_negative() && !v.is_negative() {
                v + (v - &w)
            } else {
                w
            }
        }
        ErrorKind::DigitTranspose => swap_digits(v, rng).unwrap_or_else(|| v + nonzero_offset(1, rng)),
    }
}

/// Corrupts `count` distinct entries of every block. Block `b` draws from
/// its own generator seeded with `split_seed(seed, b)`.
pub fn corrupt(blocks: &[IntMatrix], model: &ErrorModel) -> Result<(Vec<IntMatrix>, GroundTruth)> {
    corrupt_columns(blocks, model, None)
}

/// Like [`corrupt`], with positions drawn only from the given 0-based
/// columns.
pub fn corrupt_columns(
    blocks: &[IntMatrix],
    model: &ErrorModel,
    columns: Option<&[usize]>,
) -> Result<(Vec<IntMatrix>, GroundTruth)> {
    let mut out = blocks.to_vec();
    let mut corruptions = Vec::new();
    for (b, block) in out.iter_mut().enumerate() {
        let k = block.dim();
        let cols: Vec<usize> = match columns {
            Some(c) => {
                if let Some(&bad) = c.iter().find(|&&c| c >= k) {
                    return Err(Error::DimensionMismatch { expected: k, found: bad + 1 });
                }
                c.to_vec()
            }
            None => (0..k).collect(),
        };
        let cells: Vec<(usize, usize)> = (0..k).flat_map(|r| cols.iter().map(move |&c| (r, c))).collect();
        if model.count > cells.len() {
            return Err(Error::DimensionMismatch { expected: cells.len(), found: model.count });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(model.seed, b as u64));
        let mut positions: Vec<(usize, usize)> =
            sample(&mut rng, cells.len(), model.count).into_iter().map(|i| cells[i]).collect();
        positions.sort_unstable();
        for (row, col) in positions {
            let original = block.get(row, col).clone();
            let mut value = corrupt_value(model.kind, &original, model.magnitude, &mut rng);
            if value == original {
                value = &original + 1;
            }
            block.set(row, col, value.clone());
            corruptions.push(Corruption { block: b, row, col, original, value });
        }
    }
    Ok((out, GroundTruth { model: Some(*model), corruptions }))
}

/// Sets explicit values; the returned record carries the replaced values.
pub fn apply(blocks: &[IntMatrix], edits: &[(usize, usize, usize, BigInt)]) -> Result<(Vec<IntMatrix>, GroundTruth)> {
    let mut out = blocks.to_vec();
    let mut corruptions = Vec::new();
    for (block, row, col, value) in edits {
        let m = out.get_mut(*block).ok_or(Error::DimensionMismatch { expected: blocks.len(), found: block + 1 })?;
        let k = m.dim();
        if *row >= k || *col >= k {
            return Err(Error::DimensionMismatch { expected: k, found: row.max(col) + 1 });
        }
        let original = m.get(*row, *col).clone();
        m.set(*row, *col, value.clone());
        corruptions.push(Corruption { block: *block, row: *row, col: *col, original, value: value.clone() });
    }
    Ok((out, GroundTruth { model: None, corruptions }))
}

/// Undoes a recorded corruption.
pub fn restore(blocks: &[IntMatrix], truth: &GroundTruth) -> Vec<IntMatrix> {
    let mut out = blocks.to_vec();
    for c in truth.corruptions.iter().rev() {
        if let Some(m) = out.get_mut(c.block) {
            m.set(c.row, c.col, c.original.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks() -> Vec<IntMatrix> {
        vec![
            IntMatrix::from_i64(&[vec![60861, 41528, 28337], vec![68585, 46798, 31933], vec![68601, 46809, 31940]])
                .unwrap(),
            IntMatrix::from_i64(&[vec![580, 5, 1], vec![2, 3, 4], vec![5, 6, 7]]).unwrap(),
        ]
    }

    #[test]
    fn explicit_single_error() {
        let (c, t) = apply(&blocks(), &[(0, 0, 2, BigInt::from(28373))]).unwrap();
        assert_eq!(c[0].get(0, 2), &BigInt::from(28373));
        assert_eq!(t.corruptions[0].original, BigInt::from(28337));
        assert_eq!(restore(&c, &t), blocks());
    }

    #[test]
    fn zero_count_is_identity() {
        let m = ErrorModel { kind: ErrorKind::ReplaceUniform, count: 0, magnitude: 10, seed: 1 };
        let (c, t) = corrupt(&blocks(), &m).unwrap();
        assert_eq!(c, blocks());
        assert!(t.corruptions.is_empty());
    }

    #[test]
    fn distinct_positions_and_changes() {
        for kind in [ErrorKind::ReplaceUniform, ErrorKind::DigitTranspose, ErrorKind::AdditiveNoise] {
            for seed in 0..20 {
                let m = ErrorModel { kind, count: 4, magnitude: 50, seed };
                let (c, t) = corrupt(&blocks(), &m).unwrap();
                assert_eq!(t.corruptions.len(), 8);
                for b in 0..2 {
                    let mut pos: Vec<_> =
                        t.corruptions.iter().filter(|x| x.block == b).map(|x| (x.row, x.col)).collect();
                    pos.dedup();
                    assert_eq!(pos.len(), 4);
                }
                assert!(t.corruptions.iter().all(|x| x.original != x.value));
                assert_eq!(restore(&c, &t), blocks());
                assert_eq!(corrupt(&blocks(), &m).unwrap().0, c);
            }
        }
    }

    #[test]
    fn transposition_of_580() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let seen: Vec<BigInt> = (0..20).filter_map(|_| swap_digits(&BigInt::from(580), &mut rng)).collect();
        assert!(seen.contains(&BigInt::from(508)));
        assert!(seen.iter().all(|v| *v == BigInt::from(508) || *v == BigInt::from(850)));
        assert_eq!(swap_digits(&BigInt::from(7), &mut rng), None);
    }

    #[test]
    fn restricted_columns() {
        let m = ErrorModel { kind: ErrorKind::AdditiveNoise, count: 3, magnitude: 5, seed: 3 };
        let (_, t) = corrupt_columns(&blocks(), &m, Some(&[2])).unwrap();
        assert!(t.corruptions.iter().all(|c| c.col == 2));
        let m4 = ErrorModel { count: 4, ..m };
        assert!(corrupt_columns(&blocks(), &m4, Some(&[2])).is_err());
        assert!(corrupt_columns(&blocks(), &m, Some(&[3])).is_err());
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("digit-transpose".parse::<ErrorKind>().unwrap(), ErrorKind::DigitTranspose);
        assert!("gamma".parse::<ErrorKind>().is_err());
    }
}
