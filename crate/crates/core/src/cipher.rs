//! Byte digitisation, block encryption `C = P M_n` and exact decryption.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::coding::{CodingKey, MatrixBuilder};
use crate::error::{Error, Result};
use crate::exactmat::{IntMatrix, RatMatrix};

/// Largest plaintext symbol.
pub const ALPHABET_MAX: u32 = 255;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digitized {
    pub blocks: Vec<IntMatrix>,
    /// Byte length before zero padding.
    pub len: usize,
}

/// Zero-pad to a multiple of `k^2` and fill `k x k` blocks row by row.
pub fn digitize(bytes: &[u8], k: usize) -> Digitized {
    let per = k * k;
    let blocks = bytes
        .chunks(per)
        .map(|chunk| {
            let mut data: Vec<BigInt> = chunk.iter().map(|&b| BigInt::from(b)).collect();
            data.resize(per, BigInt::zero());
            IntMatrix::new(k, data).expect("length is k^2")
        })
        .collect();
    Digitized { blocks, len: bytes.len() }
}

/// Number of padding positions in the final block.
pub fn padding(blocks: usize, k: usize, len: usize) -> usize {
    blocks * k * k - len
}

fn check_length(blocks: usize, k: usize, len: usize) -> Result<()> {
    let capacity = blocks * k * k;
    let min_blocks = len.div_ceil(k * k);
    if blocks != min_blocks {
        return Err(Error::LengthMismatch { declared: len, capacity });
    }
    Ok(())
}

/// Inverse of [`digitize`]; checks the alphabet and that padding is zero.
pub fn undigitize(blocks: &[IntMatrix], len: usize) -> Result<Vec<u8>> {
    let k = blocks.first().map_or(0, IntMatrix::dim);
    check_length(blocks.len(), k.max(1), len)?;
    let mut out = Vec::with_capacity(len);
    for (b, block) in blocks.iter().enumerate() {
        for (pos, v) in block.entries().iter().enumerate() {
            let (row, col) = (pos / k, pos % k);
            if b * k * k + pos >= len {
                if !v.is_zero() {
                    return Err(Error::NonZeroPadding { block: b, row, col });
                }
                continue;
            }
            match v.to_u8() {
                Some(byte) => out.push(byte),
                None => return Err(Error::OutOfAlphabet { block: b, row, col, value: v.clone() }),
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub k: usize,
    pub blocks: Vec<IntMatrix>,
    pub len: usize,
    pub fingerprint: String,
}

pub fn encrypt_blocks(blocks: &[IntMatrix], m: &IntMatrix) -> Result<Vec<IntMatrix>> {
    blocks.par_iter().map(|p| p.mul(m)).collect()
}

pub fn encrypt(bytes: &[u8], key: &CodingKey) -> Result<Ciphertext> {
    let builder = MatrixBuilder::new(key)?;
    let m = builder.matrix(key.index());
    let d = digitize(bytes, key.order());
    Ok(Ciphertext {
        k: key.order(),
        blocks: encrypt_blocks(&d.blocks, &m)?,
        len: d.len,
        fingerprint: key.fingerprint(),
    })
}

/// `M_n^{-1}` split as `N / d` with integer `N`, so each block costs one
/// integer product and `k^2` exact divisions.
#[derive(Clone, Debug)]
pub struct Decryptor {
    numerators: IntMatrix,
    denominator: BigInt,
}

impl Decryptor {
    pub fn new(inverse: &RatMatrix) -> Self {
        let (numerators, denominator) = inverse.split_denominator();
        Self { numerators, denominator }
    }

    pub fn for_key(key: &CodingKey) -> Result<Self> {
        Ok(Self::new(&MatrixBuilder::new(key)?.inverse(key.index())?))
    }

    /// Exact plaintext block; any non-integral entry is an error.
    pub fn decrypt_block(&self, c: &IntMatrix, block: usize) -> Result<IntMatrix> {
        let prod = c.mul(&self.numerators)?;
        let k = prod.dim();
        let mut data = Vec::with_capacity(k * k);
        for (pos, v) in prod.entries().iter().enumerate() {
            let (q, r) = v.div_rem(&self.denominator);
            if !r.is_zero() {
                return Err(Error::NonIntegral { block, row: pos / k, col: pos % k });
            }
            data.push(q);
        }
        IntMatrix::new(k, data)
    }

    /// One plaintext row from one ciphertext row. `Err(col)` names the first
    /// non-integral column.
    pub fn decrypt_row(&self, row: &[BigInt]) -> std::result::Result<Vec<BigInt>, usize> {
        let k = self.numerators.dim();
        (0..k)
            .map(|c| {
                let s: BigInt = row.iter().enumerate().map(|(r, v)| v * self.numerators.get(r, c)).sum();
                let (q, rem) = s.div_rem(&self.denominator);
                if rem.is_zero() {
                    Ok(q)
                } else {
                    Err(c)
                }
            })
            .collect()
    }

    /// Plaintext block checked against the byte alphabet.
    pub fn decrypt_block_checked(&self, c: &IntMatrix, block: usize) -> Result<IntMatrix> {
        let p = self.decrypt_block(c, block)?;
        let k = p.dim();
        for (pos, v) in p.entries().iter().enumerate() {
            if v.is_negative() || *v > BigInt::from(ALPHABET_MAX) {
                return Err(Error::OutOfAlphabet { block, row: pos / k, col: pos % k, value: v.clone() });
            }
        }
        Ok(p)
    }

    pub fn decrypt_blocks(&self, blocks: &[IntMatrix]) -> Result<Vec<IntMatrix>> {
        blocks
            .par_iter()
            .enumerate()
            .map(|(b, c)| self.decrypt_block_checked(c, b))
            .collect()
    }
}

pub fn decrypt(ct: &Ciphertext, key: &CodingKey) -> Result<Vec<u8>> {
    if ct.k != key.order() {
        return Err(Error::DimensionMismatch { expected: key.order(), found: ct.k });
    }
    let fp = key.fingerprint();
    if ct.fingerprint != fp {
        return Err(Error::FingerprintMismatch { key: fp, cipher: ct.fingerprint.clone() });
    }
    check_length(ct.blocks.len(), ct.k, ct.len)?;
    let plain = Decryptor::for_key(key)?.decrypt_blocks(&ct.blocks)?;
    undigitize(&plain, ct.len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::Recurrence;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(rows).unwrap()
    }

    #[test]
    fn digitize_examples() {
        let d = digitize(b"ALGORITHM", 3);
        assert_eq!(d.blocks, vec![m(&[vec![65, 76, 71], vec![79, 82, 73], vec![84, 72, 77]])]);
        let d = digitize(b"EXTRATERRESTRIAL", 4);
        assert_eq!(
            d.blocks[0],
            m(&[vec![69, 88, 84, 82], vec![65, 84, 69, 82], vec![82, 69, 83, 84], vec![82, 73, 65, 76]])
        );
        let d = digitize(b"", 3);
        assert!(d.blocks.is_empty());
        assert_eq!(d.len, 0);
        let d = digitize(b"ABCDEFGHIJ", 3);
        assert_eq!(d.blocks.len(), 2);
        assert_eq!(undigitize(&d.blocks, d.len).unwrap(), b"ABCDEFGHIJ");
    }

    #[test]
    fn algorithm_roundtrip() {
        let key = CodingKey::standard(Recurrence::p_fibonacci(2), 15);
        let ct = encrypt(b"ALGORITHM", &key).unwrap();
        assert_eq!(
            ct.blocks[0],
            m(&[vec![60861, 41528, 28337], vec![68585, 46798, 31933], vec![68601, 46809, 31940]])
        );
        assert_eq!(decrypt(&ct, &key).unwrap(), b"ALGORITHM");
    }

    #[test]
    fn zero_plaintext() {
        let key = CodingKey::standard(Recurrence::tribonacci(), 9);
        let ct = encrypt(&[0u8; 9], &key).unwrap();
        assert!(ct.blocks[0].entries().iter().all(Zero::is_zero));
    }

    #[test]
    fn corruption_is_reported() {
        let key = CodingKey::standard(Recurrence::p_fibonacci(2), 15);
        let mut ct = encrypt(b"ALGORITHM", &key).unwrap();
        ct.blocks[0].set(0, 2, BigInt::from(28373));
        assert!(matches!(
            decrypt(&ct, &key),
            Err(Error::NonIntegral { .. }) | Err(Error::OutOfAlphabet { .. })
        ));
    }

    #[test]
    fn padding_must_be_zero() {
        let d = digitize(b"AB", 2);
        let mut blocks = d.blocks.clone();
        blocks[0].set(1, 1, BigInt::from(7));
        assert_eq!(undigitize(&blocks, 2), Err(Error::NonZeroPadding { block: 0, row: 1, col: 1 }));
        assert!(matches!(undigitize(&d.blocks, 9), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn fingerprint_mismatch_detected() {
        let key = CodingKey::standard(Recurrence::p_fibonacci(2), 15);
        let ct = encrypt(b"ALGORITHM", &key).unwrap();
        assert!(matches!(decrypt(&ct, &key.with_index(16)), Err(Error::FingerprintMismatch { .. })));
    }
}
