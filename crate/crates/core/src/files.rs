//! Key and ciphertext file formats.
//!
//! Key files are JSON with big integers as decimal strings. Ciphertext files
//! are plain text: one header line, then `k` lines of `k` integers per block.
//!
//! ```text
//! RMCv1 k=3 blocks=1 len=9 fp=5c0f3d2a9e61b7c4
//! 60861 41528 28337
//! 68585 46798 31933
//! 68601 46809 31940
//! ```

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::cipher::Ciphertext;
use crate::coding::{validate_key, CodingKey};
use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;
use crate::recurrence::{Recurrence, SeedWindow};
use crate::spectral::Precision;

pub const KEY_FORMAT: &str = "rmc-key-v1";
pub const CIPHER_MAGIC: &str = "RMCv1";

/// Big integer stored as a decimal string; plain JSON integers are accepted on input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dec(pub BigInt);

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => BigInt::from_str(s.trim())
                .map(Dec)
                .map_err(|_| serde::de::Error::custom(format!("not a decimal integer: {s:?}"))),
            Raw::Int(v) => Ok(Dec(BigInt::from(v))),
        }
    }
}

fn dec_vec(v: &[BigInt]) -> Vec<Dec> {
    v.iter().cloned().map(Dec).collect()
}

fn dec_rows(m: &IntMatrix) -> Vec<Vec<Dec>> {
    m.rows().map(dec_vec).collect()
}

fn int_vec(v: &[Dec]) -> Vec<BigInt> {
    v.iter().map(|d| d.0.clone()).collect()
}

fn int_matrix(rows: &[Vec<Dec>]) -> Result<IntMatrix> {
    IntMatrix::from_rows(rows.iter().map(|r| int_vec(r)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyFile {
    pub format: String,
    pub kind: String,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Dec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_matrix: Option<Vec<Vec<Dec>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_vector: Option<Vec<Dec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_matrix: Option<Vec<Vec<Dec>>>,
    pub index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

impl KeyFile {
    /// File representation without a fingerprint.
    fn bare(key: &CodingKey) -> Self {
        let mut f = KeyFile {
            format: KEY_FORMAT.into(),
            kind: key.kind().as_str().into(),
            order: key.order(),
            coefficients: None,
            left_matrix: None,
            initial_vector: None,
            initial_matrix: None,
            index: key.index(),
            fingerprint: None,
        };
        match key {
            CodingKey::Symmetric { rec, x0, .. } => {
                f.coefficients = Some(dec_vec(rec.coeffs()));
                f.initial_vector = Some(dec_vec(x0.values()));
            }
            CodingKey::General { left, x0, .. } => {
                f.left_matrix = Some(dec_rows(left));
                f.initial_vector = Some(dec_vec(x0));
            }
            CodingKey::RightForm { rec, m0, .. } => {
                f.coefficients = Some(dec_vec(rec.coeffs()));
                f.initial_matrix = Some(dec_rows(m0));
            }
        }
        f
    }

    pub fn from_key(key: &CodingKey) -> Self {
        let mut f = Self::bare(key);
        f.fingerprint = Some(key_fingerprint(key));
        f
    }

    pub fn to_key(&self) -> Result<CodingKey> {
        if self.format != KEY_FORMAT {
            return Err(Error::Parse(format!("unknown key format {:?}", self.format)));
        }
        let missing = |field: &str| Error::Parse(format!("{} key needs \"{field}\"", self.kind));
        let key = match self.kind.as_str() {
            "symmetric" => {
                let rec = Recurrence::new(int_vec(self.coefficients.as_ref().ok_or_else(|| missing("coefficients"))?))?;
                let x0 = SeedWindow::new(int_vec(self.initial_vector.as_ref().ok_or_else(|| missing("initial_vector"))?));
                CodingKey::symmetric(rec, x0, self.index)?
            }
            "general" => {
                let left = int_matrix(self.left_matrix.as_ref().ok_or_else(|| missing("left_matrix"))?)?;
                let x0 = int_vec(self.initial_vector.as_ref().ok_or_else(|| missing("initial_vector"))?);
                CodingKey::general(left, x0, self.index)?
            }
            "right_form" => {
                let rec = Recurrence::new(int_vec(self.coefficients.as_ref().ok_or_else(|| missing("coefficients"))?))?;
                let m0 = int_matrix(self.initial_matrix.as_ref().ok_or_else(|| missing("initial_matrix"))?)?;
                CodingKey::right_form(rec, m0, self.index)?
            }
            other => return Err(Error::Parse(format!("unknown key kind {other:?}"))),
        };
        if key.order() != self.order {
            return Err(Error::DimensionMismatch { expected: self.order, found: key.order() });
        }
        if let Some(fp) = &self.fingerprint {
            let actual = key_fingerprint(&key);
            if *fp != actual {
                return Err(Error::InvalidKey(format!("fingerprint {fp} does not match contents ({actual})")));
            }
        }
        Ok(key)
    }
}

/// Canonical serialization: compact JSON of the key fields, fingerprint omitted.
pub fn canonical_key_string(key: &CodingKey) -> String {
    serde_json::to_string(&KeyFile::bare(key)).expect("key serializes")
}

/// First 8 bytes of SHA-256 over the canonical serialization, in hex.
pub fn key_fingerprint(key: &CodingKey) -> String {
    let digest = Sha256::digest(canonical_key_string(key).as_bytes());
    hex::encode(&digest[..8])
}

pub fn write_key(key: &CodingKey) -> String {
    let mut s = serde_json::to_string_pretty(&KeyFile::from_key(key)).expect("key serializes");
    s.push('\n');
    s
}

/// Parse a key without validating it.
pub fn parse_key_unchecked(text: &str) -> Result<CodingKey> {
    let file: KeyFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_key()
}

/// Parse a key and reject it unless every required validation check passes.
pub fn parse_key(text: &str) -> Result<CodingKey> {
    let key = parse_key_unchecked(text)?;
    let v = validate_key(&key, &Precision::from_env());
    if !v.is_usable() {
        let failed: Vec<String> = v
            .checks
            .iter()
            .filter(|c| c.status == crate::coding::CheckStatus::Fail)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        return Err(Error::InvalidKey(failed.join("; ")));
    }
    Ok(key)
}

pub fn write_cipher(ct: &Ciphertext) -> String {
    let mut out = format!("{CIPHER_MAGIC} k={} blocks={} len={} fp={}\n", ct.k, ct.blocks.len(), ct.len, ct.fingerprint);
    for block in &ct.blocks {
        for row in block.rows() {
            let line: Vec<String> = row.iter().map(ToString::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherHeader {
    pub k: usize,
    pub blocks: usize,
    pub len: usize,
    pub fingerprint: String,
}

pub fn parse_cipher_header(line: &str) -> Result<CipherHeader> {
    let mut parts = line.split(' ');
    if parts.next() != Some(CIPHER_MAGIC) {
        return Err(Error::Parse(format!("ciphertext header must start with {CIPHER_MAGIC}")));
    }
    let mut field = |name: &str| -> Result<String> {
        let p = parts.next().ok_or_else(|| Error::Parse(format!("header is missing {name}=")))?;
        p.strip_prefix(name)
            .and_then(|r| r.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| Error::Parse(format!("expected {name}=..., found {p:?}")))
    };
    let num = |s: String, name: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad {name}: {s:?}")));
    let k = num(field("k")?, "k")?;
    let blocks = num(field("blocks")?, "blocks")?;
    let len = num(field("len")?, "len")?;
    let fingerprint = field("fp")?;
    if k < 2 {
        return Err(Error::OrderTooSmall(k));
    }
    Ok(CipherHeader { k, blocks, len, fingerprint })
}

pub fn parse_cipher(text: &str) -> Result<Ciphertext> {
    let mut lines = text.lines();
    let header = parse_cipher_header(lines.next().ok_or_else(|| Error::Parse("empty ciphertext file".into()))?)?;
    let k = header.k;
    let capacity = header.blocks * k * k;
    if capacity < header.len || (header.blocks > 0 && capacity >= header.len + k * k) {
        return Err(Error::LengthMismatch { declared: header.len, capacity });
    }
    let mut blocks = Vec::with_capacity(header.blocks);
    for b in 0..header.blocks {
        let mut rows = Vec::with_capacity(k);
        for r in 0..k {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("block {} is missing row {}", b + 1, r + 1)))?;
            let row = line
                .split(' ')
                .map(|t| BigInt::from_str(t).map_err(|_| Error::Parse(format!("bad integer {t:?} in block {}", b + 1))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != k {
                return Err(Error::DimensionMismatch { expected: k, found: row.len() });
            }
            rows.push(row);
        }
        blocks.push(IntMatrix::from_rows(rows)?);
    }
    if lines.any(|l| !l.is_empty()) {
        return Err(Error::Parse("trailing data after the last block".into()));
    }
    Ok(Ciphertext { k, blocks, len: header.len, fingerprint: header.fingerprint })
}
