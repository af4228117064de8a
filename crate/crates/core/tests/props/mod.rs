//! Randomized invariants, shared by the property tests and the acceptance
//! report. Every runner uses a fixed seed and at least `CASES` trials.

#![allow(dead_code)]

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use recmat::cipher::{decrypt, encrypt, encrypt_blocks, digitize};
use recmat::coding::{coding_matrix, is_cyclic, left_companion, right_companion, CodingKey, MatrixBuilder};
use recmat::exactmat::{IntMatrix, RatMatrix};
use recmat::guard::{column_ratio_bounds, Extended, Guard, Spiral};
use recmat::recurrence::{Recurrence, SeedWindow};
use recmat::spectral::Precision;

pub const CASES: u32 = 500;

pub fn config(seed: u64) -> Config {
    Config { cases: CASES, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

fn int_matrix(k: usize, lo: i64, hi: i64) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(lo..=hi, k * k).prop_map(move |v| {
        IntMatrix::new(k, v.into_iter().map(BigInt::from).collect()).expect("square")
    })
}

fn recurrence(k: usize, lo: i64, hi: i64) -> impl Strategy<Value = Recurrence> {
    prop::collection::vec(lo..=hi, k)
        .prop_filter("a_0 must be nonzero", |c| c[0] != 0)
        .prop_map(|c| Recurrence::from_i64(&c).expect("order >= 2"))
}

fn bigints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Invertible keys of all three kinds, orders 2 to 4, small entries.
pub fn any_key() -> BoxedStrategy<CodingKey> {
    let symmetric = (2usize..=4)
        .prop_flat_map(|k| (recurrence(k, -2, 3), prop::collection::vec(-2i64..=3, k), 0u64..=40))
        .prop_filter_map("x_0 must be cyclic", |(rec, x0, n)| {
            is_cyclic(&left_companion(&rec), &bigints(&x0))
                .then(|| CodingKey::symmetric(rec, SeedWindow::from_i64(&x0), n).ok())
                .flatten()
        });
    let general = (2usize..=3)
        .prop_flat_map(|k| (int_matrix(k, -1, 2), prop::collection::vec(-1i64..=2, k), 0u64..=30))
        .prop_filter_map("L invertible with cyclic x_0", |(l, x0, n)| {
            let x0 = bigints(&x0);
            (l.det() != BigInt::from(0) && is_cyclic(&l, &x0)).then(|| CodingKey::general(l, x0, n).ok()).flatten()
        });
    let right = (2usize..=4)
        .prop_flat_map(|k| (recurrence(k, -2, 3), int_matrix(k, -1, 3), 0u64..=30))
        .prop_filter_map("M_0 invertible", |(rec, m0, n)| {
            (m0.det() != BigInt::from(0)).then(|| CodingKey::right_form(rec, m0, n).ok()).flatten()
        });
    prop_oneof![symmetric, general, right].boxed()
}

/// Keys whose coding matrix at their own index is strictly positive, so the
/// checking relations apply.
pub fn positive_key() -> BoxedStrategy<CodingKey> {
    let symmetric = (2usize..=4)
        .prop_flat_map(|k| (prop::collection::vec(0i64..=2, k), 10u64..=40))
        .prop_map(|(mut c, n)| {
            let k = c.len();
            c[0] = c[0].max(1);
            c[k - 1] = c[k - 1].max(1);
            CodingKey::standard(Recurrence::from_i64(&c).expect("order >= 2"), n)
        });
    let general = (2usize..=3)
        .prop_flat_map(|k| (int_matrix(k, 0, 2), prop::collection::vec(0i64..=2, k), 10u64..=30))
        .prop_filter_map("invertible, cyclic", |(l, x0, n)| {
            let x0 = bigints(&x0);
            (l.det() != BigInt::from(0) && is_cyclic(&l, &x0)).then(|| CodingKey::general(l, x0, n).ok()).flatten()
        });
    prop_oneof![symmetric, general]
        .prop_filter("M_n must be strictly positive", |key| {
            MatrixBuilder::new(key).map(|b| b.matrix(key.index()).is_positive()).unwrap_or(false)
        })
        .boxed()
}

fn message() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(any::<u8>(), 1..=40)
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn run<S: Strategy>(
    seed: u64,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    let mut runner = TestRunner::new(config(seed));
    runner.run(&strategy, test).map(|_| CASES).map_err(|e| e.to_string())
}

/// Decryption inverts encryption.
pub fn roundtrip() -> Result<u32, String> {
    run(0x5eed_0001, (any_key(), message()), |(key, msg)| {
        let ct = encrypt(&msg, &key).map_err(|e| fail(e.to_string()))?;
        let back = decrypt(&ct, &key).map_err(|e| fail(e.to_string()))?;
        prop_assert_eq!(back, msg);
        Ok(())
    })
}

/// Every column ratio of a genuine ciphertext lies within the bounds given
/// by the same column pair of `M_n`.
pub fn relations_hold() -> Result<u32, String> {
    run(0x5eed_0002, (positive_key(), message()), |(key, msg)| {
        let m = MatrixBuilder::new(&key).unwrap().matrix(key.index());
        let k = m.dim();
        let blocks = encrypt_blocks(&digitize(&msg, k).blocks, &m).unwrap();
        for c in &blocks {
            for j in 0..k {
                for jp in 0..k {
                    let b = column_ratio_bounds(&m, j, jp).unwrap();
                    for row in 0..k {
                        if let Some(r) = Extended::ratio(c.get(row, j), c.get(row, jp)) {
                            prop_assert!(b.contains(&r), "row {row} cols {j},{jp}");
                        }
                    }
                }
            }
        }
        Ok(())
    })
}

/// `L M_n = M_{n+1} = M_n R`, with `R = M_0^{-1} L M_0`.
pub fn transition_identities() -> Result<u32, String> {
    run(0x5eed_0003, any_key(), |key| {
        let b = MatrixBuilder::new(&key).unwrap();
        let n = key.index();
        let (mn, next) = (b.matrix(n), b.matrix(n + 1).to_rat());
        let l = key.left_matrix().unwrap();
        let m0 = key.initial_matrix().unwrap();
        let r: RatMatrix = m0.inverse().unwrap().mul(&l).unwrap().mul_int(&m0).unwrap();
        prop_assert_eq!(l.mul_int(&mn).unwrap(), next.clone());
        prop_assert_eq!(mn.mul_rat(&r).unwrap(), next);
        match &key {
            CodingKey::Symmetric { rec, .. } => prop_assert_eq!(r, left_companion(rec).transpose().to_rat()),
            CodingKey::RightForm { rec, .. } => prop_assert_eq!(r, right_companion(rec).to_rat()),
            CodingKey::General { .. } => {}
        }
        Ok(())
    })
}

/// Initial matrix `(L^{k-1} x_0, ..., L x_0, x_0)` built column by column.
fn oracle_m0(l: &IntMatrix, x0: &[BigInt]) -> IntMatrix {
    let k = l.dim();
    let mut cols = vec![x0.to_vec()];
    for _ in 1..k {
        let next = l.mul_vec(cols.last().unwrap()).unwrap();
        cols.push(next);
    }
    cols.reverse();
    IntMatrix::from_rows((0..k).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()).unwrap()
}

/// The recurrence-stepping builder agrees with repeated multiplication.
pub fn power_oracle() -> Result<u32, String> {
    run(0x5eed_0004, (any_key(), 0u64..=50), |(key, n)| {
        let got = coding_matrix(&key, n).unwrap().m;
        let want = match &key {
            CodingKey::Symmetric { rec, x0, .. } => {
                let l = left_companion(rec);
                (0..n).fold(oracle_m0(&l, x0.values()), |m, _| l.mul(&m).unwrap())
            }
            CodingKey::General { left, x0, .. } => (0..n).fold(oracle_m0(left, x0), |m, _| left.mul(&m).unwrap()),
            CodingKey::RightForm { rec, m0, .. } => {
                let r = right_companion(rec);
                (0..n).fold(m0.clone(), |m, _| m.mul(&r).unwrap())
            }
        };
        prop_assert_eq!(got, want);
        Ok(())
    })
}

/// A single corrupted entry: the range computed from an intact reference in
/// the same row contains the original value.
pub fn range_contains_truth() -> Result<u32, String> {
    let case = (positive_key(), any::<u64>(), 1i64..=1_000_000, any::<bool>());
    run(0x5eed_0005, case, |(key, pick, delta, up)| {
        let k = key.order();
        let guard = Guard::new(&key, &Precision::default()).unwrap();
        let plain: Vec<u8> = (0..k * k).map(|i| (pick.rotate_left(7 * i as u32) % 256) as u8).collect();
        let c = encrypt_blocks(&digitize(&plain, k).blocks, guard.matrix()).unwrap().remove(0);
        let row = (pick % k as u64) as usize;
        let target = ((pick >> 8) % k as u64) as usize;
        let reference = (target + 1 + ((pick >> 16) % (k as u64 - 1)) as usize) % k;
        let truth = c.get(row, target).clone();
        let mut bad = c.clone();
        bad.set(row, target, &truth + if up { delta } else { -delta });
        let r = guard.range(&bad, row, target, reference).map_err(|e| fail(e.to_string()))?;
        prop_assert!(r.contains(&truth), "{} not in {}..{}", truth, r.lo, r.hi);
        Ok(())
    })
}

/// The spiral visits each integer of the range exactly once, starting at the
/// clamped center.
pub fn spiral_exhaustive() -> Result<u32, String> {
    run(0x5eed_0006, (-50i64..=50, 0i64..=60, -80i64..=80, any::<bool>()), |(lo, width, center, above)| {
        let (lo, hi, center) = (BigInt::from(lo), BigInt::from(lo + width), BigInt::from(center));
        let seen: Vec<BigInt> = Spiral::new(&center, above, &lo, &hi).collect();
        let clamped = center.clone().max(lo.clone()).min(hi.clone());
        prop_assert_eq!(seen.first(), Some(&clamped));
        let mut sorted = seen.clone();
        sorted.sort();
        let want: Vec<BigInt> = (0..=width).map(|i| &lo + i).collect();
        prop_assert_eq!(sorted, want);
        for w in seen.windows(2) {
            let (a, b) = ((&w[0] - &clamped).magnitude().clone(), (&w[1] - &clamped).magnitude().clone());
            prop_assert!(a <= b, "distance must not decrease");
        }
        Ok(())
    })
}

/// Detection flags nothing on a genuine ciphertext once `n >= 10`.
pub fn clean_not_flagged() -> Result<u32, String> {
    run(0x5eed_0007, (positive_key(), message()), |(key, msg)| {
        let guard = Guard::new(&key, &Precision::default()).unwrap();
        let ct = encrypt(&msg, &key).unwrap();
        let d = guard.detect_blocks(&ct.blocks, None).map_err(|e| fail(e.to_string()))?;
        prop_assert!(d.iter().flatten().all(|r| r.is_clean()));
        Ok(())
    })
}

/// Every suite with its name.
pub fn all() -> Vec<(&'static str, fn() -> Result<u32, String>)> {
    vec![
        ("encrypt/decrypt identity", roundtrip as fn() -> Result<u32, String>),
        ("checking relations on genuine ciphertext", relations_hold),
        ("L M_n = M_{n+1} = M_n R", transition_identities),
        ("coding matrix vs L^n M_0 oracle, n <= 50", power_oracle),
        ("range contains the true value", range_contains_truth),
        ("spiral covers the range once", spiral_exhaustive),
        ("no flags on clean ciphertext", clean_not_flagged),
    ]
}
