//! Matrix encryption over order-k linear recurrent sequences.
//!
//! Plaintext bytes are arranged into `k x k` blocks `P` and encrypted as
//! `C = P M_n`, where the rows of the coding matrix `M_n` are windows of
//! integer sequences that all satisfy one linear recurrence. Because the
//! ratios of same-row entries of `C` are squeezed between extremal column
//! ratios of `M_n`, corrupted ciphertext entries can be located and repaired
//! without extra check data. The crate also certifies which recurrences make
//! good keys (simple positive dominant root, positive eigenvector, all other
//! roots inside the unit disk) and generates such keys.
//!
//! Module map:
//!
//! - [`recurrence`]: forward and exact backward sequence generation.
//! - [`exactmat`]: integer/rational matrices and integer polynomials.
//! - [`spectral`]: root finding, transition ratio, Perron-Frobenius and Pisot verdicts.
//! - [`coding`]: keys, coding matrices and their exact inverses.
//! - [`cipher`]: byte digitisation, block encryption and decryption.
//! - [`guard`]: checking relations, error detection and spiral-search correction.
//! - [`keygen`]: randomized and structured key generation.
//! - [`files`]: key and ciphertext file formats.
//! - [`channel`]: error-injection models for simulated transmission.

pub mod channel;
pub mod cipher;
pub mod coding;
pub mod error;
pub mod exactmat;
pub mod files;
pub mod guard;
pub mod keygen;
pub mod recurrence;
pub mod spectral;

pub use error::{Error, Result};
