//! The `rmc` command line: key generation, analysis, encryption, simulated
//! corruption, detection, correction and benchmarking.
//!
//! Positions on the command line and in JSON reports are 1-based.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use recmat::cipher::Ciphertext;
use recmat::coding::CodingKey;
use recmat::files;

mod bench;
mod codec;
mod keys;
mod noise;
mod repair;

pub use bench::{run_bench, to_csv, BenchConfig, BenchModel, BenchRow, CSV_HEADER};

/// Exit status: success.
pub const EXIT_OK: i32 = 0;
/// Exit status: unexpected failure.
pub const EXIT_OTHER: i32 = 1;
/// Exit status: a key, file or argument failed validation.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status: corruption was detected and not corrected.
pub const EXIT_CORRUPT: i32 = 3;
/// Exit status: the candidate budget ran out.
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rmc", version, about = "Recurrence-matrix cipher with checking-relation error correction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key file.
    Keygen(KeygenArgs),
    /// Spectral report and validation for a key.
    Analyze(AnalyzeArgs),
    /// Encrypt bytes into a ciphertext file.
    Encrypt(EncryptArgs),
    /// Decrypt a ciphertext file.
    Decrypt(DecryptArgs),
    /// Inject errors into a ciphertext file.
    Corrupt(CorruptArgs),
    /// Locate corrupted entries.
    Detect(DetectArgs),
    /// Repair corrupted entries by spiral search.
    Correct(CorrectArgs),
    /// Monte-Carlo correction benchmark.
    ///
    /// CSV columns: key, n, model, trials, success_rate, mean_candidates,
    /// mean_range_length, wall_ms. A trial succeeds when the corrected
    /// ciphertext equals the one sent. mean_candidates is the mean number of
    /// combinations tested per trial; mean_range_length is the mean width of
    /// the checking range over flagged entries.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Fixed recurrence given by --coefficients, standard initial vector.
    Standard,
    Sieve,
    Abt,
    Primitive,
    RightForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// z^m Psi_r(z) +- (z^{r+1} - 1)
    Power,
    /// z^m Psi_r(z) +- (z^r - 1)/(z - 1)
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ValidatorArg {
    Bytes,
    Printable,
    Letters,
}

impl From<ValidatorArg> for recmat::guard::Validator {
    fn from(v: ValidatorArg) -> Self {
        match v {
            ValidatorArg::Bytes => Self::Bytes,
            ValidatorArg::Printable => Self::Printable,
            ValidatorArg::Letters => Self::Letters,
        }
    }
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long, value_enum, default_value = "sieve")]
    pub method: Method,
    /// Recurrence order.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Coefficient or entry range "lo,hi".
    #[arg(long, default_value = "0,3", allow_hyphen_values = true)]
    pub range: String,
    #[arg(long, default_value_t = 3.0)]
    pub tau_max: f64,
    /// Keep only Pisot candidates.
    #[arg(long)]
    pub pisot: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Candidates examined by sieve and primitive growth.
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    /// Initial index range "lo,hi", or a single index.
    #[arg(long, default_value = "10,20")]
    pub index: String,
    /// Range for initial-vector and initial-matrix entries.
    #[arg(long, default_value = "0,3", allow_hyphen_values = true)]
    pub vector_range: String,
    /// Ascending coefficients a_0,...,a_{k-1} (standard, right-form).
    #[arg(long, allow_hyphen_values = true)]
    pub coefficients: Option<String>,
    /// ABT family parameter r.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// ABT family parameter m.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, value_enum, default_value = "minus")]
    pub sign: SignArg,
    #[arg(long, value_enum, default_value = "power")]
    pub variant: VariantArg,
    /// 0-1 seed for primitive growth, rows separated by ';'.
    #[arg(long)]
    pub seed_matrix: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print generation statistics as JSON on stderr.
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub key: PathBuf,
    /// Plaintext file for the smallest-n table.
    #[arg(long)]
    pub plaintext: Option<PathBuf>,
    /// Plaintext given inline.
    #[arg(long)]
    pub text: Option<String>,
    /// Largest n searched for the smallest-n table.
    #[arg(long, default_value_t = 200)]
    pub cap: u64,
    #[arg(long)]
    pub json: bool,
    /// Significant decimals in reports.
    #[arg(long, default_value_t = 12)]
    pub digits: usize,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    pub key: PathBuf,
    /// Input file; standard input when absent.
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub text: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    pub key: PathBuf,
    pub cipher: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    pub cipher: PathBuf,
    /// replace_uniform, digit_transpose or additive_noise.
    #[arg(long, default_value = "replace_uniform")]
    pub model: String,
    /// Corrupted entries per block.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 100)]
    pub magnitude: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit edit "block:row:col=value"; replaces the random model.
    #[arg(long = "at")]
    pub at: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ground-truth sidecar (JSON).
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    pub key: PathBuf,
    pub cipher: PathBuf,
    /// Extra relative tolerance on top of the exact bounds.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    pub key: PathBuf,
    pub cipher: PathBuf,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value = "bytes")]
    pub validator: ValidatorArg,
    /// Combinations tested per row at most.
    #[arg(long, default_value_t = recmat::guard::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Stop at the first valid candidate instead of checking for ambiguity.
    #[arg(long)]
    pub first: bool,
    /// Known-good entries "block:row:col"; rows listed here skip detection.
    #[arg(long)]
    pub trusted: Vec<String>,
    /// Corrected ciphertext file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report file; standard output when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Ground-truth sidecar to audit the result against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Key files.
    #[arg(long = "key", required = true)]
    pub keys: Vec<PathBuf>,
    /// Indices to test, comma separated; defaults to each key's own.
    #[arg(long)]
    pub n: Option<String>,
    /// Error models "kind:count:magnitude[@cols]"; repeatable. "@3" or
    /// "@1+3" restricts positions to those 1-based columns.
    #[arg(long = "model", default_value = "replace_uniform:1:100")]
    pub models: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed plaintext; random capital letters of one block otherwise.
    #[arg(long)]
    pub text: Option<String>,
    #[arg(long, value_enum, default_value = "letters")]
    pub validator: ValidatorArg,
    #[arg(long, default_value_t = recmat::guard::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Write 0 for wall_ms, for byte-reproducible output.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Maps an error to an exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use recmat::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::NonIntegral { .. } | E::OutOfAlphabet { .. } | E::NonZeroPadding { .. }) => EXIT_CORRUPT,
        Some(E::NoConvergence { .. }) => EXIT_OTHER,
        Some(_) => EXIT_VALIDATION,
        None if err.downcast_ref::<clap::Error>().is_some() => EXIT_VALIDATION,
        None if err.is::<UsageError>() => EXIT_VALIDATION,
        None => EXIT_OTHER,
    }
}

/// Invalid command-line input.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

/// Runs one command and returns its exit status.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Keygen(a) => keys::keygen(&a),
        Command::Analyze(a) => keys::analyze(&a),
        Command::Encrypt(a) => codec::encrypt(&a),
        Command::Decrypt(a) => codec::decrypt(&a),
        Command::Corrupt(a) => noise::corrupt(&a),
        Command::Detect(a) => repair::detect(&a),
        Command::Correct(a) => repair::correct(&a),
        Command::Bench(a) => bench::bench(&a),
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn load_key(path: &Path) -> Result<CodingKey> {
    Ok(files::parse_key(&read_text(path)?)?)
}

pub(crate) fn load_cipher(path: &Path) -> Result<Ciphertext> {
    Ok(files::parse_cipher(&read_text(path)?)?)
}

/// Fails before any arithmetic when the ciphertext was made with another key.
pub(crate) fn check_pair(key: &CodingKey, ct: &Ciphertext) -> Result<()> {
    if ct.k != key.order() {
        return Err(recmat::Error::DimensionMismatch { expected: key.order(), found: ct.k }.into());
    }
    let fp = key.fingerprint();
    if ct.fingerprint != fp {
        return Err(recmat::Error::FingerprintMismatch { key: fp, cipher: ct.fingerprint.clone() }.into());
    }
    Ok(())
}

pub(crate) fn read_input(path: Option<&Path>, text: Option<&str>) -> Result<Vec<u8>> {
    if let Some(t) = text {
        return Ok(t.as_bytes().to_vec());
    }
    match path {
        Some(p) => fs::read(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

pub(crate) fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub(crate) fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<(T, T)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |p: &str| p.parse::<T>().map_err(|_| usage(format!("bad {what}: {s:?}")));
    match parts.as_slice() {
        [a] => {
            let v = parse(a)?;
            Ok((parse(a)?, v))
        }
        [a, b] => Ok((parse(a)?, parse(b)?)),
        _ => Err(usage(format!("{what} must be \"lo,hi\", got {s:?}"))),
    }
}

/// Parses a 1-based "block:row:col" into 0-based indices.
pub(crate) fn parse_position(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("bad position {s:?}; expected block:row:col")))?;
    match parts.as_slice() {
        [b, r, c] if *b >= 1 && *r >= 1 && *c >= 1 => Ok((b - 1, r - 1, c - 1)),
        _ => Err(usage(format!("bad position {s:?}; expected 1-based block:row:col"))),
    }
}
