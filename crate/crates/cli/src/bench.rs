use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use recmat::channel::{self, ErrorKind, ErrorModel};
use recmat::cipher::{digitize, encrypt_blocks};
use recmat::coding::CodingKey;
use recmat::guard::{rational_to_f64, CorrectConfig, Guard, Validator};
use recmat::keygen::split_seed;
use recmat::spectral::Precision;
use serde::Serialize;

use crate::{load_key, usage, write_output, BenchArgs, EXIT_OK};

pub const CSV_HEADER: &str = "key,n,model,trials,success_rate,mean_candidates,mean_range_length,wall_ms";

/// Error model without its seed, written `kind:count:magnitude`, optionally
/// followed by `@cols` to restrict positions to the listed 1-based columns
/// (`replace_uniform:1:100@3`, `additive_noise:2:9@1+3`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchModel {
    pub kind: ErrorKind,
    pub count: usize,
    pub magnitude: u64,
    /// 0-based columns; every column when `None`.
    pub columns: Option<Vec<usize>>,
}

impl fmt::Display for BenchModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.kind, self.count, self.magnitude)?;
        if let Some(cols) = &self.columns {
            let list: Vec<String> = cols.iter().map(|c| (c + 1).to_string()).collect();
            write!(f, "@{}", list.join("+"))?;
        }
        Ok(())
    }
}

impl FromStr for BenchModel {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || usage(format!("bad model {s:?}; expected kind:count:magnitude[@cols]"));
        let (body, cols) = match s.split_once('@') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let [kind, count, magnitude] = parts.as_slice() else { return Err(bad()) };
        let columns = cols
            .map(|c| {
                c.split('+')
                    .map(|x| x.trim().parse::<usize>().ok().filter(|&x| x >= 1).map(|x| x - 1).ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(Self {
            kind: kind.parse()?,
            count: count.parse().map_err(|_| bad())?,
            magnitude: magnitude.parse().map_err(|_| bad())?,
            columns,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// Indices to test; each key's own index when `None`.
    pub ns: Option<Vec<u64>>,
    pub models: Vec<BenchModel>,
    pub trials: u64,
    pub seed: u64,
    /// Fixed plaintext; one block of random capitals per trial otherwise.
    pub text: Option<Vec<u8>>,
    pub validator: Validator,
    pub budget: u64,
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub key: String,
    pub n: u64,
    pub model: String,
    pub trials: u64,
    pub success_rate: f64,
    pub mean_candidates: f64,
    /// Mean of `upper - lower` over flagged entries; empty when none were
    /// flagged.
    pub mean_range_length: Option<f64>,
    pub wall_ms: u64,
}

struct Trial {
    success: bool,
    tested: u64,
    lengths: Vec<f64>,
}

fn plaintext(cfg: &BenchConfig, k: usize, seed: u64) -> Vec<u8> {
    match &cfg.text {
        Some(t) => t.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..k * k).map(|_| rng.gen_range(b'A'..=b'Z')).collect()
        }
    }
}

fn trial(guard: &Guard, k: usize, model: &BenchModel, cfg: &BenchConfig, t: u64) -> Result<Trial> {
    let seed = split_seed(cfg.seed, t);
    let d = digitize(&plaintext(cfg, k, split_seed(seed, 0)), k);
    let sent = encrypt_blocks(&d.blocks, guard.matrix())?;
    let em = ErrorModel { kind: model.kind, count: model.count, magnitude: model.magnitude, seed: split_seed(seed, 1) };
    let (received, _) = channel::corrupt_columns(&sent, &em, model.columns.as_deref())?;
    let diag = guard.detect_blocks(&received, None)?;
    let corr = CorrectConfig { validator: cfg.validator, budget: cfg.budget, exhaustive: true };
    let result = guard.correct(&received, d.len, &diag, &corr)?;
    let lengths = result.rows.iter().flat_map(|r| &r.ranges).map(|r| rational_to_f64(&r.length())).collect();
    Ok(Trial { success: result.is_success() && result.blocks == sent, tested: result.tested, lengths })
}

/// One CSV row per (key, n, model). Trials run in parallel, each from its
/// own sub-seed, so results do not depend on scheduling. The same trial
/// seeds are reused across keys, indices and models.
pub fn run_bench(keys: &[(String, CodingKey)], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let prec = Precision::from_env();
    let mut rows = Vec::new();
    if cfg.trials == 0 {
        return Ok(rows);
    }
    for (name, key) in keys {
        let ns = cfg.ns.clone().unwrap_or_else(|| vec![key.index()]);
        for &n in &ns {
            let guard = Guard::at(key, n, &prec)?;
            for model in &cfg.models {
                let start = Instant::now();
                let trials = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| trial(&guard, key.order(), model, cfg, t))
                    .collect::<Result<Vec<_>>>()?;
                let wall_ms = if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 };
                let count = trials.len().max(1) as f64;
                let lengths: Vec<f64> = trials.iter().flat_map(|t| t.lengths.iter().copied()).collect();
                rows.push(BenchRow {
                    key: name.clone(),
                    n,
                    model: model.to_string(),
                    trials: cfg.trials,
                    success_rate: trials.iter().filter(|t| t.success).count() as f64 / count,
                    mean_candidates: trials.iter().map(|t| t.tested as f64).sum::<f64>() / count,
                    mean_range_length: (!lengths.is_empty())
                        .then(|| lengths.iter().sum::<f64>() / lengths.len() as f64),
                    wall_ms,
                });
            }
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?)
}

pub fn bench(a: &BenchArgs) -> Result<i32> {
    let keys = a
        .keys
        .iter()
        .map(|p| {
            let name = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((name, load_key(p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let ns = a
        .n
        .as_deref()
        .map(|s| {
            s.split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| usage(format!("bad index list {s:?}"))))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let cfg = BenchConfig {
        ns,
        models: a.models.iter().map(|m| m.parse()).collect::<Result<_>>()?,
        trials: a.trials,
        seed: a.seed,
        text: a.text.as_ref().map(|t| t.as_bytes().to_vec()),
        validator: a.validator.into(),
        budget: a.budget,
        timing: !a.no_timing,
    };
    let rows = run_bench(&keys, &cfg)?;
    write_output(a.out.as_deref(), to_csv(&rows)?.as_bytes())?;
    Ok(EXIT_OK)
}
