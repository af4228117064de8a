use anyhow::{anyhow, Result};
use num_bigint::BigInt;
use recmat::cipher::digitize;
use recmat::coding::{left_companion, validate_key, CodingKey};
use recmat::exactmat::IntMatrix;
use recmat::files;
use recmat::guard::smallest_unambiguous_n;
use recmat::keygen::{
    abt_key, primitive_growth, right_form_keygen, sieve_companion, AbtSign, AbtVariant, GenConfig, GeneratedKey,
};
use recmat::recurrence::Recurrence;
use recmat::spectral::Precision;
use serde_json::json;

use crate::{
    parse_pair, read_input, usage, write_output, AnalyzeArgs, KeygenArgs, Method, SignArg, VariantArg, EXIT_OK,
    EXIT_VALIDATION,
};

fn parse_coefficients(s: &str) -> Result<Recurrence> {
    let coeffs = s
        .split(',')
        .map(|p| p.trim().parse::<BigInt>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| usage(format!("bad coefficient list {s:?}")))?;
    Ok(Recurrence::new(coeffs)?)
}

fn parse_matrix(s: &str) -> Result<IntMatrix> {
    let rows = s
        .split(';')
        .map(|r| r.split(',').map(|p| p.trim().parse::<BigInt>()).collect::<std::result::Result<Vec<_>, _>>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| usage(format!("bad matrix {s:?}; rows are separated by ';'")))?;
    Ok(IntMatrix::from_rows(rows)?)
}

fn config(a: &KeygenArgs) -> Result<GenConfig> {
    Ok(GenConfig {
        k: a.k,
        range: parse_pair(&a.range, "range")?,
        tau_cap: a.tau_max,
        require_pisot: a.pisot,
        seed: a.seed,
        budget: a.budget,
        index_range: parse_pair(&a.index, "index")?,
        vector_range: parse_pair(&a.vector_range, "vector range")?,
        precision: Precision::from_env(),
    })
}

fn stream_first<I: Iterator<Item = GeneratedKey>>(mut stream: I, what: &str) -> Result<GeneratedKey> {
    stream.next().ok_or_else(|| usage(format!("{what}: no key found within the candidate budget")))
}

pub fn keygen(a: &KeygenArgs) -> Result<i32> {
    let cfg = config(a)?;
    let key: CodingKey = match a.method {
        Method::Standard => {
            let list = a.coefficients.as_deref().ok_or_else(|| usage("--method standard needs --coefficients"))?;
            let key = CodingKey::standard(parse_coefficients(list)?, cfg.index_range.0);
            if !validate_key(&key, &cfg.precision).is_usable() {
                return Err(recmat::Error::InvalidKey("recurrence fails the required checks".into()).into());
            }
            key
        }
        Method::Sieve => {
            let mut stream = sieve_companion(cfg)?;
            let first = stream.next();
            if a.stats {
                eprintln!("{}", serde_json::to_string(stream.stats())?);
            }
            first.ok_or_else(|| usage("sieve: no key found within the candidate budget"))?.key
        }
        Method::Abt => {
            let sign = match a.sign {
                SignArg::Plus => AbtSign::Plus,
                SignArg::Minus => AbtSign::Minus,
            };
            let variant = match a.variant {
                VariantArg::Power => AbtVariant::PowerDifference,
                VariantArg::Geometric => AbtVariant::Geometric,
            };
            let g = abt_key(a.r, a.m, sign, variant, &cfg)?;
            if g.report.tau_f64() > 2.0 {
                eprintln!("warning: tau = {:.6} exceeds 2 for this small m", g.report.tau_f64());
            }
            g.key
        }
        Method::Primitive => {
            let seed = match &a.seed_matrix {
                Some(s) => parse_matrix(s)?,
                None => left_companion(&Recurrence::wielandt(cfg.k)),
            };
            let mut stream = primitive_growth(seed, cfg)?;
            let first = stream.next();
            if a.stats {
                eprintln!("{}", serde_json::to_string(stream.stats())?);
            }
            first.ok_or_else(|| usage("primitive: no key found within the candidate budget"))?.key
        }
        Method::RightForm => {
            let list = a.coefficients.as_deref().ok_or_else(|| usage("--method right-form needs --coefficients"))?;
            stream_first(std::iter::once(right_form_keygen(parse_coefficients(list)?, &cfg)?), "right-form")?.key
        }
    };
    write_output(a.out.as_deref(), files::write_key(&key).as_bytes())?;
    Ok(EXIT_OK)
}

/// Adjacent column pairs `(target, reference)`, 0-based, with the target to
/// the right of its reference.
fn rightward_pairs(k: usize) -> Vec<(usize, usize)> {
    (1..k).map(|j| (j, j - 1)).collect()
}

pub fn analyze(a: &AnalyzeArgs) -> Result<i32> {
    let key = files::parse_key_unchecked(&crate::read_text(&a.key)?)?;
    let prec = Precision::from_env();
    let v = validate_key(&key, &prec);
    let det = key.transition_matrix().det();
    let plain = match (&a.plaintext, &a.text) {
        (None, None) => None,
        (p, t) => Some(read_input(p.as_deref(), t.as_deref())?),
    };
    let mut table = Vec::new();
    let mut n_star: Option<u64> = None;
    let mut n_star_found = true;
    if let Some(bytes) = &plain {
        let block = digitize(bytes, key.order())
            .blocks
            .into_iter()
            .next()
            .ok_or_else(|| anyhow!("plaintext is empty"))?;
        for (j, jp) in rightward_pairs(key.order()) {
            let n = smallest_unambiguous_n(&key, &block, j, jp, a.cap)?;
            match n {
                Some(n) => n_star = Some(n_star.map_or(n, |m| m.max(n))),
                None => n_star_found = false,
            }
            table.push(json!({ "target": j + 1, "reference": jp + 1, "n": n }));
        }
    }
    let n_star = if n_star_found { n_star } else { None };
    let report = json!({
        "kind": key.kind().as_str(),
        "order": key.order(),
        "index": key.index(),
        "fingerprint": key.fingerprint(),
        "det_transition": det.to_string(),
        "validation": v.to_json(a.digits),
        "smallest_n": table,
        "n_star": n_star,
    });
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("kind         {}", key.kind().as_str());
        println!("order        {}", key.order());
        println!("index        {}", key.index());
        println!("fingerprint  {}", key.fingerprint());
        println!("det L        {det}");
        if let Some(r) = &v.report {
            println!("char poly    {}", r.char_poly);
            println!("tau          {}", r.tau.to_decimal(a.digits));
            println!("sigma        {}", r.sigma.to_decimal(a.digits));
            println!("spf          {}", r.is_spf);
            println!("pisot        {}", r.is_pisot);
            if let Some(p) = r.is_primitive {
                println!("primitive    {p}");
            }
        }
        for c in &v.checks {
            println!("check        {:<26} {:<5} {}", c.name, format!("{:?}", c.status).to_lowercase(), c.detail);
        }
        for row in &table {
            let n = row["n"].as_u64().map_or("none".to_string(), |n| n.to_string());
            println!("smallest n   column {} from {}: {n}", row["target"], row["reference"]);
        }
        if plain.is_some() {
            println!("n*           {}", n_star.map_or("none".to_string(), |n| n.to_string()));
        }
    }
    Ok(if v.is_usable() { EXIT_OK } else { EXIT_VALIDATION })
}
