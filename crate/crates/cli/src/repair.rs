use std::collections::BTreeMap;

use anyhow::Result;
use recmat::channel;
use recmat::cipher::{self, Ciphertext};
use recmat::files;
use recmat::guard::{CorrectConfig, CorrectionResult, Guard, RowCorrection, RowDiagnosis};
use recmat::spectral::Precision;
use serde_json::{json, Value};

use crate::noise::parse_truth;
use crate::{
    check_pair, load_cipher, load_key, parse_position, read_text, usage, write_output, CorrectArgs, DetectArgs,
    EXIT_BUDGET, EXIT_CORRUPT, EXIT_OK,
};

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

fn diagnosis_json(block: usize, d: &RowDiagnosis) -> Value {
    json!({
        "block": block + 1,
        "row": d.row + 1,
        "trusted": one_based(&d.trusted),
        "flagged": one_based(&d.flagged),
        "evidence": d.evidence.iter().map(|e| json!({
            "cols": [e.cols.0 + 1, e.cols.1 + 1],
            "ratio": if e.ratio.is_finite() { json!(e.ratio) } else { json!(null) },
            "expected": e.expected,
            "deviation": e.deviation,
            "within_bounds": e.within_bounds,
            "consistent": e.consistent,
        })).collect::<Vec<_>>(),
    })
}

pub fn detect(a: &DetectArgs) -> Result<i32> {
    let key = load_key(&a.key)?;
    let ct = load_cipher(&a.cipher)?;
    check_pair(&key, &ct)?;
    let guard = Guard::new(&key, &Precision::from_env())?;
    let diagnoses = guard.detect_blocks(&ct.blocks, a.tol)?;
    let flagged: Vec<Value> = diagnoses
        .iter()
        .enumerate()
        .flat_map(|(b, rows)| rows.iter().filter(|d| !d.is_clean()).map(move |d| diagnosis_json(b, d)))
        .collect();
    let entries: usize = diagnoses.iter().flatten().map(|d| d.flagged.len()).sum();
    let report = json!({
        "index": guard.index(),
        "relations_apply": guard.relations_apply(),
        "blocks": ct.blocks.len(),
        "flagged_entries": entries,
        "rows": flagged,
    });
    write_output(a.out.as_deref(), format!("{}\n", serde_json::to_string_pretty(&report)?).as_bytes())?;
    Ok(if entries == 0 { EXIT_OK } else { EXIT_CORRUPT })
}

fn row_json(r: &RowCorrection) -> Value {
    json!({
        "block": r.block + 1,
        "row": r.row + 1,
        "trusted": one_based(&r.trusted),
        "flagged": one_based(&r.flagged),
        "outcome": r.outcome,
        "ranges": r.ranges.iter().map(|x| x.summary()).collect::<Vec<_>>(),
        "tested": r.tested,
        "complete": r.complete,
        "first_accepted_at": r.first_accepted_at,
        "accepted_count": r.accepted.len(),
        "accepted": r.accepted.iter().take(recmat::guard::TRACE_LIMIT)
            .map(|v| v.iter().map(ToString::to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "trace": r.trace.iter().map(|t| json!({
            "values": t.values.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "status": t.status,
        })).collect::<Vec<_>>(),
    })
}

/// Diagnoses for every block: rows named by `--trusted` use the given
/// trusted columns, all other rows go through detection.
fn diagnoses(guard: &Guard, ct: &Ciphertext, a: &CorrectArgs) -> Result<Vec<Vec<RowDiagnosis>>> {
    let mut given: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for s in &a.trusted {
        let (b, r, c) = parse_position(s)?;
        if b >= ct.blocks.len() || r >= ct.k || c >= ct.k {
            return Err(usage(format!("trusted position {s:?} is outside the ciphertext")));
        }
        given.entry((b, r)).or_default().push(c);
    }
    let mut out = guard.detect_blocks(&ct.blocks, a.tol)?;
    for ((b, r), cols) in given {
        out[b][r] = RowDiagnosis::with_trusted(r, ct.k, &cols);
    }
    Ok(out)
}

fn audit(received: &[recmat::exactmat::IntMatrix], result: &CorrectionResult, truth_path: &std::path::Path) -> Result<Value> {
    let truth = parse_truth(&read_text(truth_path)?)?;
    let sent = channel::restore(received, &truth);
    let entries: Vec<Value> = truth
        .corruptions
        .iter()
        .map(|c| {
            let got = result.blocks.get(c.block).map(|m| m.get(c.row, c.col).clone());
            json!({
                "block": c.block + 1,
                "row": c.row + 1,
                "col": c.col + 1,
                "original": c.original.to_string(),
                "received": c.value.to_string(),
                "corrected": got.as_ref().map(ToString::to_string),
                "recovered": got.as_ref() == Some(&c.original),
            })
        })
        .collect();
    Ok(json!({ "recovered": sent == result.blocks, "entries": entries }))
}

pub fn correct(a: &CorrectArgs) -> Result<i32> {
    let key = load_key(&a.key)?;
    let ct = load_cipher(&a.cipher)?;
    check_pair(&key, &ct)?;
    let guard = Guard::new(&key, &Precision::from_env())?;
    let diag = diagnoses(&guard, &ct, a)?;
    let cfg = CorrectConfig { validator: a.validator.into(), budget: a.budget, exhaustive: !a.first };
    let result = guard.correct(&ct.blocks, ct.len, &diag, &cfg)?;
    let fixed = Ciphertext { blocks: result.blocks.clone(), ..ct.clone() };
    let decrypts = cipher::decrypt(&fixed, &key).is_ok();
    let status = if result.budget_exhausted() {
        "budget_exhausted"
    } else if result.is_success() {
        "success"
    } else {
        "unresolved"
    };
    let mut report = json!({
        "status": status,
        "validator": cfg.validator.as_str(),
        "budget": cfg.budget,
        "exhaustive": cfg.exhaustive,
        "tested": result.tested,
        "decrypts": decrypts,
        "rows": result.rows.iter().map(row_json).collect::<Vec<_>>(),
    });
    if let Some(p) = &a.truth {
        report["audit"] = audit(&ct.blocks, &result, p)?;
    }
    if let Some(p) = &a.out {
        write_output(Some(p), files::write_cipher(&fixed).as_bytes())?;
    }
    write_output(a.report.as_deref(), format!("{}\n", serde_json::to_string_pretty(&report)?).as_bytes())?;
    Ok(if result.budget_exhausted() {
        EXIT_BUDGET
    } else if result.is_success() {
        EXIT_OK
    } else {
        EXIT_CORRUPT
    })
}
