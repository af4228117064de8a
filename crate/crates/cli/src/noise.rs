use anyhow::Result;
use num_bigint::BigInt;
use recmat::channel::{self, ErrorKind, ErrorModel, GroundTruth};
use recmat::cipher::Ciphertext;
use recmat::files;
use serde_json::json;

use crate::{load_cipher, parse_position, usage, write_output, CorruptArgs, EXIT_OK};

/// Parses "block:row:col=value" with a 1-based position.
fn parse_edit(s: &str) -> Result<(usize, usize, usize, BigInt)> {
    let (pos, value) = s.split_once('=').ok_or_else(|| usage(format!("bad edit {s:?}; expected block:row:col=value")))?;
    let (b, r, c) = parse_position(pos)?;
    let v = value.trim().parse::<BigInt>().map_err(|_| usage(format!("bad value in {s:?}")))?;
    Ok((b, r, c, v))
}

/// Ground truth as JSON with 1-based positions.
pub(crate) fn truth_json(t: &GroundTruth) -> serde_json::Value {
    json!({
        "model": t.model,
        "corruptions": t.corruptions.iter().map(|c| json!({
            "block": c.block + 1,
            "row": c.row + 1,
            "col": c.col + 1,
            "original": c.original.to_string(),
            "value": c.value.to_string(),
        })).collect::<Vec<_>>(),
    })
}

/// Reads a sidecar written by [`truth_json`].
pub(crate) fn parse_truth(text: &str) -> Result<GroundTruth> {
    let mut v: serde_json::Value = serde_json::from_str(text).map_err(|e| usage(format!("bad truth file: {e}")))?;
    if let Some(list) = v.get_mut("corruptions").and_then(|c| c.as_array_mut()) {
        for c in list {
            for field in ["block", "row", "col"] {
                let x = c[field].as_u64().filter(|&x| x >= 1).ok_or_else(|| usage("truth positions are 1-based"))?;
                c[field] = json!(x - 1);
            }
        }
    }
    serde_json::from_value(v).map_err(|e| usage(format!("bad truth file: {e}")))
}

pub fn corrupt(a: &CorruptArgs) -> Result<i32> {
    let ct = load_cipher(&a.cipher)?;
    let (blocks, truth) = if a.at.is_empty() {
        let kind: ErrorKind = a.model.parse()?;
        let model = ErrorModel { kind, count: a.count, magnitude: a.magnitude, seed: a.seed };
        channel::corrupt(&ct.blocks, &model)?
    } else {
        let edits = a.at.iter().map(|s| parse_edit(s)).collect::<Result<Vec<_>>>()?;
        channel::apply(&ct.blocks, &edits)?
    };
    let out = Ciphertext { blocks, ..ct };
    write_output(a.out.as_deref(), files::write_cipher(&out).as_bytes())?;
    if let Some(p) = &a.truth {
        write_output(Some(p), serde_json::to_string_pretty(&truth_json(&truth))?.as_bytes())?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use recmat::channel::Corruption;

    #[test]
    fn truth_roundtrip_is_one_based() {
        let t = GroundTruth {
            model: None,
            corruptions: vec![Corruption {
                block: 0,
                row: 0,
                col: 2,
                original: BigInt::from(28337),
                value: BigInt::from(28373),
            }],
        };
        let j = truth_json(&t);
        assert_eq!(j["corruptions"][0]["col"], 3);
        assert_eq!(parse_truth(&j.to_string()).unwrap(), t);
    }

    #[test]
    fn edit_syntax() {
        let (b, r, c, v) = parse_edit("1:1:3=28373").unwrap();
        assert_eq!((b, r, c), (0, 0, 2));
        assert_eq!(v, BigInt::from(28373));
        assert!(parse_edit("0:1:1=5").is_err());
        assert!(parse_edit("1:1:1").is_err());
    }
}
