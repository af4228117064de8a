use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmc")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// 2-Fibonacci key at n = 15 and the encrypted word ALGORITHM.
fn setup(dir: &TempDir) -> (PathBuf, PathBuf) {
    let key = p(dir, "key.json");
    let ct = p(dir, "c.rmc");
    let o = rmc(&["keygen", "--method", "standard", "--coefficients", "1,0,1", "--index", "15", "--out", s(&key)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = rmc(&["encrypt", s(&key), "--text", "ALGORITHM", "--out", s(&ct)]);
    assert_eq!(code(&o), 0);
    (key, ct)
}

#[test]
fn encrypt_decrypt_roundtrip() {
    let dir = TempDir::new().unwrap();
    let (key, ct) = setup(&dir);
    let text = fs::read_to_string(&ct).unwrap();
    assert!(text.starts_with("RMCv1 k=3 blocks=1 len=9"));
    assert!(text.contains("60861 41528 28337"));
    let o = rmc(&["decrypt", s(&key), s(&ct)]);
    assert_eq!(code(&o), 0);
    assert_eq!(o.stdout, b"ALGORITHM");
}

#[test]
fn encrypt_reads_files_of_any_bytes() {
    let dir = TempDir::new().unwrap();
    let (key, _) = setup(&dir);
    let input = p(&dir, "bin");
    let bytes: Vec<u8> = (0..=255u8).rev().collect();
    fs::write(&input, &bytes).unwrap();
    let ct = p(&dir, "bin.rmc");
    assert_eq!(code(&rmc(&["encrypt", s(&key), s(&input), "--out", s(&ct)])), 0);
    let out = p(&dir, "back");
    assert_eq!(code(&rmc(&["decrypt", s(&key), s(&ct), "--out", s(&out)])), 0);
    assert_eq!(fs::read(&out).unwrap(), bytes);
}

#[test]
fn analyze_reports_spectrum_and_smallest_n() {
    let dir = TempDir::new().unwrap();
    let (key, _) = setup(&dir);
    let o = rmc(&["analyze", s(&key), "--text", "ALGORITHM", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_star"], 29);
    assert_eq!(v["validation"]["usable"], true);
    let tau: f64 = v["validation"]["spectral"]["tau"].as_str().unwrap().parse().unwrap();
    assert!((tau - 1.465571232).abs() < 1e-9);
    let text = rmc(&["analyze", s(&key)]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("pisot        yes"));
}

#[test]
fn single_error_detected_and_corrected() {
    let dir = TempDir::new().unwrap();
    let (key, ct) = setup(&dir);
    let bad = p(&dir, "bad.rmc");
    let truth = p(&dir, "truth.json");
    let o = rmc(&["corrupt", s(&ct), "--at", "1:1:3=28373", "--out", s(&bad), "--truth", s(&truth)]);
    assert_eq!(code(&o), 0);
    let t: Value = serde_json::from_str(&fs::read_to_string(&truth).unwrap()).unwrap();
    assert_eq!(t["corruptions"][0]["col"], 3);
    assert_eq!(t["corruptions"][0]["original"], "28337");

    let o = rmc(&["decrypt", s(&key), s(&bad)]);
    assert_eq!(code(&o), 3);

    let o = rmc(&["detect", s(&key), s(&bad)]);
    assert_eq!(code(&o), 3);
    let d: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(d["flagged_entries"], 1);
    assert_eq!(d["rows"][0]["flagged"], serde_json::json!([3]));
    assert_eq!(d["rows"][0]["trusted"], serde_json::json!([1, 2]));

    let fixed = p(&dir, "fixed.rmc");
    let args = ["correct", s(&key), s(&bad), "--validator", "letters", "--truth", s(&truth), "--out", s(&fixed)];
    let o = rmc(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["status"], "success");
    assert_eq!(r["audit"]["recovered"], true);
    assert_eq!(r["rows"][0]["first_accepted_at"], 3);
    assert_eq!(r["rows"][0]["ranges"][0]["estimate"], "28336");
    assert_eq!(rmc(&["decrypt", s(&key), s(&fixed)]).stdout, b"ALGORITHM");

    // Byte validation cannot tell the candidates apart here.
    let o = rmc(&["correct", s(&key), s(&bad)]);
    assert_eq!(code(&o), 3);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["rows"][0]["outcome"], "ambiguous");
}

#[test]
fn clean_ciphertext_passes_detection() {
    let dir = TempDir::new().unwrap();
    let (key, ct) = setup(&dir);
    let o = rmc(&["detect", s(&key), s(&ct)]);
    assert_eq!(code(&o), 0);
    let o = rmc(&["correct", s(&key), s(&ct)]);
    assert_eq!(code(&o), 0);
}

#[test]
fn known_locations_and_budget() {
    let dir = TempDir::new().unwrap();
    let key = p(&dir, "t.json");
    let ct = p(&dir, "t.rmc");
    let gen = ["keygen", "--method", "standard", "--coefficients", "1,1,1,1", "--index", "5", "--out", s(&key)];
    assert_eq!(code(&rmc(&gen)), 0);
    assert_eq!(code(&rmc(&["encrypt", s(&key), "--text", "EXTRATERRESTRIAL", "--out", s(&ct)])), 0);
    let bad = p(&dir, "tb.rmc");
    let o = rmc(&["corrupt", s(&ct), "--at", "1:1:2=4513", "--at", "1:1:3=7211", "--at", "1:1:4=1337", "--out", s(&bad)]);
    assert_eq!(code(&o), 0);
    let o = rmc(&["correct", s(&key), s(&bad), "--trusted", "1:1:1", "--budget", "10", "--validator", "letters"]);
    assert_eq!(code(&o), 4);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["status"], "budget_exhausted");
    assert_eq!(r["rows"][0]["trusted"], serde_json::json!([1]));
    assert_eq!(r["rows"][0]["tested"], 10);
    let lower = r["rows"][0]["ranges"][0]["lower"].as_f64().unwrap();
    assert!((lower - 8299.66).abs() < 0.01);
}

#[test]
fn random_corruption_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (_, ct) = setup(&dir);
    let (a, b) = (p(&dir, "a.rmc"), p(&dir, "b.rmc"));
    for out in [&a, &b] {
        let o = rmc(&["corrupt", s(&ct), "--model", "digit-transpose", "--count", "2", "--seed", "9", "--out", s(out)]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&ct).unwrap());
}

#[test]
fn mismatched_key_is_rejected_before_arithmetic() {
    let dir = TempDir::new().unwrap();
    let (_, ct) = setup(&dir);
    let other = p(&dir, "other.json");
    let gen = ["keygen", "--method", "standard", "--coefficients", "1,0,1", "--index", "16", "--out", s(&other)];
    assert_eq!(code(&rmc(&gen)), 0);
    let o = rmc(&["decrypt", s(&other), s(&ct)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("fingerprint"));
}

#[test]
fn keygen_methods_produce_usable_keys() {
    let dir = TempDir::new().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["--method", "sieve", "--k", "3", "--range", "0,3", "--seed", "4"],
        vec!["--method", "sieve", "--k", "4", "--range", "-1,3", "--pisot", "--seed", "1"],
        vec!["--method", "abt", "--r", "2", "--m", "3"],
        vec!["--method", "primitive", "--seed-matrix", "0,1,1;1,0,0;0,1,0", "--seed", "2"],
        vec!["--method", "right-form", "--coefficients", "-4,0,5"],
    ];
    for (i, extra) in cases.iter().enumerate() {
        let key = p(&dir, &format!("k{i}.json"));
        let mut args = vec!["keygen", "--out", s(&key)];
        args.extend(extra.iter().copied());
        let o = rmc(&args);
        assert_eq!(code(&o), 0, "{extra:?}: {}", String::from_utf8_lossy(&o.stderr));
        let ct = p(&dir, &format!("k{i}.rmc"));
        assert_eq!(code(&rmc(&["encrypt", s(&key), "--text", "Hello, recurrences", "--out", s(&ct)])), 0);
        assert_eq!(rmc(&["decrypt", s(&key), s(&ct)]).stdout, b"Hello, recurrences");
        assert_eq!(code(&rmc(&["analyze", s(&key)])), 0);
    }
    let again = p(&dir, "again.json");
    assert_eq!(code(&rmc(&["keygen", "--out", s(&again), "--method", "sieve", "--k", "3", "--range", "0,3", "--seed", "4"])), 0);
    assert_eq!(fs::read(&again).unwrap(), fs::read(p(&dir, "k0.json")).unwrap());
}

#[test]
fn invalid_input_exits_with_validation_status() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&rmc(&["keygen", "--method", "standard"])), 2);
    assert_eq!(code(&rmc(&["keygen", "--method", "standard", "--coefficients", "0,1,1"])), 2);
    assert_eq!(code(&rmc(&["keygen", "--range", "a,b"])), 2);
    assert_eq!(code(&rmc(&["frobnicate"])), 2);
    let junk = p(&dir, "junk.json");
    fs::write(&junk, "{}").unwrap();
    assert_eq!(code(&rmc(&["analyze", s(&junk)])), 2);
    let (key, ct) = setup(&dir);
    assert_eq!(code(&rmc(&["corrupt", s(&ct), "--at", "0:1:1=5"])), 2);
    assert_eq!(code(&rmc(&["correct", s(&key), s(&ct), "--trusted", "1:9:1"])), 2);
}

#[test]
fn bench_csv() {
    let dir = TempDir::new().unwrap();
    let (key, _) = setup(&dir);
    let o = rmc(&["bench", "--key", s(&key), "--trials", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), recmat_cli::CSV_HEADER);

    let args = ["bench", "--key", s(&key), "--n", "15,29", "--trials", "50", "--text", "ALGORITHM", "--no-timing"];
    let a = rmc(&args);
    let b = rmc(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("key,15,replace_uniform:1:100,50,"));
    assert!(rows[2].ends_with(",0"));
}

#[test]
fn ambiguity_is_reported_before_the_budget_runs_out() {
    let dir = TempDir::new().unwrap();
    let key = p(&dir, "t.json");
    let ct = p(&dir, "t.rmc");
    let gen = ["keygen", "--method", "standard", "--coefficients", "1,1,1,1", "--index", "5", "--out", s(&key)];
    assert_eq!(code(&rmc(&gen)), 0);
    assert_eq!(code(&rmc(&["encrypt", s(&key), "--text", "EXTRATERRESTRIAL", "--out", s(&ct)])), 0);
    let bad = p(&dir, "tb.rmc");
    let o = rmc(&["corrupt", s(&ct), "--at", "1:1:2=4513", "--at", "1:1:3=7211", "--at", "1:1:4=1337", "--out", s(&bad)]);
    assert_eq!(code(&o), 0);
    let o = rmc(&["correct", s(&key), s(&bad), "--trusted", "1:1:1", "--budget", "10"]);
    assert_eq!(code(&o), 3);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["status"], "unresolved");
    assert_eq!(r["rows"][0]["outcome"], "ambiguous");
}

fn analyze_json(key: &Path) -> Value {
    let o = rmc(&["analyze", s(key), "--json"]);
    assert_eq!(code(&o), 0);
    serde_json::from_slice(&o.stdout).unwrap()
}

fn tau(v: &Value) -> f64 {
    v["validation"]["spectral"]["tau"].as_str().unwrap().parse().unwrap()
}

#[test]
fn keygen_documented_examples() {
    let dir = TempDir::new().unwrap();
    let fib = p(&dir, "fib.json");
    assert_eq!(code(&rmc(&["keygen", "--method", "sieve", "--k", "2", "--range", "1,1", "--out", s(&fib)])), 0);
    let v = analyze_json(&fib);
    assert_eq!(v["kind"], "symmetric");
    assert!((tau(&v) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    let key: Value = serde_json::from_str(&fs::read_to_string(&fib).unwrap()).unwrap();
    assert_eq!(key["coefficients"], serde_json::json!(["1", "1"]));

    let abt = p(&dir, "abt.json");
    assert_eq!(code(&rmc(&["keygen", "--method", "abt", "--r", "2", "--m", "3", "--out", s(&abt)])), 0);
    let text = String::from_utf8(rmc(&["analyze", s(&abt)]).stdout).unwrap();
    assert!(text.contains("char poly    z^6 - z^5 - z^4 - 2z^3 + 1"), "{text}");
    assert!(text.contains("pisot        yes"));

    let tetra = p(&dir, "tetra.json");
    let gen = ["keygen", "--method", "standard", "--coefficients", "1,1,1,1", "--index", "5", "--out", s(&tetra)];
    assert_eq!(code(&rmc(&gen)), 0);
    assert!((tau(&analyze_json(&tetra)) - 1.927562).abs() < 1e-5);
}

#[test]
fn empty_and_large_inputs() {
    let dir = TempDir::new().unwrap();
    let (key, _) = setup(&dir);
    let empty = p(&dir, "empty");
    fs::write(&empty, b"").unwrap();
    let ct = p(&dir, "empty.rmc");
    assert_eq!(code(&rmc(&["encrypt", s(&key), s(&empty), "--out", s(&ct)])), 0);
    let text = fs::read_to_string(&ct).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("RMCv1 k=3 blocks=0 len=0 fp="));
    let o = rmc(&["decrypt", s(&key), s(&ct)]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());

    use rand::{RngCore, SeedableRng};
    let mut bytes = vec![0u8; 1 << 20];
    rand_chacha::ChaCha8Rng::seed_from_u64(11).fill_bytes(&mut bytes);
    let big = p(&dir, "big");
    fs::write(&big, &bytes).unwrap();
    let ct = p(&dir, "big.rmc");
    assert_eq!(code(&rmc(&["encrypt", s(&key), s(&big), "--out", s(&ct)])), 0);
    let back = p(&dir, "big.out");
    assert_eq!(code(&rmc(&["decrypt", s(&key), s(&ct), "--out", s(&back)])), 0);
    assert!(fs::read(&back).unwrap() == bytes);
}

#[test]
fn zero_count_corruption_is_identity() {
    let dir = TempDir::new().unwrap();
    let (_, ct) = setup(&dir);
    let out = p(&dir, "same.rmc");
    let o = rmc(&["corrupt", s(&ct), "--model", "replace-uniform", "--count", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&ct).unwrap());
}

#[test]
fn non_pisot_ranges_grow_with_n() {
    let dir = TempDir::new().unwrap();
    let key = p(&dir, "w4.json");
    let gen = ["keygen", "--method", "standard", "--coefficients", "1,1,0,0", "--index", "20", "--out", s(&key)];
    assert_eq!(code(&rmc(&gen)), 0);
    let args = [
        "bench", "--key", s(&key), "--n", "10,20,30,40,50", "--model", "additive_noise:1:1000000000",
        "--trials", "100", "--seed", "5", "--budget", "500", "--no-timing",
    ];
    let o = rmc(&args);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lengths: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert_eq!(lengths.len(), 5);
    assert!(lengths.windows(2).all(|w| w[1] > w[0]), "{lengths:?}");
}
