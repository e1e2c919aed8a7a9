use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hprisk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hprisk")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = hprisk(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn synth_then_suite_fits_every_asset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--seed", "3", "--out", "s"]);
    ok(d, &["suite", "--input", "s/panel", "--model", "1", "--format", "json", "--out", "r"]);
    let table = json(&d.join("r/per_asset_model_1.json"));
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 151);
    assert!(rows.iter().all(|r| r[1].is_number()));
    let meta = json(&d.join("r/suite.meta.json"));
    assert_eq!(meta["command"], "suite");
    assert_eq!(meta["input_sha256"].as_str().unwrap().len(), 64);
}

/// Percent log returns of the national index over return quarters `first..=last` (1-based).
fn market_mean(panel_csv: &str, first: usize, last: usize) -> f64 {
    let levels: Vec<f64> = panel_csv
        .lines()
        .filter(|l| l.starts_with("__MARKET__,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let r: Vec<f64> = levels.windows(2).map(|w| 100.0 * (w[1] / w[0]).ln()).collect();
    r[first - 1..last].iter().sum::<f64>() / (last + 1 - first) as f64
}

#[test]
fn noiseless_linear_pricing_recovers_realised_premium() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--preset", "linear", "--noise-scale", "0", "--seed", "4", "--out", "s"]);
    ok(d, &["fm", "--input", "s/panel.csv", "--out", "f"]);
    let result = json(&d.join("f/fm_result.json"));
    let full = &result["summary"][0]["gammas"];
    let want = market_mean(&fs::read_to_string(d.join("s/panel.csv")).unwrap(), 61, 92);
    assert!((full[0]["mean"].as_f64().unwrap() - want).abs() < 1e-9);
    assert!(full[1]["mean"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(full[2]["mean"].as_f64().unwrap(), 0.0);
    for q in result["quarters"].as_array().unwrap() {
        assert!(q["gammas"][1].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn calendar_gap_is_reported_with_the_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut text = String::from("asset,year,quarter,series,value\n");
    for (y, q) in [(2000, 1), (2000, 2), (2000, 4), (2001, 1)] {
        text.push_str(&format!("A,{y},{q},price_index,100\n"));
    }
    fs::write(d.join("gap.csv"), text).unwrap();
    let out = hprisk(d, &["ingest-check", "--input", "gap", "--out", "o"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("hprisk: error:") && err.contains("2000Q3"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(hprisk(d, &["suite"]).status.code(), Some(2));
    assert_eq!(hprisk(d, &["bogus"]).status.code(), Some(2));
    ok(d, &["synth", "--out", "s"]);
    let bad_range = hprisk(d, &["fm", "--input", "s/panel", "--testing", "61-200", "--out", "f"]);
    assert_eq!(bad_range.status.code(), Some(2));
    let conflict =
        hprisk(d, &["factors", "--input", "s/panel", "--momentum-k", "5", "--momentum-decile", "--out", "f"]);
    assert_eq!(conflict.status.code(), Some(2));
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let d = dir.path();
            ok(d, &["synth", "--seed", "21", "--out", "s"]);
            for cmd in [
                vec!["suite", "--input", "s/panel", "--out", "o"],
                vec!["fm", "--input", "s/panel", "--format", "json", "--out", "o"],
                vec!["rolling", "--input", "s/panel", "--asset", "MSA007", "--out", "o"],
                vec!["sorted-betas", "--input", "s/panel", "--out", "o"],
                vec!["scatter", "--input", "s/panel", "--out", "o"],
                vec!["factors", "--input", "s/panel", "--out", "o"],
                vec!["report", "--input", "s/panel", "--frequency", "both", "--out", "o"],
            ] {
                ok(d, &cmd);
            }
            (tree(&d.join("s")), tree(&d.join("o")))
        })
        .collect();
    assert!(runs[0].1.len() > 10);
    assert_eq!(runs[0], runs[1]);
}
