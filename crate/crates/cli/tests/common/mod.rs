#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const HEADER: &str = "enroll_demo,probe_demo,score,kind\n";

/// Runs the CLI in-process with the program name prepended.
pub fn fdrkit(args: &[&str]) -> i32 {
    let mut all = vec!["fdrkit"];
    all.extend_from_slice(args);
    fdrkit_cli::run(all)
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&read(p)).unwrap()
}

/// Impostor scores with exactly `counts[k]` scores >= k + 1, within a cell of `total`.
fn impostor_cell(out: &mut String, e: &str, p: &str, counts: [usize; 5], total: usize) {
    for k in 0..5 {
        let next = if k + 1 < 5 { counts[k + 1] } else { 0 };
        for _ in 0..counts[k] - next {
            let _ = writeln!(out, "{e},{p},{},impostor", k as f64 + 1.5);
        }
    }
    for _ in 0..total - counts[0] {
        let _ = writeln!(out, "{e},{p},0,impostor");
    }
}

/// Genuine scores with exactly `misses[k]` scores < k + 1, within a cell of `total`.
fn genuine_cell(out: &mut String, d: &str, misses: [usize; 5], total: usize) {
    for k in 0..5 {
        let prev = if k > 0 { misses[k - 1] } else { 0 };
        for _ in 0..misses[k] - prev {
            let _ = writeln!(out, "{d},{d},{},genuine", k as f64 + 0.5);
        }
    }
    for _ in 0..total - misses[4] {
        let _ = writeln!(out, "{d},{d},9,genuine");
    }
}

/// Two-demographic dataset in the MOBIO layout. The dev impostors calibrate to
/// tau = x at FMR 10^-x for x in 1..=5; the test cells are 10000 comparisons
/// each, with counts chosen so the rendered rates match a published ArcFace
/// MOBIO table cell by cell.
pub fn mobio_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let mut dev = String::from(HEADER);
    let levels = [(0, 90000), (1, 9000), (2, 900), (3, 90), (4, 9), (5, 1)];
    let mut i = 0usize;
    for (score, n) in levels {
        for _ in 0..n {
            let d = if i.is_multiple_of(2) { "Male" } else { "Female" };
            let _ = writeln!(dev, "{d},{d},{score},impostor");
            i += 1;
        }
    }
    dev.push_str("Male,Male,9,genuine\nFemale,Female,9,genuine\n");

    let n = 10000;
    let mut test = String::from(HEADER);
    impostor_cell(&mut test, "Male", "Male", [770, 60, 0, 0, 0], n);
    impostor_cell(&mut test, "Male", "Female", [520, 10, 0, 0, 0], n);
    impostor_cell(&mut test, "Female", "Male", [430, 10, 0, 0, 0], n);
    impostor_cell(&mut test, "Female", "Female", [2350, 270, 41, 0, 0], n);
    genuine_cell(&mut test, "Male", [10, 10, 12, 12, 20], n);
    genuine_cell(&mut test, "Female", [0; 5], n);

    let dev_path = dir.join("mobio_dev.csv");
    let test_path = dir.join("mobio_test.csv");
    std::fs::write(&dev_path, dev).unwrap();
    std::fs::write(&test_path, test).unwrap();
    (dev_path, test_path)
}

/// Three-demographic generator spec small enough for quick CLI runs.
pub fn small_spec(unfair: bool) -> String {
    let (imp_mean, imp_std, gen_mean) = if unfair { (0.5, 1.2, 5.0) } else { (0.0, 1.0, 6.0) };
    format!(
        r#"{{
  "seed": 7,
  "per_demo": {{
    "0": {{"impostor_mean": 0, "impostor_std": 1, "genuine_mean": 6, "genuine_std": 1, "n_impostor": 100000, "n_genuine": 10000}},
    "1": {{"impostor_mean": 0, "impostor_std": 1, "genuine_mean": 6, "genuine_std": 1, "n_impostor": 100000, "n_genuine": 10000}},
    "2": {{"impostor_mean": {imp_mean}, "impostor_std": {imp_std}, "genuine_mean": {gen_mean}, "genuine_std": 1, "n_impostor": 100000, "n_genuine": 10000}}
  }}
}}
"#
    )
}

/// Writes a spec file and synthesizes dev.csv/test.csv into `dir`.
pub fn synth_small(dir: &Path, unfair: bool) -> (PathBuf, PathBuf) {
    std::fs::create_dir_all(dir).unwrap();
    let spec = dir.join("spec.json");
    std::fs::write(&spec, small_spec(unfair)).unwrap();
    assert_eq!(fdrkit(&["synth", "--spec", path_str(&spec), "--out", path_str(dir)]), 0);
    (dir.join("dev.csv"), dir.join("test.csv"))
}

/// One printed FDR value recomputed from the printed homogeneous FMR and
/// FNMR cells of the same table column.
#[derive(Debug, Clone, PartialEq)]
pub struct Recomputed {
    pub table: String,
    pub exponent: u32,
    pub printed: f64,
    pub printed_text: String,
    pub computed: f64,
}

pub const PUBLISHED_TABLES: &str = include_str!("../fixtures/published_tables.csv");

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Recomputes every printed FDR row at alpha = 0.5, in file order.
pub fn recompute_published() -> Vec<Recomputed> {
    use std::collections::BTreeMap;
    type Key = (String, u32);
    let mut fmr: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    let mut fnmr: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    let mut printed: Vec<(Key, String)> = Vec::new();
    let mut lines = PUBLISHED_TABLES.lines();
    assert_eq!(lines.next(), Some("table,exponent,rate,enroll,probe,printed"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let key = (f[0].to_owned(), f[1].parse().unwrap());
        match f[2] {
            "fmr" if f[3] == f[4] => fmr.entry(key).or_default().push(f[5].parse().unwrap()),
            "fmr" => {}
            "fnmr" => fnmr.entry(key).or_default().push(f[5].parse().unwrap()),
            "fdr" => printed.push((key, f[5].to_owned())),
            other => panic!("unknown rate {other}"),
        }
    }
    printed
        .into_iter()
        .map(|(key, text)| {
            let a = spread(&fmr[&key]);
            let b = spread(&fnmr[&key]);
            Recomputed {
                computed: fdrkit::fdr(a, b, 0.5).unwrap(),
                printed: text.parse().unwrap(),
                printed_text: text,
                table: key.0,
                exponent: key.1,
            }
        })
        .collect()
}

pub const PUBLISHED_TOLERANCE: f64 = 0.002 + 1e-9;

/// Rows whose recomputed FDR misses the printed value by more than the tolerance.
pub fn published_anomalies() -> Vec<Recomputed> {
    recompute_published()
        .into_iter()
        .filter(|r| (r.computed - r.printed).abs() > PUBLISHED_TOLERANCE)
        .collect()
}
