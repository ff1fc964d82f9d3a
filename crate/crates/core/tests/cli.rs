use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use glru::cli::{parse_config, RunConfig};

fn glru(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glru"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers.iter().map(str::to_owned).zip(rec.iter().map(str::to_owned)).collect()
        })
        .collect()
}

const TINY_SWEEP: [&str; 17] = [
    "sweep",
    "--rho",
    "0.5",
    "--rate",
    "10",
    "--alpha",
    "0.8",
    "--cp",
    "0.1",
    "--startup-delay",
    "3",
    "--chunk-len",
    "4",
    "--requests",
    "20000",
    "--n-files",
    "200",
];

#[test]
fn rejects_bad_config_with_exit_1() {
    let out = glru(&["sweep", "--cp", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cp"));
    assert_eq!(glru(&["validate", "--capacity", "5", "--cp", "0.1"]).status.code(), Some(1));
    assert_eq!(glru(&["fig1", "--nonsense"]).status.code(), Some(1));
    assert_eq!(glru(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = glru(&["oracle", "--n-files", "9", "--chunks", "3", "--capacity", "20", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn one_point_sweep_has_two_rows_per_metric() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = TINY_SWEEP.to_vec();
    args.extend(["--out", dir.path().to_str().unwrap()]);
    let out = glru(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let rows = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 10);
    for metric in ["p_c", "p_m", "T_w", "T_d", "p_d"] {
        let mut policies: Vec<&str> = rows
            .iter()
            .filter(|r| r["metric"] == metric)
            .map(|r| r["policy"].as_str())
            .collect();
        policies.sort_unstable();
        assert_eq!(policies, ["glru", "lru"], "{metric}");
    }
    let hashes: Vec<&str> = rows.iter().map(|r| r["trace_hash"].as_str()).collect();
    assert!(hashes.windows(2).all(|w| w[0] == w[1]));

    let comparison = read_csv(&dir.path().join("comparison.csv"));
    assert_eq!(comparison.len(), 5);
    for row in &comparison {
        let lru: f64 = row["lru"].parse().unwrap();
        let glru: f64 = row["glru"].parse().unwrap();
        let gross: f64 = row["gross"].parse().unwrap();
        assert!((gross - (glru - lru)).abs() <= 1e-12 * lru.abs().max(1.0));
    }
}

#[test]
fn identical_config_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut args = TINY_SWEEP.to_vec();
        args.extend(["--records", "true", "--out", dir.path().to_str().unwrap()]);
        assert!(glru(&args).status.success());
    }
    for name in [
        "sweep.csv",
        "comparison.csv",
        "histograms.csv",
        "table2.csv",
        "catalog_0_independent.csv",
        "trace_0_independent.csv",
        "records_0_independent_lru.csv",
        "records_0_independent_glru.csv",
    ] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between identical runs");
    }
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let out = glru(&[
        "validate",
        "--n-files",
        "300",
        "--capacity",
        "200",
        "--chunks",
        "6",
        "--requests",
        "50000",
        "--ranks",
        "1,10",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let echoed = fs::read_to_string(first.join("config.txt")).unwrap();
    let parsed = RunConfig::from_kv_str(&echoed).unwrap();
    let direct = parse_config([
        "glru",
        "validate",
        "--n-files",
        "300",
        "--capacity",
        "200",
        "--chunks",
        "6",
        "--requests",
        "50000",
        "--ranks",
        "1,10",
        "--out",
        first.to_str().unwrap(),
    ])
    .unwrap();
    assert_eq!(parsed, direct);

    // replay from the echo, overriding only the output directory
    let conf = first.join("config.txt");
    let out = glru(&["validate", "--config", conf.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["validation.csv", "model_glru.csv", "catalog.csv"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn oracle_rows_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = glru(&["oracle", "--requests", "100000", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut sums: BTreeMap<(String, String), (f64, f64)> = BTreeMap::new();
    for row in read_csv(&dir.path().join("oracle.csv")) {
        let e = sums.entry((row["policy"].clone(), row["file"].clone())).or_default();
        e.0 += row["stationary"].parse::<f64>().unwrap();
        e.1 += row["simulated"].parse::<f64>().unwrap();
    }
    assert_eq!(sums.len(), 6);
    for ((policy, file), (exact, sim)) in sums {
        assert!((exact - 1.0).abs() < 1e-9, "{policy} file {file}: {exact}");
        assert!((sim - 1.0).abs() < 1e-9, "{policy} file {file}: {sim}");
    }
}

#[test]
fn fig1_columns_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let out = glru(&["fig1", "--n-files", "2000", "--capacity", "300", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("fig1.csv"));
    assert_eq!(rows.len(), 2000);
    let mut prev_any = f64::INFINITY;
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["rank"], (i + 1).to_string());
        let lru_any: f64 = row["lru_any"].parse().unwrap();
        let glru_any: f64 = row["glru_any"].parse().unwrap();
        let glru_full: f64 = row["glru_full"].parse().unwrap();
        assert!(glru_full <= glru_any && lru_any <= glru_any);
        assert!(glru_any <= prev_any);
        prev_any = glru_any;
    }
    let model = read_csv(&dir.path().join("model_glru.csv"));
    assert_eq!(model.len(), 2000);
    assert!(model[0].contains_key("h5"));
}
