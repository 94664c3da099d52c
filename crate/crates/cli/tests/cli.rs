use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture_genome() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/evolved_genome.json")
}

fn snnland(dir: &Path, args: &[&str]) -> Output {
    snnland_threads(dir, args, None)
}

fn snnland_threads(dir: &Path, args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_snnland"));
    cmd.current_dir(dir).args(args);
    match threads {
        Some(n) => cmd.env("SNNLAND_THREADS", n.to_string()),
        None => cmd.env_remove("SNNLAND_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn evolve_writes_genome_log_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = snnland(dir.path(), &["evolve", "--generations", "2", "--pop", "8", "--seed", "7", "--out", "g.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let genome = snn_landing::ControllerGenome::load(dir.path().join("g.json")).unwrap();
    genome.validate().unwrap();
    let log = csv_rows(&dir.path().join("g.log.csv"));
    assert_eq!(log.len(), 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("g.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "evolve");
    assert_eq!(manifest["master_seed"], 7);
    assert_eq!(manifest["config"]["pop_size"], 8);
}

#[test]
fn evolve_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str| ["evolve", "--generations", "2", "--pop", "8", "--seed", "3", "--quiet", "--out", out];
    assert!(snnland(dir.path(), &args("a.json")).status.success());
    assert!(snnland(dir.path(), &args("b.json")).status.success());
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a.log.csv"), read("b.log.csv"));
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn invalid_flags_are_usage_errors_without_output() {
    let dir = TempDir::new().unwrap();
    for pop in ["0", "7"] {
        let out = snnland(dir.path(), &["evolve", "--pop", pop, "--out", "g.json"]);
        assert_eq!(out.status.code(), Some(2));
    }
    let genome = fixture_genome();
    let genome = genome.to_str().unwrap();
    let bad = [
        vec!["land", "--genome", genome, "--h0", "0.05"],
        vec!["land", "--genome", genome, "--runs", "0"],
        vec!["compare", "--genome", genome, "--runs", "0"],
        vec!["land", "--genome", genome, "--backend", "gpu"],
        vec!["frobnicate"],
    ];
    for args in bad {
        assert_eq!(snnland(dir.path(), &args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn runtime_failures_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let out = snnland(dir.path(), &["land", "--genome", "missing.json", "--runs", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let mut json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture_genome()).unwrap()).unwrap();
    json["theta_out"][2] = serde_json::json!(5000);
    fs::write(dir.path().join("bad.json"), json.to_string()).unwrap();
    let out = snnland(dir.path(), &["land", "--genome", "bad.json", "--runs", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta_out"));
}

#[test]
fn land_both_backends_writes_aligned_trace_pairs() {
    let dir = TempDir::new().unwrap();
    let genome = fixture_genome();
    let out = snnland(
        dir.path(),
        &["land", "--genome", genome.to_str().unwrap(), "--backend", "both", "--h0", "4", "--runs", "3", "--seed", "1", "--out-dir", "l"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for run in 0..3 {
        let reference = csv_rows(&dir.path().join(format!("l/run_{run:03}_reference.csv")));
        let loihi = csv_rows(&dir.path().join(format!("l/run_{run:03}_loihi.csv")));
        assert!(!reference.is_empty());
        let times = |rows: &[Vec<String>]| rows.iter().map(|r| r[0].clone()).collect::<Vec<_>>();
        let common = reference.len().min(loihi.len());
        assert_eq!(times(&reference)[..common], times(&loihi)[..common]);
    }
    assert_eq!(csv_rows(&dir.path().join("l/summary.csv")).len(), 6);
    assert!(dir.path().join("l/manifest.json").exists());
    let text = stdout(&out);
    assert!(text.contains("reference") && text.contains("loihi"));
}

#[test]
fn noiseless_landings_with_evolved_genome_touch_down() {
    let dir = TempDir::new().unwrap();
    let genome = fixture_genome();
    let out = snnland(
        dir.path(),
        &["land", "--genome", genome.to_str().unwrap(), "--runs", "10", "--noiseless", "--out-dir", "n"],
    );
    assert!(out.status.success());
    for row in csv_rows(&dir.path().join("n/summary.csv")) {
        assert_eq!(row[3], "true", "run {} did not land", row[0]);
    }
    for run in 0..10 {
        let trace = csv_rows(&dir.path().join(format!("n/run_{run:03}_reference.csv")));
        let h: f64 = trace.last().unwrap()[1].parse().unwrap();
        assert!(h <= 0.1);
    }
}

#[test]
fn compare_reports_gap_for_fixture() {
    let dir = TempDir::new().unwrap();
    let genome = fixture_genome();
    let out = snnland(
        dir.path(),
        &["compare", "--genome", genome.to_str().unwrap(), "--runs", "10", "--out-dir", "c"],
    );
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c/gap_report.json")).unwrap()).unwrap();
    assert_eq!(report["n_episodes"], 10);
    assert!(report["hidden"]["matching"]["mean"].as_f64().unwrap() >= 0.997);
    assert!(report["output"]["matching"]["mean"].as_f64().unwrap() >= 0.997);
    let rows = csv_rows(&dir.path().join("c/gap_report.csv"));
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["mean", "median", "sd", "min", "max"]);
}

#[test]
fn bench_reports_both_backends() {
    let dir = TempDir::new().unwrap();
    let genome = fixture_genome();
    let out = snnland(dir.path(), &["bench", "--genome", genome.to_str().unwrap(), "--steps", "20000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("reference") && lines[1].starts_with("loihi"));
    assert!(lines.iter().all(|l| l.contains("steps 20000")));
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn replaying_a_manifest_is_byte_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let genome = fixture_genome();
    let genome = genome.to_str().unwrap();
    let first = [
        vec!["land", "--genome", genome, "--backend", "both", "--runs", "6", "--seed", "4", "--out-dir", "land"],
        vec!["compare", "--genome", genome, "--runs", "8", "--seed", "4", "--out-dir", "cmp"],
    ];
    for args in &first {
        assert!(snnland_threads(dir.path(), args, Some(1)).status.success());
    }
    let snapshot = |sub: &str| artifacts(&dir.path().join(sub));
    let before = (snapshot("land"), snapshot("cmp"));
    let stdout_before: Vec<String> = ["land", "cmp"]
        .iter()
        .map(|sub| {
            let manifest = format!("{sub}/manifest.json");
            stdout(&snnland_threads(dir.path(), &["replay", "--manifest", &manifest], Some(1)))
        })
        .collect();
    for threads in [3, 8] {
        for (i, sub) in ["land", "cmp"].iter().enumerate() {
            let manifest = format!("{sub}/manifest.json");
            let out = snnland_threads(dir.path(), &["replay", "--manifest", &manifest], Some(threads));
            assert!(out.status.success());
            assert_eq!(stdout(&out), stdout_before[i]);
        }
        assert_eq!((snapshot("land"), snapshot("cmp")), before, "threads = {threads}");
    }

    assert!(snnland_threads(dir.path(), &["evolve", "--generations", "2", "--pop", "8", "--quiet", "--out", "e/g.json"], Some(1)).status.success());
    let evolved = snapshot("e");
    assert!(snnland_threads(dir.path(), &["replay", "--manifest", "e/g.manifest.json"], Some(4)).status.success());
    assert_eq!(snapshot("e"), evolved);
}
