use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dtpc_di::montecarlo::ExperimentSpec;
use dtpc_di::Codebook;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtpc-di"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .env_remove("DTPC_DI_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

/// `key -> value` from a key/value report.
fn kv(path: &Path) -> std::collections::HashMap<String, f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn bounds_at_kappa_zero() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["bounds", "--kappa", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let rec = kv(&dir.path().join("bounds.csv"));
    assert_eq!(rec["capacity_lower"], 0.25);
    assert_eq!(rec["capacity_upper"], 1.5);
    assert!(fs::read_to_string(dir.path().join("bounds.csv"))
        .unwrap()
        .starts_with("#schema=dtpc-di-bounds/1\n"));
}

#[test]
fn kappa_sweep_flags_the_optimum() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["bounds", "--n", "100", "--sweep-kappa", "0:0.99:0.01"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("kappa_sweep.csv")).unwrap();
    let flagged: Vec<&str> = text.lines().filter(|l| l.ends_with(",true")).collect();
    assert_eq!(flagged.len(), 1);
    let kappa: f64 = flagged[0].split(',').next().unwrap().parse().unwrap();
    assert!((kappa - (1.0 - 1.0 / 100f64.ln())).abs() <= 0.01, "{kappa}");
    assert_eq!(text.lines().count(), 2 + 100);
}

#[test]
fn missing_kappa_is_a_config_error_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["bounds", "--n", "64"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_values_name_the_field() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["bounds", "--kappa", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa"));
    let o = run(dir.path(), &["bounds", "--kappa", "0", "--c", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pack_one_dimension_is_saturated_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = [
        "pack",
        "--n",
        "1",
        "--amplitude",
        "1",
        "--radius",
        "0.2",
        "--seed",
        "4",
        "--max-rejections",
        "1000000",
    ];
    let o = run(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    let rec = kv(&dir.path().join("packing_report.csv"));
    assert!([2.0, 3.0].contains(&rec["m"]), "{}", rec["m"]);
    assert_eq!(rec["covering_fraction"], 1.0);
    assert!(stdout(&o).starts_with(&format!("M={}", rec["m"])));
    let first = fs::read(dir.path().join("codebook.txt")).unwrap();
    run(dir.path(), &args);
    assert_eq!(first, fs::read(dir.path().join("codebook.txt")).unwrap());
}

#[test]
fn oversized_radius_gives_flagged_singleton() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["pack", "--n", "4", "--amplitude", "1", "--radius", "2.5"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
    let rec = kv(&dir.path().join("packing_report.csv"));
    assert_eq!(rec["m"], 1.0);
    assert_eq!(rec["degenerate"], 1.0);
}

fn pack_for_verify(dir: &Path) -> PathBuf {
    let o = run(
        dir,
        &[
            "pack",
            "--n",
            "6",
            "--amplitude",
            "4",
            "--seed",
            "0",
            "--max-rejections",
            "1000000",
            "--cover-samples",
            "10",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    dir.join("codebook.txt")
}

fn verify(dir: &Path, codebook: &Path) -> Output {
    run(
        dir,
        &[
            "verify",
            codebook.to_str().unwrap(),
            "--rho",
            "0.8,0.2",
            "--lambda",
            "0.5",
        ],
    )
}

#[test]
fn fresh_codebook_verifies_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = pack_for_verify(dir.path());
    let o = verify(dir.path(), &path);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(Codebook::from_text(&text).unwrap().to_text(), text);
    assert_eq!(kv(&dir.path().join("verify_report.csv"))["passed"], 1.0);
}

#[test]
fn duplicated_row_fails_the_separation_check() {
    let dir = TempDir::new().unwrap();
    let path = pack_for_verify(dir.path());
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let m: usize = lines[0].rsplit("M=").next().unwrap().parse().unwrap();
    lines[0] = lines[0].replace(&format!("M={m}"), &format!("M={}", m + 1));
    lines.push(lines[1].clone());
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = verify(dir.path(), &path);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        kv(&dir.path().join("verify_report.csv"))["lemma_passed"],
        0.0
    );
}

#[test]
fn corrupt_or_missing_codebooks_are_format_errors() {
    let dir = TempDir::new().unwrap();
    let path = pack_for_verify(dir.path());
    let text = fs::read_to_string(&path).unwrap();
    let truncated: Vec<&str> = text.lines().take(3).collect();
    fs::write(&path, truncated.join("\n")).unwrap();
    assert_eq!(verify(dir.path(), &path).status.code(), Some(3));
    assert_eq!(
        verify(dir.path(), &dir.path().join("absent.txt"))
            .status
            .code(),
        Some(3)
    );
}

const SMALL: [&str; 10] = [
    "--n-grid",
    "8,16",
    "--trials",
    "200",
    "--pair-budget",
    "3",
    "--message-budget",
    "2",
    "--max-codewords",
    "16",
];

#[test]
fn simulate_rejects_zero_trials() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["simulate", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn simulate_csv_and_json_carry_the_same_numbers() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["--format", "both", "simulate"];
    args.extend(SMALL);
    let o = run(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("n=8 "));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("#schema=dtpc-di-sweep/1"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows = json["rows"].as_array().unwrap();
    for (line, row) in lines.zip(rows) {
        let f: Vec<&str> = line.split(',').collect();
        let e = &row["estimate"];
        assert_eq!(
            f[col("p_hat")].parse::<f64>().unwrap(),
            e["p_hat"].as_f64().unwrap()
        );
        assert_eq!(
            f[col("ci_high")].parse::<f64>().unwrap(),
            e["ci_high"].as_f64().unwrap()
        );
        assert_eq!(
            f[col("r0")].parse::<f64>().unwrap(),
            row["r0"].as_f64().unwrap()
        );
        assert_eq!(
            f[col("failures")].parse::<u64>().unwrap(),
            e["failures"].as_u64().unwrap()
        );
    }
    assert!(dir.path().join("sweep_detail.csv").exists());
}

#[test]
fn simulate_output_is_independent_of_thread_count() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let mut one = vec!["simulate", "--threads", "1"];
    one.extend(SMALL);
    let mut four = vec!["simulate", "--threads", "4"];
    four.extend(SMALL);
    assert_eq!(run(a.path(), &one).status.code(), Some(0));
    assert_eq!(run(b.path(), &four).status.code(), Some(0));
    for f in ["sweep.csv", "sweep_detail.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn shipped_config_is_the_demo_spec() {
    let text = fs::read_to_string(config("demo_sweep.toml")).unwrap();
    let spec: ExperimentSpec = toml::from_str(&text).unwrap();
    assert_eq!(spec, ExperimentSpec::demo());
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = config("demo_sweep.toml");
    let mut args = vec!["simulate", "--config", cfg.to_str().unwrap()];
    args.extend(SMALL);
    assert_eq!(run(dir.path(), &args).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 4);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "trials = 500\ntrails = 3\n").unwrap();
    let o = run(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trails"));
    fs::write(&cfg, "kappa = 0.2\nsigma = 1\n").unwrap();
    let o = run(dir.path(), &["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dtpc-di"))
        .args(["bounds", "--kappa", "0.2"])
        .env("DTPC_DI_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("bounds.csv").exists());
}
