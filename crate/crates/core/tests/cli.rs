use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn signscreen(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signscreen"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> Output {
    let o = signscreen(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn small_cohort(out: &Path, n: &str) {
    ok(out, &["--seed", "3", "synth", "--n", n, "--duration", "40"]);
}

#[test]
fn synth_writes_one_file_per_participant() {
    let dir = tempfile::tempdir().unwrap();
    small_cohort(dir.path(), "40");
    let files = fs::read_dir(dir.path().join("keypoints")).unwrap().count();
    assert_eq!(files, 40);
    let manifest = fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 41);
    assert_eq!(manifest.lines().filter(|l| l.contains(",MCI,")).count(), 19);
}

#[test]
fn synth_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    small_cohort(a.path(), "4");
    small_cohort(b.path(), "4");
    for name in ["manifest.csv", "keypoints/participant_1.json", "keypoints/participant_4.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn missing_out_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_signscreen")).args(["synth", "--n", "2"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--out"));
}

#[test]
fn bad_flag_value_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = signscreen(dir.path(), &["train", "--model", "forest"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extract_on_empty_directory_writes_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    ok(dir.path(), &["extract", "--input", empty.to_str().unwrap()]);
    let table = fs::read_to_string(dir.path().join("features.csv")).unwrap();
    assert!(table.lines().count() <= 1, "{table}");
}

#[test]
fn keep_going_skips_unreadable_files() {
    let dir = tempfile::tempdir().unwrap();
    small_cohort(dir.path(), "2");
    fs::write(dir.path().join("keypoints/participant_9.json"), "{ not json").unwrap();

    let strict = signscreen(dir.path(), &["extract", "--clip-len", "10"]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("participant_9.json"));

    ok(dir.path(), &["extract", "--clip-len", "10", "--keep-going"]);
    let table = fs::read_to_string(dir.path().join("features.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 * 4);
    assert!(!table.contains("\n9_"));
}

#[test]
fn missing_upstream_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = signscreen(dir.path(), &["train"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("features.csv"));

    let o = signscreen(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("predictions.csv"));
}

#[test]
fn single_class_test_set_reports_undefined_roc() {
    let dir = tempfile::tempdir().unwrap();
    small_cohort(dir.path(), "6");
    ok(dir.path(), &["extract", "--clip-len", "10"]);
    ok(dir.path(), &["train", "--model", "logistic", "--max-epochs", "50"]);

    let features = dir.path().join("features.csv");
    let relabelled: String = fs::read_to_string(&features)
        .unwrap()
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let mut cols: Vec<&str> = l.split(',').collect();
            if i > 0 {
                cols[2] = "1";
            }
            cols.join(",") + "\n"
        })
        .collect();
    let healthy_only = dir.path().join("healthy_only.csv");
    fs::write(&healthy_only, relabelled).unwrap();

    let o = ok(dir.path(), &["eval", "--features", healthy_only.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("auc undefined"), "{stdout}");
    let report = fs::read_to_string(dir.path().join("eval/eval.json")).unwrap();
    assert!(report.contains("ROC undefined"));
}

#[test]
fn report_reproduces_participant_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let rows: [(&str, &[(f64, f64)], &str); 6] = [
        ("1", &[(0.63, 0.37), (0.43, 0.57), (0.39, 0.61), (0.27, 0.73), (0.40, 0.60)], "Healthy"),
        ("2", &[(0.13, 0.87), (0.02, 0.98), (0.56, 0.44), (0.23, 0.77)], "Healthy"),
        ("3", &[(0.08, 0.92), (0.02, 0.98), (0.02, 0.98), (0.01, 0.99)], "Healthy"),
        ("4", &[(0.09, 0.91), (0.24, 0.76), (0.16, 0.84), (0.07, 0.93)], "Healthy"),
        ("5", &[(0.01, 0.99), (0.01, 0.99), (0.00, 1.00), (0.07, 0.93)], "Healthy"),
        ("6", &[(0.93, 0.07), (0.29, 0.71), (0.91, 0.09)], "MCI"),
    ];
    let mut csv = String::from("clip_id,participant_id,p_mci,p_healthy\n");
    for (pid, subs, _) in &rows {
        for (k, (m, h)) in subs.iter().enumerate() {
            csv.push_str(&format!("{pid}_{},{pid},{m},{h}\n", k + 1));
        }
    }
    let path = dir.path().join("table.csv");
    fs::write(&path, csv).unwrap();

    let o = ok(dir.path(), &["report", "--predictions", path.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let decisions: Vec<(String, String)> = stdout
        .lines()
        .map(|l| {
            let mut f = l.split('\t');
            (f.next().unwrap().to_string(), f.next().unwrap().to_string())
        })
        .collect();
    let expected: Vec<(String, String)> = rows.iter().map(|(p, _, d)| (p.to_string(), d.to_string())).collect();
    assert_eq!(decisions, expected);
    assert!(dir.path().join("report/participants.csv").exists());
}
