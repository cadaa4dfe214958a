use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn lvspeed(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lvspeed")).args(args).output().expect("run lvspeed");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn write_iterations(dir: &Path, name: &str, values: impl IntoIterator<Item = u64>) -> String {
    let mut text = String::from("iterations\n");
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    let p = path(dir, name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn version_and_help() {
    let (code, stdout, _) = lvspeed(&["--version"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("lvspeed "));
    let (code, stdout, _) = lvspeed(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["collect", "fit", "predict", "simulate", "parallel", "report"] {
        assert!(stdout.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn zero_runs_is_a_usage_error() {
    let (code, _, stderr) = lvspeed(&["collect", "--problem", "costas", "--n", "8", "--runs", "0"]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn threshold_outside_unit_interval_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = write_iterations(dir.path(), "runs.csv", 1..50);
    let (code, _, stderr) = lvspeed(&["fit", "-i", &input, "--threshold", "1.1"]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn unknown_problem_is_a_usage_error() {
    let (code, _, stderr) = lvspeed(&["collect", "--problem", "sudoku", "--n", "8", "--runs", "3"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("sudoku"));
}

#[test]
fn non_numeric_cell_names_its_row() {
    let dir = TempDir::new().unwrap();
    let input = path(dir.path(), "bad.csv");
    fs::write(&input, "iterations\n10\n20\nabc\n40\n").unwrap();
    let (code, _, stderr) = lvspeed(&["fit", "-i", &input]);
    assert_eq!(code, 3);
    assert!(stderr.contains("row 4"), "{stderr}");
}

#[test]
fn rejected_fit_blocks_prediction_unless_forced() {
    let dir = TempDir::new().unwrap();
    let input = write_iterations(dir.path(), "skewed.csv", (1..=200u64).map(|i| i * i * i));
    let fit = path(dir.path(), "fit.json");
    let (code, _, stderr) = lvspeed(&["fit", "-i", &input, "--family", "gaussian", "-o", &fit]);
    assert_eq!(code, 0, "{stderr}");
    let (code, _, stderr) = lvspeed(&["predict", "--fit", &fit, "--cores", "2,4"]);
    assert_eq!(code, 4, "{stderr}");
    let (code, stdout, stderr) = lvspeed(&["predict", "--fit", &fit, "--cores", "2,4", "--force"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("n,speedup"));
}

#[test]
fn zero_shift_exponential_predicts_linear_speedup() {
    let dir = TempDir::new().unwrap();
    let fit = path(dir.path(), "exp.json");
    fs::write(&fit, r#"{"family":"shifted_exponential","x0":0.0,"lambda":0.0001}"#).unwrap();
    let (code, stdout, stderr) = lvspeed(&["predict", "--fit", &fit, "--cores-upto", "64"]);
    assert_eq!(code, 0, "{stderr}");
    let curve = lasvegas::io::read_curve(stdout.as_bytes()).unwrap();
    assert_eq!(curve.points.len(), 64);
    for p in &curve.points {
        assert!((p.speedup - f64::from(p.n)).abs() < 1e-9 * f64::from(p.n), "{p:?}");
    }
}

#[test]
fn report_join_names_missing_core_counts() {
    let dir = TempDir::new().unwrap();
    let predicted = path(dir.path(), "pred.csv");
    let bootstrap = path(dir.path(), "boot.csv");
    fs::write(&predicted, "n,speedup\n2,1.9\n4,3.5\n32,20\n").unwrap();
    fs::write(&bootstrap, "n,bootstrap_speedup\n2,1.8\n4,3.4\n64,30\n").unwrap();
    let (code, _, stderr) = lvspeed(&["report", "--predicted", &predicted, "--bootstrap", &bootstrap]);
    assert_eq!(code, 3);
    assert!(stderr.contains("n=32") && stderr.contains("n=64"), "{stderr}");
}

#[test]
fn report_with_only_predictions_marks_missing_rows() {
    let dir = TempDir::new().unwrap();
    let predicted = path(dir.path(), "pred.csv");
    fs::write(&predicted, "n,speedup\n2,1.9\n4,3.5\n").unwrap();
    let (code, stdout, stderr) = lvspeed(&["report", "--predicted", &predicted, "--label", "Toy 4"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("Toy 4"));
    assert!(stdout.contains("1.90") && stdout.contains("3.50"));
    assert!(stdout.contains('-'));
}

#[test]
fn parallel_without_readable_baseline_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let missing = path(dir.path(), "missing.csv");
    let (code, _, stderr) =
        lvspeed(&["parallel", "--problem", "costas", "--n", "8", "--workers", "2", "--trials", "2", "--baseline", &missing]);
    assert_eq!(code, 3, "{stderr}");
}

#[test]
fn collect_writes_one_row_per_run_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let first = path(dir.path(), "a.csv");
    let second = path(dir.path(), "b.csv");
    let args = ["collect", "--problem", "all-interval", "--n", "8", "--runs", "5", "--seed", "3"];
    let (code, _, stderr) = lvspeed(&[&args[..], &["-o", &first]].concat());
    assert_eq!(code, 0, "{stderr}");
    let (code, _, stderr) = lvspeed(&[&args[..], &["-o", &second, "--jobs", "3"]].concat());
    assert_eq!(code, 0, "{stderr}");

    let text = fs::read_to_string(&first).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "run_id,seed,problem,n,iterations,wall_time_s,solved");
    assert_eq!(rows.len(), 6);
    // Wall times differ between runs; everything else must not.
    let strip = |t: &str| -> Vec<String> {
        t.lines()
            .skip(1)
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(5);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(strip(&text), strip(&fs::read_to_string(&second).unwrap()));
}

#[test]
fn pipeline_outputs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let runs = write_iterations(dir.path(), "runs.csv", (1..=120u64).map(|i| 50 + (i * 7919) % 1000));
    let run = |tag: &str| -> (String, String, String) {
        let fit = path(dir.path(), &format!("fit{tag}.json"));
        let (code, _, stderr) = lvspeed(&["fit", "-i", &runs, "-o", &fit]);
        assert_eq!(code, 0, "{stderr}");
        let (code, boot, stderr) =
            lvspeed(&["simulate", "-i", &runs, "--cores", "2,4,8", "--resamples", "2000", "--seed", "5"]);
        assert_eq!(code, 0, "{stderr}");
        let (code, pred, stderr) = lvspeed(&["predict", "--fit", &fit, "--cores", "2,4,8", "--force"]);
        assert_eq!(code, 0, "{stderr}");
        (fs::read_to_string(&fit).unwrap(), boot, pred)
    };
    assert_eq!(run("a"), run("b"));
}
