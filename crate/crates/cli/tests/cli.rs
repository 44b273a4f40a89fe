use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpsim")).args(args).output().expect("binary runs")
}

fn repo(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(path)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn cz_benchmark_runs_and_metrics_reads_its_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cal = repo("data/table2.csv");
    let o = hpsim(&["cz-benchmark", "--calibration", cal.to_str().unwrap(), "--shots", "500", "--seed", "3", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = dir.path().join("cz_benchmark.csv");
    assert!(String::from_utf8_lossy(&o.stdout).contains("cz_benchmark.csv"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("# shots: 500") && text.contains("# seed: 3"));

    let m = hpsim(&["metrics", "--input", csv.to_str().unwrap(), "--reference", "P_ideal", "--compare", "P_noisy"]);
    assert!(m.status.success(), "{}", stderr(&m));
    let stdout = String::from_utf8(m.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("mean_abs_difference,M"));
    let (v, count) = lines.next().unwrap().split_once(',').unwrap();
    assert_eq!(count, "7");
    let v: f64 = v.parse().unwrap();
    assert!(v > 0.0 && v < 1.0);
}

#[test]
fn metrics_groups_by_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kind = \"dho\"\nn_qubits = 3\ntime_points = 5\n");
    let out = dir.path().join("o");
    let o = hpsim(&["dho", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = out.join("dho_N3.csv");
    let m = hpsim(&["metrics", "--input", csv.to_str().unwrap(), "--reference", "P_c", "--compare", "P_q", "--group-by", "n"]);
    assert!(m.status.success(), "{}", stderr(&m));
    let stdout = String::from_utf8(m.stdout).unwrap();
    let keys: Vec<&str> = stdout.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(keys, ["0", "1", "2"]);
}

#[test]
fn plot_script_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = hpsim(&["plot-script", "--config", repo("configs/jc_trotter.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let script = std::fs::read_to_string(dir.path().join("plot.gp")).unwrap();
    assert!(script.contains("jc_trotter_K1.csv"));
}

#[test]
fn kind_mismatch_is_a_config_error() {
    let o = hpsim(&["dho", "--config", repo("configs/jc_trotter.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("jc-trotter"));
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kind = \"dho\"\n\nshots = -4\n");
    let o = hpsim(&["dho", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_calibration_file_is_a_config_error() {
    let o = hpsim(&["jc-trotter", "--calibration", "/nonexistent/cal.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(hpsim(&["dho", "--shoots", "5"]).status.code(), Some(1));
    assert_eq!(hpsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_beyond_calibration_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("kind = \"dho\"\ncalibration = \"{}\"\nn_qubits = 16\n", repo("data/table1.csv").display()),
    );
    let o = hpsim(&["dho", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = hpsim(&["cz-benchmark", "--shots", "10", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
