//! End-to-end tests of the command-line interface: exit codes, file
//! schemas, determinism, sweep resumability and report aggregation.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn prefbo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prefbo"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn tiny_config(out_dir: &Path) -> String {
    format!(
        r#"
[problem]
name = "dtlz2"
decision_vars = 3
objectives = 2

[preference]
reference_point = [0.4, 0.4]

[run]
method = "multi-gumbel"
seed = 11
initial_size = 6
budget = 12
gp_restarts = 2
n_mc = 100
n_gumbel_fit = 100

[ga]
population = 8
generations = 4

[output]
dir = "{}"
"#,
        out_dir.display()
    )
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// trace.csv with the wall-clock column replaced by a placeholder; physical
/// time is the one column that legitimately differs between identical runs.
fn masked_trace(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let wall_idx = header.split(',').position(|h| h == "wall_clock_s").unwrap();
    let mut out = vec![header];
    for line in lines {
        let mut fields: Vec<String> = line.split(',').map(String::from).collect();
        fields[wall_idx] = "WALL".into();
        out.push(fields.join(","));
    }
    out.join("\n")
}

#[test]
fn run_writes_budget_rows_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let config = write_config(tmp.path(), &tiny_config(&out_a));

    run_ok(prefbo().args(["run", "--config"]).arg(&config).args(["--jobs", "2"]));
    run_ok(prefbo().args(["run", "--config"]).arg(&config).arg("--out").arg(&out_b));

    let trace_a = out_a.join("trace.csv");
    let trace_b = out_b.join("trace.csv");
    assert_eq!(masked_trace(&trace_a), masked_trace(&trace_b));

    let rows = std::fs::read_to_string(&trace_a).unwrap().lines().count() - 1;
    assert_eq!(rows, 12);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["completed"], serde_json::Value::Bool(true));
    assert_eq!(meta["seed"], serde_json::json!(11));
    assert_eq!(meta["preference"]["bounds_source"], serde_json::json!("analytic"));
    assert!(meta["ref_solution"]["asf"].is_f64());
}

#[test]
fn run_seed_override_changes_the_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let config = write_config(tmp.path(), &tiny_config(&out_a));
    run_ok(prefbo().args(["run", "--config"]).arg(&config));
    run_ok(
        prefbo()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--seed", "99"])
            .arg("--out")
            .arg(&out_b),
    );
    assert_ne!(masked_trace(&out_a.join("trace.csv")), masked_trace(&out_b.join("trace.csv")));
}

#[test]
fn run_rejects_budget_not_above_initial() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tiny_config(&tmp.path().join("x")).replace("budget = 12", "budget = 6");
    let config = write_config(tmp.path(), &bad);
    let out = prefbo().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_rejects_unknown_config_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = format!("{}\nmystery_knob = 1\n", tiny_config(&tmp.path().join("x")));
    let config = write_config(tmp.path(), &bad);
    let out = prefbo().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_required_args_use_exit_code_two() {
    let out = prefbo().arg("run").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_creates_all_instances_then_resumes_without_rework() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep_dir = tmp.path().join("sweep");
    let config = write_config(tmp.path(), &tiny_config(&sweep_dir));

    run_ok(prefbo().args(["sweep", "--config"]).arg(&config).args(["--jobs", "2"]));

    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&sweep_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    assert_eq!(dirs.len(), 50, "25 instances x 2 methods");
    let mono_count = dirs.iter().filter(|d| d.to_string_lossy().ends_with("_mono")).count();
    assert_eq!(mono_count, 25);
    for d in &dirs {
        assert!(d.join("trace.csv").exists() && d.join("meta.json").exists());
    }
    assert!(sweep_dir.join("sweep_meta.json").exists());

    // wipe three instances; the rest must not be rewritten on resume
    let kept = dirs[7].join("trace.csv");
    let kept_mtime = std::fs::metadata(&kept).unwrap().modified().unwrap();
    for victim in [&dirs[0], &dirs[13], &dirs[49]] {
        std::fs::remove_dir_all(victim).unwrap();
    }
    let out = run_ok(prefbo().args(["sweep", "--config"]).arg(&config));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("3 ran, 47 skipped"), "stdout: {stdout}");
    for victim in [&dirs[0], &dirs[13], &dirs[49]] {
        assert!(victim.join("trace.csv").exists());
    }
    assert_eq!(std::fs::metadata(&kept).unwrap().modified().unwrap(), kept_mtime);
}

#[test]
fn report_aggregates_with_ordered_percentiles() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep_dir = tmp.path().join("sweep");
    let config = write_config(tmp.path(), &tiny_config(&sweep_dir));
    run_ok(prefbo().args(["sweep", "--config"]).arg(&config).args(["--jobs", "2"]));
    run_ok(prefbo().arg("report").arg(&sweep_dir));

    let summary = sweep_dir.join("summary.csv");
    let mut reader = csv::Reader::from_path(&summary).unwrap();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.unwrap();
        let p16: f64 = record[2].parse().unwrap();
        let med: f64 = record[3].parse().unwrap();
        let p84: f64 = record[4].parse().unwrap();
        assert!(p16 <= med && med <= p84, "percentiles out of order: {record:?}");
        rows += 1;
    }
    assert_eq!(rows, 12 * 2, "budget x methods");

    // final points parse and respect the two-objective schema
    let mut reader = csv::Reader::from_path(sweep_dir.join("final_points.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        vec!["method", "instance", "ref_1", "ref_2", "f_1", "f_2"]
    );
    let n_points = reader.records().filter_map(|r| r.ok()).count();
    assert!(n_points >= 50, "at least one nondominated point per instance");

    // every emitted trace round-trips through a CSV parser
    for entry in std::fs::read_dir(&sweep_dir).unwrap().filter_map(|e| e.ok()) {
        let trace = entry.path().join("trace.csv");
        if trace.exists() {
            let mut r = csv::Reader::from_path(&trace).unwrap();
            assert_eq!(r.records().filter_map(|x| x.ok()).count(), 12);
        }
    }

    // report is idempotent byte-for-byte
    let summary_before = std::fs::read(&summary).unwrap();
    run_ok(prefbo().arg("report").arg(&sweep_dir));
    assert_eq!(summary_before, std::fs::read(&summary).unwrap());
}

#[test]
fn report_single_instance_equals_that_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep_dir = tmp.path().join("sweep");
    let inst = sweep_dir.join("inst_00_mono");
    let config = write_config(
        tmp.path(),
        &tiny_config(&inst).replace("multi-gumbel", "mono"),
    );
    run_ok(prefbo().args(["run", "--config"]).arg(&config));
    run_ok(prefbo().arg("report").arg(&sweep_dir));

    let mut trace_reader = csv::Reader::from_path(inst.join("trace.csv")).unwrap();
    let header = trace_reader.headers().unwrap().clone();
    let dist_col = header.iter().position(|h| h == "min_asf_distance_so_far").unwrap();
    let dists: Vec<f64> = trace_reader
        .records()
        .map(|r| r.unwrap()[dist_col].parse().unwrap())
        .collect();

    let mut summary_reader = csv::Reader::from_path(sweep_dir.join("summary.csv")).unwrap();
    for (record, expected) in summary_reader.records().zip(&dists) {
        let record = record.unwrap();
        for col in 2..=4 {
            let v: f64 = record[col].parse().unwrap();
            assert!((v - expected).abs() < 1e-12, "degenerate percentile mismatch");
        }
    }
}

#[test]
fn report_without_instances_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = prefbo().arg("report").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn refsol_prints_the_nearest_front_point() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"
[problem]
name = "dtlz2"
decision_vars = 5
objectives = 2

[preference]
reference_point = [0.5, 0.5]

[run]
method = "mono"
seed = 1

[output]
dir = "unused"
"#,
    );
    let out = run_ok(prefbo().args(["refsol", "--config"]).arg(&config));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let diag = 0.707_106_78f64;
    for value in stdout
        .lines()
        .find(|l| l.contains("objectives"))
        .unwrap()
        .split(['[', ']', ','])
        .filter_map(|s| s.trim().parse::<f64>().ok())
    {
        assert!((value - diag).abs() < 1e-3, "objective {value} != {diag}");
    }
    // with weights 1/(2-0), g* = (sqrt(2)/2 - 0.5)/2
    let asf_line = stdout.lines().find(|l| l.contains("asf:")).unwrap();
    let g: f64 = asf_line.rsplit(' ').next().unwrap().trim().parse().unwrap();
    assert!((g - 0.103_553_39).abs() < 1e-3, "g* = {g}");
}

#[test]
fn refsol_unsupported_problem_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        &tiny_config(&tmp.path().join("x")).replace("dtlz2", "zdt1"),
    );
    let out = prefbo().args(["refsol", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("front sampler"));
}
