//! End-to-end CLI runs: generate, label, train, solve, sweep, report,
//! convert, all against a temp directory.

use std::path::Path;
use std::process::Command;

fn bprb() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bprb"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("spawn bprb");
    let stdout = String::from_utf8_lossy(&output.stdout).to_string();
    let stderr = String::from_utf8_lossy(&output.stderr).to_string();
    assert!(output.status.success(), "command failed\nstdout:\n{stdout}\nstderr:\n{stderr}");
    stdout
}

#[test]
fn full_pipeline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // Generate evaluation instances.
    let gen_dir = root.join("instances");
    run_ok(bprb().args([
        "generate",
        "--family",
        "vc",
        "--n",
        "12",
        "--count",
        "3",
        "--seed",
        "7",
        "--out",
        gen_dir.to_str().unwrap(),
    ]));
    assert!(gen_dir.join("manifest.txt").exists());
    assert!(gen_dir.join("vc-0000.bpmip").exists());

    // Label a small training set.
    let data_dir = root.join("data");
    run_ok(bprb().args([
        "label",
        "--family",
        "vc",
        "--n",
        "12",
        "--count",
        "8",
        "--seed",
        "7",
        "--budget-s",
        "10",
        "--out",
        data_dir.to_str().unwrap(),
    ]));

    // Train a tiny model.
    let weights = root.join("vc.bpgcn");
    let out = run_ok(bprb().args([
        "train",
        "--data",
        data_dir.to_str().unwrap(),
        "--out",
        weights.to_str().unwrap(),
        "--hidden",
        "6",
        "--layers",
        "2",
        "--epochs",
        "15",
    ]));
    assert!(out.contains("trained on 8 examples"), "{out}");
    assert!(weights.exists());
    assert!(root.join("vc.log.csv").exists());

    // Solve one instance file.
    let out = run_ok(bprb().args([
        "solve",
        "--instance",
        gen_dir.join("vc-0000.bpmip").to_str().unwrap(),
        "--weights",
        weights.to_str().unwrap(),
        "--method",
        "bp_rb,rounding",
        "--budget-s",
        "5",
    ]));
    assert!(out.contains("bp_rb: objective"), "{out}");

    // Batch solve with results on disk.
    let results_dir = root.join("results");
    run_ok(bprb().args([
        "solve",
        "--family",
        "vc",
        "--n",
        "12",
        "--count",
        "3",
        "--seed",
        "7",
        "--method",
        "bp_rb,pb_dfs",
        "--budget-s",
        "5",
        "--weights",
        weights.to_str().unwrap(),
        "--out",
        results_dir.to_str().unwrap(),
    ]));
    let results_csv = results_dir.join("results.csv");
    assert!(results_csv.exists());
    let text = std::fs::read_to_string(&results_csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2, "header plus 6 rows:\n{text}");

    // Report recomputes the summary from the rows.
    let out = run_ok(bprb().args(["report", "--results", results_csv.to_str().unwrap()]));
    assert!(out.starts_with("method,"), "{out}");
    let stored = std::fs::read_to_string(results_dir.join("summary.csv")).unwrap();
    assert_eq!(out, stored);

    // Sweep the fixing fraction.
    let sweep_dir = root.join("sweep");
    run_ok(bprb().args([
        "sweep",
        "--family",
        "vc",
        "--n",
        "12",
        "--count",
        "2",
        "--seed",
        "7",
        "--etas",
        "0.2,0.6",
        "--budget-s",
        "5",
        "--weights",
        weights.to_str().unwrap(),
        "--out",
        sweep_dir.to_str().unwrap(),
    ]));
    let blocks = std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert_eq!(blocks.lines().count(), 3, "{blocks}");

    // Convert to MPS and back.
    let mps = root.join("x.mps");
    let back = root.join("back.bpmip");
    run_ok(bprb().args([
        "convert",
        "--input",
        gen_dir.join("vc-0000.bpmip").to_str().unwrap(),
        "--output",
        mps.to_str().unwrap(),
    ]));
    run_ok(bprb().args([
        "convert",
        "--input",
        mps.to_str().unwrap(),
        "--output",
        back.to_str().unwrap(),
    ]));
    let a = bprb::files::read_instance(&gen_dir.join("vc-0000.bpmip")).unwrap();
    let b = bprb::files::read_instance(&back).unwrap();
    assert_eq!(a.rows(), b.rows());
    assert_eq!(a.objective(), b.objective());
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(&cfg_path, "family=mis\nn=10\ncount=2\nseed=3\n").unwrap();
    let out_dir = dir.path().join("out");
    run_ok(bprb().args([
        "generate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    assert!(out_dir.join("mis-0001.bpmip").exists());

    // CLI flags win over the config file.
    let out_dir2 = dir.path().join("out2");
    run_ok(bprb().args([
        "generate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--count",
        "1",
        "--out",
        out_dir2.to_str().unwrap(),
    ]));
    assert!(out_dir2.join("mis-0000.bpmip").exists());
    assert!(!out_dir2.join("mis-0001.bpmip").exists());
}

#[test]
fn missing_weights_is_a_clear_error() {
    let output = bprb()
        .args(["solve", "--family", "vc", "--n", "10", "--count", "1"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--weights"), "{stderr}");
}

#[test]
fn er_graph_mode_generates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("er");
    run_ok(bprb().args([
        "generate",
        "--family",
        "mis",
        "--n",
        "14",
        "--count",
        "1",
        "--seed",
        "1",
        "--er-p",
        "0.3",
        "--out",
        out.to_str().unwrap(),
    ]));
    let inst = bprb::files::read_instance(&out.join("mis-0000.bpmip")).unwrap();
    assert_eq!(inst.n_vars(), 14);
    assert!(read_manifest(&out).contains("er_p=0.3"));
}

fn read_manifest(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("manifest.txt")).unwrap()
}
