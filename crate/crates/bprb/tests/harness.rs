//! Harness-level behavior: benchmark shapes, report determinism, sweep
//! structure, and labeling contracts.

use bprb::clock::frozen_clock_factory;
use bprb::harness::{
    self, generate_instance, label_dataset, parse_results_csv, run_benchmark, summarize,
    sweep_fixed_portion, write_results_csv, write_summary_csv, ExperimentConfig, Family,
    LabelConfig, Method, Scale,
};
use bprb_core::gcn::{GcnDims, GcnParams};
use bprb_core::oracle;
use bprb_core::search::Budget;

fn tiny_config(family: Family, count: usize, methods: Vec<Method>) -> ExperimentConfig {
    ExperimentConfig {
        family,
        count,
        scale: Scale { n: 9, affinity: 2, bids: Some(12) },
        seed: 11,
        eta: 0.4,
        budget: Budget::default(),
        methods,
    }
}

fn params() -> GcnParams {
    GcnParams::init(GcnDims::with_size(6, 2), 4)
}

#[test]
fn benchmark_produces_row_per_instance_method_pair() {
    let cfg = tiny_config(Family::Vc, 5, vec![Method::BpRb, Method::PbDfs, Method::Rounding]);
    let out = run_benchmark(&cfg, &params(), &frozen_clock_factory).unwrap();
    assert_eq!(out.rows.len(), 15);
    // Tiny VC instances are always solved by the guided methods.
    for row in out.rows.iter().filter(|r| r.method != Method::Rounding) {
        assert!(row.found_feasible, "{} {}", row.instance, row.method);
    }
    // Summary no-feasible column matches the row flags.
    for s in &out.summary {
        let misses =
            out.rows.iter().filter(|r| r.method == s.method && !r.found_feasible).count();
        assert_eq!(s.no_feasible, misses);
        assert_eq!(s.n_instances, 5);
    }
}

#[test]
fn reports_are_byte_identical_under_frozen_clocks() {
    let cfg = tiny_config(Family::Mis, 4, vec![Method::BpRb, Method::Rounding]);
    let a = run_benchmark(&cfg, &params(), &frozen_clock_factory).unwrap();
    let b = run_benchmark(&cfg, &params(), &frozen_clock_factory).unwrap();
    assert_eq!(write_results_csv(&a.rows), write_results_csv(&b.rows));
    assert_eq!(write_summary_csv(&a.summary), write_summary_csv(&b.summary));
}

#[test]
fn summary_is_recomputable_from_result_rows() {
    let cfg = tiny_config(Family::Ca, 4, vec![Method::BpRb, Method::PbDfs]);
    let out = run_benchmark(&cfg, &params(), &frozen_clock_factory).unwrap();
    let csv = write_results_csv(&out.rows);
    let parsed = parse_results_csv(&csv).unwrap();
    assert_eq!(parsed, out.rows);
    assert_eq!(summarize(&parsed), out.summary);
}

#[test]
fn objectives_are_reported_in_original_sense() {
    // MIS objectives must come out as positive set sizes.
    let cfg = tiny_config(Family::Mis, 3, vec![Method::Exact]);
    let out = run_benchmark(&cfg, &params(), &frozen_clock_factory).unwrap();
    for row in &out.rows {
        let obj = row.best_objective.unwrap();
        assert!(obj >= 1.0, "MIS optimum should be positive, got {obj}");
        // Cross-check against brute force on the regenerated instance.
        let inst = generate_instance(
            Family::Mis,
            cfg.scale,
            harness::eval_seed(cfg.seed, row.instance[4..].parse::<u64>().unwrap()),
        )
        .unwrap();
        let brute = oracle::brute_force_optimum(&inst).unwrap();
        assert_eq!(obj, inst.original_sense_objective(brute.objective));
    }
}

#[test]
fn sweep_has_one_block_per_eta_with_monotone_free_vars() {
    let cfg = tiny_config(Family::Ds, 4, vec![Method::BpRb]);
    let etas = [0.2, 0.4, 0.6, 0.8];
    let out = sweep_fixed_portion(&cfg, &etas, &params(), &frozen_clock_factory).unwrap();
    assert_eq!(out.blocks.len(), 4);
    assert_eq!(out.rows.len(), 16);
    for i in 0..4 {
        let frees: Vec<usize> = out
            .rows
            .iter()
            .filter(|r| r.instance.ends_with(&format!("{i:04}")))
            .map(|r| r.free_vars)
            .collect();
        assert_eq!(frees.len(), 4);
        for pair in frees.windows(2) {
            assert!(pair[1] <= pair[0], "free vars must not grow with eta: {frees:?}");
        }
    }
}

#[test]
fn sweep_at_eta_zero_matches_pb_dfs_summary() {
    let cfg = tiny_config(Family::Vc, 4, vec![Method::PbDfs]);
    let bench = run_benchmark(&cfg, &params(), &frozen_clock_factory).unwrap();
    let sweep = sweep_fixed_portion(&cfg, &[0.0], &params(), &frozen_clock_factory).unwrap();
    let pb = &bench.summary[0];
    let block = &sweep.blocks[0];
    assert_eq!(block.best_solution_objective, pb.best_solution_objective);
    assert_eq!(block.no_feasible, pb.no_feasible);
}

#[test]
fn labeling_writes_instances_and_optimal_labels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = LabelConfig {
        family: Family::Vc,
        count: 20,
        scale: Scale { n: 30, affinity: 4, bids: None },
        seed: 5,
        budget_s: 10.0,
        out_dir: dir.path().to_path_buf(),
    };
    let report = label_dataset(&cfg, &bprb::clock::wall_clock_factory).unwrap();
    assert_eq!(report.labeled, 20);
    assert!(report.skipped.is_empty());
    let data = bprb::files::load_labeled_dir(dir.path()).unwrap();
    assert_eq!(data.len(), 20);
    assert!(dir.path().join("manifest.txt").exists());
    // Spot-check one label set against brute force on a small instance.
    let small = LabelConfig {
        family: Family::Vc,
        count: 3,
        scale: Scale { n: 8, affinity: 2, bids: None },
        seed: 9,
        budget_s: 10.0,
        out_dir: dir.path().join("small"),
    };
    label_dataset(&small, &bprb::clock::wall_clock_factory).unwrap();
    for ex in bprb::files::load_labeled_dir(&dir.path().join("small")).unwrap() {
        let best = oracle::brute_force_optimum(&ex.instance).unwrap();
        let label_obj: f64 = ex
            .labels
            .iter()
            .zip(ex.instance.objective())
            .map(|(&y, &c)| if y { c } else { 0.0 })
            .sum();
        assert_eq!(label_obj, best.objective, "labels must come from an optimum");
    }
}

#[test]
fn exhausted_labeling_budget_skips_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = LabelConfig {
        family: Family::Ds,
        count: 3,
        scale: Scale { n: 40, affinity: 4, bids: None },
        seed: 2,
        budget_s: 1e-7,
        out_dir: dir.path().to_path_buf(),
    };
    let err = label_dataset(&cfg, &bprb::clock::wall_clock_factory).unwrap_err();
    assert!(err.to_string().contains("no optimally solved"), "{err}");
    let skip_log = std::fs::read_to_string(dir.path().join("skipped.txt")).unwrap();
    assert_eq!(skip_log.lines().count(), 3);
}

#[test]
fn method_and_family_parsing() {
    assert_eq!("bp-rb".parse::<Method>().unwrap(), Method::BpRb);
    assert_eq!("PB_DFS".parse::<Method>().unwrap(), Method::PbDfs);
    assert!("simplex".parse::<Method>().is_err());
    assert_eq!("CA".parse::<Family>().unwrap(), Family::Ca);
    assert!("tsp".parse::<Family>().is_err());
}

#[test]
fn train_and_eval_streams_do_not_collide() {
    let train: Vec<u64> = (0..50).map(|i| harness::train_seed(3, i)).collect();
    let eval: Vec<u64> = (0..50).map(|i| harness::eval_seed(3, i)).collect();
    for t in &train {
        assert!(!eval.contains(t));
    }
}
