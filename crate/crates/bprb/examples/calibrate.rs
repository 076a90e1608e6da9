// Scratch calibration runs; not part of the deliverable checks.

use std::time::Instant;

use bprb::clock::WallClock;
use bprb::harness::{generate_instance, Family, Scale};
use bprb_core::gcn::{self, LabeledExample, TrainConfig};
use bprb_core::search::{bp_rb, exact_bnb, Budget, ExactStatus};

fn time_exact(family: Family, scale: Scale, seeds: u64, budget_s: f64) {
    let budget = Budget::time_limited(budget_s).unwrap();
    let mut proved = 0;
    let mut total_s = 0.0;
    let mut max_s: f64 = 0.0;
    let mut nodes_total = 0u64;
    for i in 0..seeds {
        let inst = generate_instance(family, scale, bprb::harness::train_seed(7, i)).unwrap();
        let t0 = Instant::now();
        let (status, rec) = exact_bnb(&inst, &budget, &WallClock::start()).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        total_s += dt;
        max_s = max_s.max(dt);
        nodes_total += rec.nodes_processed;
        if status == ExactStatus::Optimal {
            proved += 1;
        }
    }
    println!(
        "exact {family:?} n={} bids={:?}: proved {proved}/{seeds}, mean {:.3}s max {:.3}s, mean nodes {}",
        scale.n,
        scale.bids,
        total_s / seeds as f64,
        max_s,
        nodes_total / seeds
    );
}

fn train_quality(family: Family, scale: Scale, train_n: usize, val_n: usize, cfg: &TrainConfig) {
    let label_budget = Budget::time_limited(10.0).unwrap();
    let t0 = Instant::now();
    let mut data = Vec::new();
    for i in 0..(train_n + val_n) {
        let inst = generate_instance(family, scale, bprb::harness::train_seed(3, i as u64)).unwrap();
        let (status, rec) = exact_bnb(&inst, &label_budget, &WallClock::start()).unwrap();
        if status != ExactStatus::Optimal {
            continue;
        }
        let inc = rec.incumbent.unwrap();
        let labels: Vec<bool> =
            (0..inst.n_vars()).map(|j| inc.assignment.get(j) == Some(true)).collect();
        data.push(LabeledExample::new(inst, labels).unwrap());
    }
    let label_s = t0.elapsed().as_secs_f64();
    let ones: usize = data
        .iter()
        .map(|ex| ex.labels.iter().filter(|&&b| b).count())
        .sum();
    let total: usize = data.iter().map(|ex| ex.labels.len()).sum();
    let majority = (ones as f64 / total as f64).max(1.0 - ones as f64 / total as f64);
    let t1 = Instant::now();
    let out = gcn::train(&data, cfg).unwrap();
    let train_s = t1.elapsed().as_secs_f64();
    let first = &out.log[0];
    let last = out.log.last().unwrap();
    let best = &out.log[out.best_epoch];
    println!(
        "train {family:?} n={}: {} examples labeled in {label_s:.1}s, trained {} epochs in {train_s:.1}s",
        scale.n,
        data.len(),
        cfg.epochs
    );
    println!(
        "  label-1 rate {:.3} majority {majority:.3}; epoch0 val {:.4} final val {:.4} (ratio {:.3}) best-epoch val {:.4} acc {:.3}",
        ones as f64 / total as f64,
        first.val_loss.unwrap(),
        last.val_loss.unwrap(),
        last.val_loss.unwrap() / first.val_loss.unwrap(),
        best.val_loss.unwrap(),
        best.val_accuracy.unwrap(),
    );
    // How does bp_rb do with these weights at eval scale?
    let eval_scale = match family {
        Family::Ca => Scale::auction(100, 150),
        _ => Scale::nodes(200),
    };
    let budget = Budget::time_limited(5.0).unwrap();
    let mut feasible = 0;
    let t2 = Instant::now();
    for i in 0..10u64 {
        let inst =
            generate_instance(family, eval_scale, bprb::harness::eval_seed(3, i)).unwrap();
        let rec = bp_rb(&inst, &out.params, 0.4, &budget, &WallClock::start()).unwrap();
        if rec.incumbent.is_some() {
            feasible += 1;
        }
    }
    println!("  bp_rb eta 0.4 on 10 eval instances: {feasible}/10 feasible, {:.2}s total", t2.elapsed().as_secs_f64());
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "exact".into());
    match which.as_str() {
        "exact" => {
            for family in [Family::Vc, Family::Mis, Family::Ds] {
                time_exact(family, Scale::nodes(50), 8, 10.0);
            }
            time_exact(Family::Ca, Scale::auction(25, 40), 8, 10.0);
        }
        "exact100" => {
            for family in [Family::Vc, Family::Mis, Family::Ds] {
                time_exact(family, Scale::nodes(100), 6, 20.0);
            }
            time_exact(Family::Ca, Scale::auction(67, 100), 6, 20.0);
        }
        "train" => {
            let lr: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(1e-2);
            let epochs: usize =
                std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(80);
            let hidden: usize =
                std::env::args().nth(4).map(|s| s.parse().unwrap()).unwrap_or(16);
            let layers: usize = std::env::args().nth(5).map(|s| s.parse().unwrap()).unwrap_or(4);
            let cfg = TrainConfig {
                learning_rate: lr,
                epochs,
                hidden,
                layers,
                val_fraction: 0.2,
                ..TrainConfig::default()
            };
            train_quality(Family::Vc, Scale::nodes(50), 200, 50, &cfg);
        }
        "trainall" => {
            let lr: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(0.1);
            let epochs: usize =
                std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(150);
            let cfg = TrainConfig {
                learning_rate: lr,
                epochs,
                val_fraction: 0.2,
                ..TrainConfig::default()
            };
            train_quality(Family::Mis, Scale::nodes(50), 120, 30, &cfg);
            train_quality(Family::Ds, Scale::nodes(50), 120, 30, &cfg);
            train_quality(Family::Ca, Scale::auction(25, 40), 120, 30, &cfg);
        }
        "gap" => {
            let cfg = TrainConfig { epochs: 150, val_fraction: 0.2, ..TrainConfig::default() };
            for family in [Family::Vc, Family::Mis, Family::Ds, Family::Ca] {
                gap_check(family, &cfg);
            }
        }
        "gapw" => {
            // Class-weighted runs for the imbalanced families.
            let w1: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(4.0);
            let epochs: usize =
                std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(200);
            let cfg = TrainConfig {
                epochs,
                val_fraction: 0.2,
                class_weights: Some((1.0, w1)),
                ..TrainConfig::default()
            };
            gap_check(Family::Ca, &cfg);
        }
        "gapvc" => {
            let epochs: usize =
                std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(200);
            let cfg = TrainConfig { epochs, val_fraction: 0.2, ..TrainConfig::default() };
            gap_check(Family::Vc, &cfg);
            gap_check(Family::Mis, &cfg);
        }
        "vcdiag" => {
            let cfg = TrainConfig { epochs: 300, val_fraction: 0.2, ..TrainConfig::default() };
            diag(Family::Vc, Scale::nodes(50), Scale::nodes(100), &cfg);
            diag(Family::Mis, Scale::nodes(50), Scale::nodes(100), &cfg);
        }
        "grid" => {
            // family w0 w1 epochs hidden
            let family: Family = std::env::args().nth(2).unwrap().parse().unwrap();
            let w0: f64 = std::env::args().nth(3).unwrap().parse().unwrap();
            let w1: f64 = std::env::args().nth(4).unwrap().parse().unwrap();
            let epochs: usize = std::env::args().nth(5).unwrap().parse().unwrap();
            let hidden: usize = std::env::args().nth(6).unwrap().parse().unwrap();
            let cfg = TrainConfig {
                epochs,
                hidden,
                val_fraction: 0.2,
                class_weights: if w0 == 1.0 && w1 == 1.0 { None } else { Some((w0, w1)) },
                ..TrainConfig::default()
            };
            let (train_scale, eval_scale) = match family {
                Family::Ca => (Scale::auction(33, 50), Scale::auction(67, 100)),
                _ => (Scale::nodes(50), Scale::nodes(100)),
            };
            println!("grid {family:?} w0={w0} w1={w1} epochs={epochs} h={hidden}");
            diag(family, train_scale, eval_scale, &cfg);
        }
        "cadiag" => {
            let w1: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(16.0);
            let epochs: usize =
                std::env::args().nth(3).map(|s| s.parse().unwrap()).unwrap_or(400);
            let hidden: usize =
                std::env::args().nth(4).map(|s| s.parse().unwrap()).unwrap_or(24);
            let cfg = TrainConfig {
                epochs,
                hidden,
                val_fraction: 0.2,
                class_weights: Some((1.0, w1)),
                ..TrainConfig::default()
            };
            diag(Family::Ca, Scale::auction(33, 50), Scale::auction(67, 100), &cfg);
        }
        other => eprintln!("unknown mode {other}"),
    }
}

fn diag(family: Family, train_scale: Scale, eval_scale: Scale, cfg: &TrainConfig) {
    let label_budget = Budget::time_limited(10.0).unwrap();
    let mut data = Vec::new();
    for i in 0..150u64 {
        let inst = generate_instance(family, train_scale, bprb::harness::train_seed(3, i)).unwrap();
        let (status, rec) = exact_bnb(&inst, &label_budget, &WallClock::start()).unwrap();
        if status != ExactStatus::Optimal {
            continue;
        }
        let inc = rec.incumbent.unwrap();
        let labels: Vec<bool> =
            (0..inst.n_vars()).map(|j| inc.assignment.get(j) == Some(true)).collect();
        data.push(LabeledExample::new(inst, labels).unwrap());
    }
    let out = gcn::train(&data, cfg).unwrap();
    let best = &out.log[out.best_epoch];
    println!(
        "{family:?} train: val {:.4} acc {:.3} (best epoch {})",
        best.val_loss.unwrap(),
        best.val_accuracy.unwrap(),
        out.best_epoch
    );
    let exact_budget = Budget::time_limited(30.0).unwrap();
    let solve_budget = Budget::time_limited(5.0).unwrap();
    for i in 0..10u64 {
        let inst = generate_instance(family, eval_scale, bprb::harness::eval_seed(3, i)).unwrap();
        let rec = bp_rb(&inst, &out.params, 0.4, &solve_budget, &WallClock::start()).unwrap();
        let bp = rec.incumbent.as_ref().map(|x| inst.original_sense_objective(x.objective));
        let first_node = rec.trace.first().and_then(|e| e.objective);
        let (status, erec) = exact_bnb(&inst, &exact_budget, &WallClock::start()).unwrap();
        let opt = match (status, erec.incumbent) {
            (ExactStatus::Optimal, Some(inc)) => {
                Some(inst.original_sense_objective(inc.objective))
            }
            _ => None,
        };
        println!(
            "  i={i}: bp_rb {:?} (predicted-dive {:?}), opt {:?}, free {:?}",
            bp,
            first_node.map(|v| inst.original_sense_objective(v)),
            opt,
            rec.reduction.map(|s| s.free_vars)
        );
    }
}

fn gap_check(family: Family, cfg: &TrainConfig) {
    use bprb_core::gcn::predict;
    use bprb_core::search::rounding_baseline;

    let (train_scale, count) = match family {
        Family::Ca => (Scale::auction(25, 40), 150),
        _ => (Scale::nodes(50), 150),
    };
    let label_budget = Budget::time_limited(10.0).unwrap();
    let mut data = Vec::new();
    for i in 0..count {
        let inst = generate_instance(family, train_scale, bprb::harness::train_seed(3, i as u64))
            .unwrap();
        let (status, rec) = exact_bnb(&inst, &label_budget, &WallClock::start()).unwrap();
        if status != ExactStatus::Optimal {
            continue;
        }
        let inc = rec.incumbent.unwrap();
        let labels: Vec<bool> =
            (0..inst.n_vars()).map(|j| inc.assignment.get(j) == Some(true)).collect();
        data.push(LabeledExample::new(inst, labels).unwrap());
    }
    let out = gcn::train(&data, cfg).unwrap();

    let eval_scale = match family {
        Family::Ca => Scale::auction(67, 100),
        _ => Scale::nodes(100),
    };
    let exact_budget = Budget::time_limited(20.0).unwrap();
    let solve_budget = Budget::time_limited(5.0).unwrap();
    let mut gaps = Vec::new();
    let mut bp_objs = Vec::new();
    let mut round_objs = Vec::new();
    for i in 0..10u64 {
        let inst = generate_instance(family, eval_scale, bprb::harness::eval_seed(3, i)).unwrap();
        let rec = bp_rb(&inst, &out.params, 0.4, &solve_budget, &WallClock::start()).unwrap();
        let bp_obj = rec.incumbent.as_ref().map(|x| inst.original_sense_objective(x.objective));
        if let Some(v) = bp_obj {
            bp_objs.push(v);
        }
        let p = predict(&out.params, &inst).unwrap();
        let r = rounding_baseline(&inst, &p, &WallClock::start()).unwrap();
        if let Some(inc) = r.incumbent {
            round_objs.push(inst.original_sense_objective(inc.objective));
        }
        let (status, erec) = exact_bnb(&inst, &exact_budget, &WallClock::start()).unwrap();
        if status == ExactStatus::Optimal {
            let opt = inst.original_sense_objective(erec.incumbent.unwrap().objective);
            if let Some(v) = bp_obj {
                let gap = (v - opt).abs() / opt.abs().max(1e-9);
                gaps.push(gap);
            }
        }
    }
    let sgm = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            bprb_core::stats::shifted_geomean(v, 1.0).unwrap()
        }
    };
    println!(
        "{family:?}: proved {}/10, mean gap {:.3}; bp_rb sgm {:.1} ({} feas), rounding sgm {:.1} ({} feas)",
        gaps.len(),
        gaps.iter().sum::<f64>() / gaps.len().max(1) as f64,
        sgm(&bp_objs),
        bp_objs.len(),
        sgm(&round_objs),
        round_objs.len()
    );
}
