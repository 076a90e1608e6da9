//! Command-line driver: generate benchmark instances, label them with the
//! exact solver, train the predictor, solve batches with any method, sweep
//! fixing fractions, and summarize result files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bprb::clock::wall_clock_factory;
use bprb::config::{resolve, ConfigMap};
use bprb::files;
use bprb::harness::{self, ExperimentConfig, Family, LabelConfig, Method, Scale};
use bprb_core::gcn::TrainConfig;
use bprb_core::gen;
use bprb_core::search::{Budget, DEFAULT_BUDGET_S, DEFAULT_ETA};

#[derive(Parser)]
#[command(name = "bprb", about = "Binary-program reduction and guided branching toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every instance-producing subcommand. Unset flags fall
/// back to the `--config` file (same key names), then to defaults.
#[derive(Args, Clone)]
struct CommonOpts {
    /// Problem family: vc, mis, ds, or ca.
    #[arg(long)]
    family: Option<Family>,
    /// Graph nodes (vc/mis/ds) or auction items (ca).
    #[arg(long)]
    n: Option<usize>,
    /// Number of instances.
    #[arg(long)]
    count: Option<usize>,
    /// Base seed for the instance streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Attachment affinity of the graph generator.
    #[arg(long)]
    affinity: Option<usize>,
    /// Auction bid count (ca only; default 3n/2).
    #[arg(long)]
    bids: Option<usize>,
    /// Key=value config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

struct Common {
    family: Family,
    count: usize,
    scale: Scale,
    seed: u64,
}

impl CommonOpts {
    fn resolve(&self) -> Result<(Common, ConfigMap)> {
        let cfg = match &self.config {
            Some(path) => ConfigMap::load(path)?,
            None => ConfigMap::default(),
        };
        let family = match self.family {
            Some(f) => f,
            None => match cfg.raw("family") {
                Some(raw) => raw.parse()?,
                None => bail!("--family is required (or set family= in the config)"),
            },
        };
        let n = resolve(self.n, cfg.get("n")?, 50);
        let common = Common {
            family,
            count: resolve(self.count, cfg.get("count")?, 10),
            seed: resolve(self.seed, cfg.get("seed")?, 0),
            scale: Scale {
                n,
                affinity: resolve(self.affinity, cfg.get("affinity")?, 4),
                bids: self.bids.or(cfg.get("bids")?),
            },
        };
        Ok((common, cfg))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate instances in the canonical format plus a manifest.
    Generate {
        #[command(flatten)]
        common: CommonOpts,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Use an Erdős–Rényi graph with this edge probability instead of
        /// preferential attachment (vc/mis/ds only).
        #[arg(long)]
        er_p: Option<f64>,
    },
    /// Solve training-stream instances exactly and write labeled pairs.
    Label {
        #[command(flatten)]
        common: CommonOpts,
        /// Per-instance labeling budget in seconds.
        #[arg(long)]
        budget_s: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the predictor on a labeled directory.
    Train {
        /// Directory of .bpmip/.labels pairs.
        #[arg(long)]
        data: PathBuf,
        /// Weight file to write.
        #[arg(long)]
        out: PathBuf,
        /// Training log CSV (default: <out>.log.csv).
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        momentum: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        val_frac: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Solve a batch of held-out instances (or one file) and report.
    Solve {
        #[command(flatten)]
        common: CommonOpts,
        /// Solve this instance file instead of a generated batch.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Fixing fraction for bp_rb.
        #[arg(long)]
        eta: Option<f64>,
        /// Wall-clock budget per solve in seconds.
        #[arg(long)]
        budget_s: Option<f64>,
        /// Node limit per solve.
        #[arg(long)]
        node_limit: Option<u64>,
        /// Comma-separated methods: bp_rb, pb_dfs, rounding, exact.
        #[arg(long)]
        method: Option<String>,
        /// Weight file from `train`.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Output directory for results.csv and summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run bp_rb across a grid of fixing fractions.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated eta grid.
        #[arg(long, default_value = "0.2,0.4,0.6,0.8")]
        etas: String,
        #[arg(long)]
        budget_s: Option<f64>,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Output directory for sweep_rows.csv and sweep.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute and print the summary of a results.csv.
    Report {
        #[arg(long)]
        results: PathBuf,
        /// Optional path for the summary CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert between the canonical format and MPS (by file extension).
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn parse_methods(raw: &str) -> Result<Vec<Method>> {
    raw.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse())
        .collect()
}

fn parse_etas(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad eta {s:?}")))
        .collect()
}

fn load_weights(path: Option<&Path>) -> Result<bprb_core::gcn::GcnParams> {
    match path {
        Some(p) => files::read_weights(p),
        None => bail!("--weights is required for learned methods (train first)"),
    }
}

fn cmd_generate(common: &CommonOpts, out: &Path, er_p: Option<f64>) -> Result<()> {
    let (c, _) = common.resolve()?;
    std::fs::create_dir_all(out)?;
    let mut manifest = format!(
        "family={}\nn={}\ncount={}\nseed={}\naffinity={}\n",
        c.family, c.scale.n, c.count, c.seed, c.scale.affinity
    );
    if let Some(p) = er_p {
        manifest.push_str(&format!("er_p={p}\n"));
    }
    for i in 0..c.count {
        let seed = harness::eval_seed(c.seed, i as u64);
        let name = format!("{}-{i:04}", c.family);
        let inst = match (c.family, er_p) {
            (Family::Ca, _) | (_, None) => harness::generate_instance(c.family, c.scale, seed)?,
            (family, Some(p)) => {
                let g = gen::gen_graph_er(c.scale.n, p, seed)?;
                match family {
                    Family::Vc => gen::gen_vc(&g),
                    Family::Mis => gen::gen_mis(&g),
                    Family::Ds => gen::gen_ds(&g),
                    Family::Ca => unreachable!(),
                }
            }
        };
        let inst = inst.with_name(&name).expect("generated names are valid");
        files::write_instance(&out.join(format!("{name}.{}", files::INSTANCE_EXT)), &inst)?;
        manifest.push_str(&format!("{name} seed={seed}\n"));
    }
    std::fs::write(out.join("manifest.txt"), manifest)?;
    println!("wrote {} {} instances to {}", c.count, c.family, out.display());
    Ok(())
}

fn cmd_label(common: &CommonOpts, budget_s: Option<f64>, out: &Path) -> Result<()> {
    let (c, cfg) = common.resolve()?;
    let budget_s = resolve(budget_s, cfg.get("budget-s")?, 10.0);
    let report = harness::label_dataset(
        &LabelConfig {
            family: c.family,
            count: c.count,
            scale: c.scale,
            seed: c.seed,
            budget_s,
            out_dir: out.to_path_buf(),
        },
        &wall_clock_factory,
    )?;
    println!(
        "labeled {}/{} instances ({} skipped) in {}",
        report.labeled,
        c.count,
        report.skipped.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    data: &Path,
    out: &Path,
    log: Option<&Path>,
    hidden: Option<usize>,
    layers: Option<usize>,
    epochs: Option<usize>,
    lr: Option<f64>,
    momentum: Option<f64>,
    seed: Option<u64>,
    val_frac: Option<f64>,
    config: Option<&Path>,
) -> Result<()> {
    let cfg = match config {
        Some(path) => ConfigMap::load(path)?,
        None => ConfigMap::default(),
    };
    let defaults = TrainConfig::default();
    let train_cfg = TrainConfig {
        hidden: resolve(hidden, cfg.get("hidden")?, defaults.hidden),
        layers: resolve(layers, cfg.get("layers")?, defaults.layers),
        learning_rate: resolve(lr, cfg.get("lr")?, defaults.learning_rate),
        momentum: resolve(momentum, cfg.get("momentum")?, defaults.momentum),
        epochs: resolve(epochs, cfg.get("epochs")?, defaults.epochs),
        seed: resolve(seed, cfg.get("seed")?, defaults.seed),
        val_fraction: resolve(val_frac, cfg.get("val-frac")?, defaults.val_fraction),
        class_weights: None,
    };
    let (outcome, n) = harness::train_from_dir(data, &train_cfg)?;
    files::write_weights(out, &outcome.params)?;
    let log_path = log
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.with_extension("log.csv"));
    std::fs::write(&log_path, harness::write_training_log_csv(&outcome.log))?;
    let last = outcome.log.last().expect("nonempty log");
    println!(
        "trained on {n} examples for {} epochs (best epoch {}); final train loss {:.4}{}",
        train_cfg.epochs,
        outcome.best_epoch,
        last.train_loss,
        match last.val_loss {
            Some(v) => format!(", val loss {v:.4}"),
            None => String::new(),
        }
    );
    println!("weights: {} log: {}", out.display(), log_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    common: &CommonOpts,
    instance: Option<&Path>,
    eta: Option<f64>,
    budget_s: Option<f64>,
    node_limit: Option<u64>,
    method: Option<String>,
    weights: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let cfg = match &common.config {
        Some(path) => ConfigMap::load(path)?,
        None => ConfigMap::default(),
    };
    let eta = resolve(eta, cfg.get("eta")?, DEFAULT_ETA);
    let budget_s = resolve(budget_s, cfg.get("budget-s")?, DEFAULT_BUDGET_S);
    let node_limit = resolve(node_limit, cfg.get("node-limit")?, u64::MAX);
    let budget = Budget::new(budget_s, node_limit, u64::MAX)
        .map_err(|e| anyhow::anyhow!("budget: {e}"))?;
    let methods_raw = method
        .or_else(|| cfg.raw("method").map(str::to_string))
        .unwrap_or_else(|| "bp_rb".to_string());
    let methods = parse_methods(&methods_raw)?;
    let weights = weights.map(Path::to_path_buf).or_else(|| {
        cfg.raw("weights").map(PathBuf::from)
    });
    let params = load_weights(weights.as_deref())?;

    let output = if let Some(path) = instance {
        let inst = files::read_instance(path)?;
        let mut rows = Vec::new();
        for &m in &methods {
            let clock_factory = wall_clock_factory;
            let record = match m {
                Method::BpRb => bprb_core::search::bp_rb(
                    &inst,
                    &params,
                    eta,
                    &budget,
                    clock_factory().as_ref(),
                )?,
                Method::PbDfs => {
                    bprb_core::search::pb_dfs(&inst, &params, &budget, clock_factory().as_ref())?
                }
                Method::Rounding => {
                    let p = bprb_core::gcn::predict(&params, &inst)?;
                    bprb_core::search::rounding_baseline(&inst, &p, clock_factory().as_ref())?
                }
                Method::Exact => {
                    bprb_core::search::exact_bnb(&inst, &budget, clock_factory().as_ref())?.1
                }
            };
            let objective = record
                .incumbent
                .as_ref()
                .map(|inc| inst.original_sense_objective(inc.objective));
            println!(
                "{}: {m}: {} (nodes {}, eta used {})",
                inst.name(),
                match objective {
                    Some(v) => format!("objective {v}"),
                    None => "no feasible solution".to_string(),
                },
                record.nodes_processed,
                record.eta_used
            );
            rows.push(harness::ResultRow {
                instance: inst.name().to_string(),
                method: m,
                found_feasible: objective.is_some(),
                best_objective: objective,
                first_feasible_s: record.first_feasible_time,
                best_solution_s: record.best_solution_time,
                nodes: record.nodes_processed,
                eta_used: record.eta_used,
            });
        }
        harness::BenchmarkOutput { summary: harness::summarize(&rows), rows }
    } else {
        let (c, _) = common.resolve()?;
        let experiment = ExperimentConfig {
            family: c.family,
            count: c.count,
            scale: c.scale,
            seed: c.seed,
            eta,
            budget,
            methods,
        };
        harness::run_benchmark(&experiment, &params, &wall_clock_factory)?
    };

    print!("{}", harness::write_summary_csv(&output.summary));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), harness::write_results_csv(&output.rows))?;
        std::fs::write(dir.join("summary.csv"), harness::write_summary_csv(&output.summary))?;
        println!("wrote {}", dir.join("results.csv").display());
    }
    Ok(())
}

fn cmd_sweep(
    common: &CommonOpts,
    etas: &str,
    budget_s: Option<f64>,
    weights: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let (c, cfg) = common.resolve()?;
    let etas = parse_etas(etas)?;
    let budget_s = resolve(budget_s, cfg.get("budget-s")?, DEFAULT_BUDGET_S);
    let budget =
        Budget::time_limited(budget_s).map_err(|e| anyhow::anyhow!("budget: {e}"))?;
    let weights = weights
        .map(Path::to_path_buf)
        .or_else(|| cfg.raw("weights").map(PathBuf::from));
    let params = load_weights(weights.as_deref())?;
    let experiment = ExperimentConfig {
        family: c.family,
        count: c.count,
        scale: c.scale,
        seed: c.seed,
        eta: DEFAULT_ETA,
        budget,
        methods: vec![Method::BpRb],
    };
    let output = harness::sweep_fixed_portion(&experiment, &etas, &params, &wall_clock_factory)?;
    let (rows_csv, blocks_csv) = harness::write_sweep_csv(&output);
    print!("{blocks_csv}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep_rows.csv"), rows_csv)?;
        std::fs::write(dir.join("sweep.csv"), blocks_csv)?;
        println!("wrote {}", dir.join("sweep.csv").display());
    }
    Ok(())
}

fn cmd_report(results: &Path, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(results)
        .with_context(|| format!("reading {}", results.display()))?;
    let rows = harness::parse_results_csv(&text)?;
    let summary = harness::summarize(&rows);
    let csv = harness::write_summary_csv(&summary);
    print!("{csv}");
    if let Some(path) = out {
        std::fs::write(path, csv)?;
    }
    Ok(())
}

fn cmd_convert(input: &Path, output: &Path) -> Result<()> {
    let inst = files::read_instance(input)?;
    files::write_instance(output, &inst)?;
    println!(
        "converted {} ({} vars, {} rows) -> {}",
        input.display(),
        inst.n_vars(),
        inst.n_cons(),
        output.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { common, out, er_p } => cmd_generate(&common, &out, er_p),
        Command::Label { common, budget_s, out } => cmd_label(&common, budget_s, &out),
        Command::Train {
            data,
            out,
            log,
            hidden,
            layers,
            epochs,
            lr,
            momentum,
            seed,
            val_frac,
            config,
        } => cmd_train(
            &data,
            &out,
            log.as_deref(),
            hidden,
            layers,
            epochs,
            lr,
            momentum,
            seed,
            val_frac,
            config.as_deref(),
        ),
        Command::Solve { common, instance, eta, budget_s, node_limit, method, weights, out } => {
            cmd_solve(
                &common,
                instance.as_deref(),
                eta,
                budget_s,
                node_limit,
                method,
                weights.as_deref(),
                out.as_deref(),
            )
        }
        Command::Sweep { common, etas, budget_s, weights, out } => {
            cmd_sweep(&common, &etas, budget_s, weights.as_deref(), out.as_deref())
        }
        Command::Report { results, out } => cmd_report(&results, out.as_deref()),
        Command::Convert { input, output } => cmd_convert(&input, &output),
    }
}
