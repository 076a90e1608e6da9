//! End-to-end experiment driver: seeded instance streams, exact labeling,
//! training, batch solving with every method, fixing-fraction sweeps, and
//! the summary statistics the reports are built from.
//!
//! Training instances come from the seed stream `derive_seed(seed, i)` and
//! evaluation instances from `derive_seed(seed, EVAL_STREAM + i)`, so
//! evaluation sets never overlap the labeled data for a given base seed.
//! Everything except wall-clock timing columns is deterministic in the
//! seeds; tests freeze the clock to get byte-identical outputs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

use bprb_core::gcn::{self, GcnParams, LabeledExample};
use bprb_core::gen;
use bprb_core::mip::MipInstance;
use bprb_core::rng;
use bprb_core::search::{
    bp_rb, exact_bnb, pb_dfs, rounding_baseline, Budget, ExactStatus, SearchRecord,
};
use bprb_core::stats::shifted_geomean;

use crate::clock::ClockFactory;
use crate::files;

/// Offset separating the evaluation seed stream from the training stream.
const EVAL_STREAM: u64 = 1 << 32;

pub fn train_seed(base: u64, index: u64) -> u64 {
    rng::derive_seed(base, index)
}

pub fn eval_seed(base: u64, index: u64) -> u64 {
    rng::derive_seed(base, EVAL_STREAM + index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Vc,
    Mis,
    Ds,
    Ca,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Vc, Family::Mis, Family::Ds, Family::Ca];

    pub fn name(self) -> &'static str {
        match self {
            Family::Vc => "vc",
            Family::Mis => "mis",
            Family::Ds => "ds",
            Family::Ca => "ca",
        }
    }
}

impl FromStr for Family {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vc" => Ok(Family::Vc),
            "mis" => Ok(Family::Mis),
            "ds" => Ok(Family::Ds),
            "ca" => Ok(Family::Ca),
            other => bail!("unknown family {other:?} (expected vc, mis, ds, or ca)"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BpRb,
    PbDfs,
    Rounding,
    Exact,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::BpRb => "bp_rb",
            Method::PbDfs => "pb_dfs",
            Method::Rounding => "rounding",
            Method::Exact => "exact",
        }
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bp_rb" | "bprb" => Ok(Method::BpRb),
            "pb_dfs" | "pbdfs" => Ok(Method::PbDfs),
            "rounding" => Ok(Method::Rounding),
            "exact" => Ok(Method::Exact),
            other => bail!("unknown method {other:?} (expected bp_rb, pb_dfs, rounding, exact)"),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Instance scale: graph node count for VC/MIS/DS (with the attachment
/// affinity), item count plus bid count for CA.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub n: usize,
    pub affinity: usize,
    pub bids: Option<usize>,
}

impl Scale {
    pub fn nodes(n: usize) -> Self {
        Self { n, affinity: 4, bids: None }
    }

    pub fn auction(items: usize, bids: usize) -> Self {
        Self { n: items, affinity: 4, bids: Some(bids) }
    }

    fn bid_count(&self) -> usize {
        // Default bid count keeps the vars:rows character of the auction
        // family at roughly 3 bids per 2 items.
        self.bids.unwrap_or(self.n.saturating_mul(3).div_ceil(2).max(1))
    }
}

/// Deterministically generate one instance of a family at a scale.
pub fn generate_instance(family: Family, scale: Scale, seed: u64) -> Result<MipInstance> {
    let inst = match family {
        Family::Vc => gen::gen_vc(&gen::gen_graph(scale.n, scale.affinity, seed)?),
        Family::Mis => gen::gen_mis(&gen::gen_graph(scale.n, scale.affinity, seed)?),
        Family::Ds => gen::gen_ds(&gen::gen_graph(scale.n, scale.affinity, seed)?),
        Family::Ca => gen::gen_ca(scale.n, scale.bid_count(), seed)?,
    };
    Ok(inst)
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: Family,
    pub count: usize,
    pub scale: Scale,
    pub seed: u64,
    pub eta: f64,
    pub budget: Budget,
    pub methods: Vec<Method>,
}

/// One solve outcome; `best_objective` is in the family's original sense
/// and present iff a feasible solution was found.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub method: Method,
    pub best_objective: Option<f64>,
    pub first_feasible_s: Option<f64>,
    pub best_solution_s: Option<f64>,
    pub found_feasible: bool,
    pub nodes: u64,
    pub eta_used: f64,
}

impl ResultRow {
    fn from_record(instance: String, method: Method, inst: &MipInstance, rec: &SearchRecord) -> Self {
        let best_objective = rec
            .incumbent
            .as_ref()
            .map(|inc| inst.original_sense_objective(inc.objective));
        Self {
            instance,
            method,
            found_feasible: best_objective.is_some(),
            best_objective,
            first_feasible_s: rec.first_feasible_time,
            best_solution_s: rec.best_solution_time,
            nodes: rec.nodes_processed,
            eta_used: rec.eta_used,
        }
    }
}

/// Aggregates over the rows of one method: shifted geometric means over the
/// instances where a feasible solution was found, plus the no-feasible
/// count.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub n_instances: usize,
    pub no_feasible: usize,
    pub best_solution_objective: Option<f64>,
    pub best_solution_time: Option<f64>,
    pub first_feasible_time: Option<f64>,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut methods: Vec<Method> = Vec::new();
    for row in rows {
        if !methods.contains(&row.method) {
            methods.push(row.method);
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let of_method: Vec<&ResultRow> = rows.iter().filter(|r| r.method == method).collect();
            let objectives: Vec<f64> =
                of_method.iter().filter_map(|r| r.best_objective).collect();
            let best_times: Vec<f64> =
                of_method.iter().filter_map(|r| r.best_solution_s).collect();
            let first_times: Vec<f64> =
                of_method.iter().filter_map(|r| r.first_feasible_s).collect();
            let sgm = |values: &[f64]| shifted_geomean(values, 1.0).ok();
            SummaryRow {
                method,
                n_instances: of_method.len(),
                no_feasible: of_method.iter().filter(|r| !r.found_feasible).count(),
                best_solution_objective: sgm(&objectives),
                best_solution_time: sgm(&best_times),
                first_feasible_time: sgm(&first_times),
            }
        })
        .collect()
}

fn solve_one(
    inst: &MipInstance,
    method: Method,
    params: &GcnParams,
    eta: f64,
    budget: &Budget,
    clocks: ClockFactory,
) -> Result<SearchRecord> {
    let clock = clocks();
    let record = match method {
        Method::BpRb => bp_rb(inst, params, eta, budget, clock.as_ref())?,
        Method::PbDfs => pb_dfs(inst, params, budget, clock.as_ref())?,
        Method::Rounding => {
            let p = gcn::predict(params, inst)
                .map_err(bprb_core::search::SearchError::Predictor)?;
            rounding_baseline(inst, &p, clock.as_ref())?
        }
        Method::Exact => exact_bnb(inst, budget, clock.as_ref())?.1,
    };
    Ok(record)
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

/// Solve `count` held-out instances with every configured method. Row order
/// is (instance, method), independent of timing.
pub fn run_benchmark(
    cfg: &ExperimentConfig,
    params: &GcnParams,
    clocks: ClockFactory,
) -> Result<BenchmarkOutput> {
    let mut rows = Vec::with_capacity(cfg.count * cfg.methods.len());
    for i in 0..cfg.count {
        let seed = eval_seed(cfg.seed, i as u64);
        let inst = generate_instance(cfg.family, cfg.scale, seed)?
            .with_name(&format!("{}-{i:04}", cfg.family))
            .expect("generated names are valid");
        for &method in &cfg.methods {
            let record = solve_one(&inst, method, params, cfg.eta, &cfg.budget, clocks)
                .with_context(|| format!("solving {} with {method}", inst.name()))?;
            rows.push(ResultRow::from_record(inst.name().to_string(), method, &inst, &record));
        }
    }
    let summary = summarize(&rows);
    Ok(BenchmarkOutput { rows, summary })
}

/// One sweep observation: the reduction footprint at the grid eta plus the
/// solve metrics of `bp_rb` started at that eta.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub instance: String,
    pub eta: f64,
    /// Free variables left by the reduction at exactly this eta; 0 when the
    /// fixing conflicts (no feasible completion).
    pub free_vars: usize,
    pub found_feasible: bool,
    pub best_objective: Option<f64>,
    pub first_feasible_s: Option<f64>,
    pub best_solution_s: Option<f64>,
    pub eta_used: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    pub eta: f64,
    pub mean_free_vars: f64,
    pub no_feasible: usize,
    pub best_solution_objective: Option<f64>,
    pub first_feasible_time: Option<f64>,
    pub best_solution_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub blocks: Vec<SweepBlock>,
}

/// Table-style sweep over fixing fractions (default grid 0.2/0.4/0.6/0.8).
pub fn sweep_fixed_portion(
    cfg: &ExperimentConfig,
    etas: &[f64],
    params: &GcnParams,
    clocks: ClockFactory,
) -> Result<SweepOutput> {
    use bprb_core::reduction::{reduce_to_fixpoint, select_fix_set, ReductionOutcome};

    let mut rows = Vec::with_capacity(cfg.count * etas.len());
    for i in 0..cfg.count {
        let seed = eval_seed(cfg.seed, i as u64);
        let inst = generate_instance(cfg.family, cfg.scale, seed)?
            .with_name(&format!("{}-{i:04}", cfg.family))
            .expect("generated names are valid");
        let p = gcn::predict(params, &inst)?;
        for &eta in etas {
            let fixes = select_fix_set(&p, eta)?;
            let free_vars = match reduce_to_fixpoint(&inst, &fixes)? {
                ReductionOutcome::Reduced(red) => red.n_free(),
                ReductionOutcome::Conflict { .. } => 0,
            };
            let record = solve_one(&inst, Method::BpRb, params, eta, &cfg.budget, clocks)?;
            rows.push(SweepRow {
                instance: inst.name().to_string(),
                eta,
                free_vars,
                found_feasible: record.incumbent.is_some(),
                best_objective: record
                    .incumbent
                    .as_ref()
                    .map(|inc| inst.original_sense_objective(inc.objective)),
                first_feasible_s: record.first_feasible_time,
                best_solution_s: record.best_solution_time,
                eta_used: record.eta_used,
            });
        }
    }

    let blocks = etas
        .iter()
        .map(|&eta| {
            let of_eta: Vec<&SweepRow> =
                rows.iter().filter(|r| (r.eta - eta).abs() < 1e-12).collect();
            let sgm = |values: Vec<f64>| shifted_geomean(&values, 1.0).ok();
            SweepBlock {
                eta,
                mean_free_vars: of_eta.iter().map(|r| r.free_vars as f64).sum::<f64>()
                    / of_eta.len().max(1) as f64,
                no_feasible: of_eta.iter().filter(|r| !r.found_feasible).count(),
                best_solution_objective: sgm(of_eta
                    .iter()
                    .filter_map(|r| r.best_objective)
                    .collect()),
                first_feasible_time: sgm(of_eta
                    .iter()
                    .filter_map(|r| r.first_feasible_s)
                    .collect()),
                best_solution_time: sgm(of_eta
                    .iter()
                    .filter_map(|r| r.best_solution_s)
                    .collect()),
            }
        })
        .collect();
    Ok(SweepOutput { rows, blocks })
}

#[derive(Debug, Clone)]
pub struct LabelConfig {
    pub family: Family,
    pub count: usize,
    pub scale: Scale,
    pub seed: u64,
    /// Per-instance labeling budget in seconds.
    pub budget_s: f64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct LabelReport {
    pub labeled: usize,
    pub skipped: Vec<String>,
}

/// Solve training-stream instances exactly and write instance/label pairs;
/// instances not proved optimal within the budget are skipped and logged.
pub fn label_dataset(cfg: &LabelConfig, clocks: ClockFactory) -> Result<LabelReport> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let budget = Budget::time_limited(cfg.budget_s)
        .map_err(|e| anyhow::anyhow!("labeling budget: {e}"))?;
    let mut labeled = 0usize;
    let mut skipped = Vec::new();
    let mut manifest = String::new();
    for i in 0..cfg.count {
        let seed = train_seed(cfg.seed, i as u64);
        let name = format!("{}_{i:05}", cfg.family);
        let inst = generate_instance(cfg.family, cfg.scale, seed)?
            .with_name(&name)
            .expect("generated names are valid");
        let clock = clocks();
        let (status, record) = exact_bnb(&inst, &budget, clock.as_ref())
            .map_err(|e| anyhow::anyhow!("labeling {name}: {e}"))?;
        match (status, record.incumbent) {
            (ExactStatus::Optimal, Some(inc)) => {
                let labels: Vec<bool> =
                    (0..inst.n_vars()).map(|j| inc.assignment.get(j) == Some(true)).collect();
                files::write_instance(
                    &cfg.out_dir.join(format!("{name}.{}", files::INSTANCE_EXT)),
                    &inst,
                )?;
                files::write_labels(
                    &cfg.out_dir.join(format!("{name}.{}", files::LABEL_EXT)),
                    &labels,
                )?;
                manifest.push_str(&format!("{name} seed={seed}\n"));
                labeled += 1;
            }
            _ => skipped.push(name),
        }
    }
    if !skipped.is_empty() {
        std::fs::write(cfg.out_dir.join("skipped.txt"), skipped.join("\n") + "\n")?;
    }
    if labeled == 0 {
        bail!("labeling produced no optimally solved instances");
    }
    std::fs::write(
        cfg.out_dir.join("manifest.txt"),
        format!(
            "family={}\nn={}\ncount={}\nseed={}\n{manifest}",
            cfg.family, cfg.scale.n, cfg.count, cfg.seed
        ),
    )?;
    Ok(LabelReport { labeled, skipped })
}

/// Train on a labeled directory and return the outcome along with the
/// dataset size.
pub fn train_from_dir(dir: &Path, cfg: &gcn::TrainConfig) -> Result<(gcn::TrainOutcome, usize)> {
    let dataset: Vec<LabeledExample> = files::load_labeled_dir(dir)?;
    let n = dataset.len();
    let outcome = gcn::train(&dataset, cfg).map_err(|e| anyhow::anyhow!("training: {e}"))?;
    Ok((outcome, n))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(
        "instance,method,best_objective,first_feasible_s,best_solution_s,found_feasible,nodes,eta_used\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.instance,
            r.method,
            fmt_opt(r.best_objective),
            fmt_opt(r.first_feasible_s),
            fmt_opt(r.best_solution_s),
            r.found_feasible,
            r.nodes,
            r.eta_used
        ));
    }
    out
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    let header = lines.next().context("empty results file")?;
    if !header.starts_with("instance,method,") {
        bail!("unrecognized results header: {header:?}");
    }
    let parse_opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            Ok(Some(s.parse::<f64>()?))
        }
    };
    let mut rows = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            bail!("results line {}: expected 8 fields, got {}", no + 2, fields.len());
        }
        rows.push(ResultRow {
            instance: fields[0].to_string(),
            method: fields[1].parse()?,
            best_objective: parse_opt(fields[2])?,
            first_feasible_s: parse_opt(fields[3])?,
            best_solution_s: parse_opt(fields[4])?,
            found_feasible: fields[5].parse()?,
            nodes: fields[6].parse()?,
            eta_used: fields[7].parse()?,
        });
    }
    Ok(rows)
}

pub fn write_summary_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from(
        "method,n_instances,no_feasible,best_solution_objective,best_solution_time,first_feasible_time\n",
    );
    for s in summary {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.method,
            s.n_instances,
            s.no_feasible,
            fmt_opt(s.best_solution_objective),
            fmt_opt(s.best_solution_time),
            fmt_opt(s.first_feasible_time)
        ));
    }
    out
}

pub fn write_sweep_csv(output: &SweepOutput) -> (String, String) {
    let mut rows = String::from(
        "instance,eta,free_vars,found_feasible,best_objective,first_feasible_s,best_solution_s,eta_used\n",
    );
    for r in &output.rows {
        rows.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.instance,
            r.eta,
            r.free_vars,
            r.found_feasible,
            fmt_opt(r.best_objective),
            fmt_opt(r.first_feasible_s),
            fmt_opt(r.best_solution_s),
            r.eta_used
        ));
    }
    let mut blocks = String::from(
        "eta,mean_free_vars,no_feasible,best_solution_objective,first_feasible_time,best_solution_time\n",
    );
    for b in &output.blocks {
        blocks.push_str(&format!(
            "{},{},{},{},{},{}\n",
            b.eta,
            b.mean_free_vars,
            b.no_feasible,
            fmt_opt(b.best_solution_objective),
            fmt_opt(b.first_feasible_time),
            fmt_opt(b.best_solution_time)
        ));
    }
    (rows, blocks)
}

pub fn write_training_log_csv(log: &[gcn::EpochStats]) -> String {
    let mut out = String::from("epoch,train_loss,val_loss,val_accuracy\n");
    for s in log {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.epoch,
            s.train_loss,
            fmt_opt(s.val_loss),
            fmt_opt(s.val_accuracy)
        ));
    }
    out
}
