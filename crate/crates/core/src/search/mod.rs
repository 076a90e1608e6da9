//! Prediction-guided search and the exact branch-and-bound oracle.
//!
//! The guided methods share one engine: sort variables by prediction
//! certainty `z_i = max(p_i, 1 - p_i)`, lay out the node list of a
//! single-branch tree (node `n+1` is the fully predicted assignment, node
//! `j ≤ n` flips the j-th most certain variable after fixing the more
//! certain prefix to its predictions), and complete each node by diving:
//! fixing free variables to their predicted values in certainty order with
//! logical propagation after every fix, flipping a variable once when its
//! predicted value conflicts. Nodes are explored deepest-first (`n+1`, `n`,
//! …, `1`) so the assignments contradicting the fewest confident
//! predictions are tried first.
//!
//! `bp_rb` adds the reduction stage in front: predict, greedily fix the top
//! `eta` fraction, reduce to a fixpoint (halving `eta` up to three times on
//! a conflict, then falling back to 0), re-predict on the reduced
//! sub-instance, and run the guided search there, mapping incumbents back
//! through the reduction. `pb_dfs` is the single-prediction, no-reduction
//! baseline; `rounding_baseline` just evaluates the rounded prediction.

mod exact;
mod propagate;

pub use exact::{exact_bnb, ExactStatus};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::gcn::{predict, GcnError, GcnParams, ProbabilityVector};
use crate::mip::{evaluate, Assignment, EvalError, MipInstance};
use crate::reduction::{
    reduce_to_fixpoint, select_fix_set, ReductionError, ReductionOutcome, ReductionStats,
};
use propagate::Propagator;

/// Default fraction of variables fixed greedily by `bp_rb`.
pub const DEFAULT_ETA: f64 = 0.4;
/// Default wall-clock budget in seconds.
pub const DEFAULT_BUDGET_S: f64 = 50.0;
/// Conflict retries before falling back to `eta = 0`.
const CONFLICT_RETRIES: usize = 3;

/// Monotonic elapsed-seconds source. The core is `no_std`, so wall clocks
/// are injected by the caller; tests drive searches with manual clocks.
pub trait Stopwatch {
    fn elapsed_s(&self) -> f64;
}

/// A stopwatch frozen at zero; useful when no budget applies.
pub struct NullClock;

impl Stopwatch for NullClock {
    fn elapsed_s(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchError {
    NonBinaryVariable(usize),
    InvalidEta(f64),
    InvalidBudget(String),
    Predictor(GcnError),
    Reduction(ReductionError),
    Eval(EvalError),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::NonBinaryVariable(var) => {
                write!(f, "variable {var} is not binary; search needs a fully binary instance")
            }
            SearchError::InvalidEta(eta) => write!(f, "eta {eta} not in [0, 1)"),
            SearchError::InvalidBudget(msg) => write!(f, "invalid budget: {msg}"),
            SearchError::Predictor(e) => write!(f, "predictor: {e}"),
            SearchError::Reduction(e) => write!(f, "reduction: {e}"),
            SearchError::Eval(e) => write!(f, "evaluation: {e}"),
        }
    }
}

impl core::error::Error for SearchError {}

impl From<GcnError> for SearchError {
    fn from(e: GcnError) -> Self {
        SearchError::Predictor(e)
    }
}

impl From<ReductionError> for SearchError {
    fn from(e: ReductionError) -> Self {
        SearchError::Reduction(e)
    }
}

impl From<EvalError> for SearchError {
    fn from(e: EvalError) -> Self {
        SearchError::Eval(e)
    }
}

/// Wall-clock, node, and per-node dive limits for one solve run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub time_limit_s: f64,
    pub node_limit: u64,
    pub dive_limit: u64,
}

impl Budget {
    pub fn time_limited(time_limit_s: f64) -> Result<Self, SearchError> {
        Self::new(time_limit_s, u64::MAX, u64::MAX)
    }

    pub fn new(time_limit_s: f64, node_limit: u64, dive_limit: u64) -> Result<Self, SearchError> {
        if !(time_limit_s > 0.0) {
            return Err(SearchError::InvalidBudget(alloc::format!(
                "time limit {time_limit_s} must be positive"
            )));
        }
        if node_limit == 0 || dive_limit == 0 {
            return Err(SearchError::InvalidBudget("node and dive limits must be positive".into()));
        }
        Ok(Self { time_limit_s, node_limit, dive_limit })
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self { time_limit_s: DEFAULT_BUDGET_S, node_limit: u64::MAX, dive_limit: u64::MAX }
    }
}

/// Certainty scores and the branching order they induce: `z` descending,
/// ties by ascending variable index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub z: Vec<f64>,
    pub order: Vec<usize>,
}

pub fn compute_scores(p: &ProbabilityVector) -> ScoreVector {
    let z: Vec<f64> = p.as_slice().iter().map(|&v| v.max(1.0 - v)).collect();
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
    ScoreVector { z, order }
}

/// One node of the single-branch tree over `n` variables. Depth `j` in
/// `1..=n` fixes the `j-1` most certain variables to their predictions and
/// flips the j-th; depth `n+1` is the fully predicted assignment; depth 0 is
/// the structural root (nothing fixed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BnbNode {
    pub depth: usize,
}

/// Exploration order for the guided depth-first search: the fully predicted
/// node first, then flips deepest-first.
pub fn generate_tree(scores: &ScoreVector) -> Vec<usize> {
    (1..=scores.order.len() + 1).rev().collect()
}

/// Feasible incumbent in parent index space; `objective` is the internal
/// minimization value including any offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub assignment: Assignment,
    pub objective: f64,
}

/// Per-node outcome: the internal objective of the completed dive, or
/// `None` when the node yielded nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub node: usize,
    pub objective: Option<f64>,
}

/// Everything a solve run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRecord {
    pub incumbent: Option<Incumbent>,
    pub nodes_processed: u64,
    pub first_feasible_time: Option<f64>,
    pub best_solution_time: Option<f64>,
    /// Fixing fraction actually used after conflict retries.
    pub eta_used: f64,
    pub reduction: Option<ReductionStats>,
    pub trace: Vec<TraceEntry>,
}

impl SearchRecord {
    fn new() -> Self {
        Self {
            incumbent: None,
            nodes_processed: 0,
            first_feasible_time: None,
            best_solution_time: None,
            eta_used: 0.0,
            reduction: None,
            trace: Vec::new(),
        }
    }

    /// Record a feasible solution; returns true when it became the
    /// incumbent (strict improvement).
    fn offer(&mut self, assignment: Assignment, objective: f64, now: f64) -> bool {
        if self.first_feasible_time.is_none() {
            self.first_feasible_time = Some(now);
        }
        let better = self.incumbent.as_ref().map_or(true, |inc| objective < inc.objective);
        if better {
            self.incumbent = Some(Incumbent { assignment, objective });
            self.best_solution_time = Some(now);
        }
        better
    }
}

/// Complete one tree node by diving: apply the node's prefix (predicted
/// values, with the node variable flipped), then fix the remaining free
/// variables one at a time in certainty order, propagating after every fix
/// and flipping the current variable once if its predicted value conflicts.
/// Returns a total assignment or `None` when the node is exhausted.
pub fn dive_complete(
    inst: &MipInstance,
    node: BnbNode,
    scores: &ScoreVector,
    p: &ProbabilityVector,
    dive_limit: u64,
) -> Option<Assignment> {
    let n = inst.n_vars();
    debug_assert_eq!(scores.order.len(), n);
    debug_assert!(node.depth <= n + 1);
    let predicted = |var: usize| p.get(var) >= 0.5;

    let mut prop = Propagator::new(inst);
    prop.initial_propagate().ok()?;

    if (1..=n).contains(&node.depth) {
        for t in 0..node.depth - 1 {
            let var = scores.order[t];
            if prop.fix(var, predicted(var)).is_err() {
                return None;
            }
        }
        let flip_var = scores.order[node.depth - 1];
        if prop.fix(flip_var, !predicted(flip_var)).is_err() {
            return None;
        }
    }

    let mut steps = 0u64;
    for &var in &scores.order {
        if prop.value(var).is_some() {
            continue;
        }
        steps += 1;
        if steps > dive_limit {
            return None;
        }
        let mark = prop.mark();
        if prop.fix(var, predicted(var)).is_err() {
            prop.undo_to(mark);
            if prop.fix(var, !predicted(var)).is_err() {
                return None;
            }
        }
    }
    debug_assert_eq!(prop.n_fixed(), n);
    Some(prop.assignment())
}

/// Shared guided-DFS driver: walk the node list, dive each node, lift the
/// completion into parent space, and keep the best (strictly improving)
/// incumbent. Budget checks happen at node boundaries.
fn run_guided_dfs(
    parent: &MipInstance,
    local: &MipInstance,
    p: &ProbabilityVector,
    lift: &dyn Fn(&Assignment) -> Assignment,
    budget: &Budget,
    clock: &dyn Stopwatch,
    record: &mut SearchRecord,
) -> Result<(), SearchError> {
    let scores = compute_scores(p);
    for node in generate_tree(&scores) {
        if clock.elapsed_s() >= budget.time_limit_s || record.nodes_processed >= budget.node_limit {
            break;
        }
        record.nodes_processed += 1;
        let completed = dive_complete(local, BnbNode { depth: node }, &scores, p, budget.dive_limit);
        let objective = match completed {
            Some(local_assignment) => {
                let lifted = lift(&local_assignment);
                let eval = evaluate(parent, &lifted)?;
                debug_assert!(eval.feasible, "dive produced an infeasible completion");
                if eval.feasible {
                    record.offer(lifted, eval.objective, clock.elapsed_s());
                    Some(eval.objective)
                } else {
                    None
                }
            }
            None => None,
        };
        record.trace.push(TraceEntry { node, objective });
    }
    Ok(())
}

/// The full reduce-then-branch pipeline.
///
/// Predict on the parent, fix the `eta` most certain fraction, reduce to a
/// fixpoint (on a conflict retry with `eta/2`, up to three times, then
/// `eta = 0`), predict again on the reduced sub-instance, and run the
/// guided depth-first search over it. When the reduction changes nothing
/// the first prediction is reused, which makes `eta = 0` coincide with
/// `pb_dfs` on instances whose rows neither force nor fall redundant.
pub fn bp_rb(
    inst: &MipInstance,
    params: &GcnParams,
    eta: f64,
    budget: &Budget,
    clock: &dyn Stopwatch,
) -> Result<SearchRecord, SearchError> {
    if let Some(var) = inst.first_non_binary() {
        return Err(SearchError::NonBinaryVariable(var));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(SearchError::InvalidEta(eta));
    }
    let mut record = SearchRecord::new();
    let first = predict(params, inst)?;

    let mut eta_used = eta;
    let mut attempt = 0usize;
    let reduced = loop {
        let fixes = select_fix_set(&first, eta_used)?;
        match reduce_to_fixpoint(inst, &fixes)? {
            ReductionOutcome::Reduced(red) => break Some(red),
            ReductionOutcome::Conflict { .. } => {
                if eta_used == 0.0 {
                    // Even the empty fixing conflicts: the instance itself
                    // is infeasible by propagation.
                    break None;
                }
                attempt += 1;
                eta_used = if attempt > CONFLICT_RETRIES { 0.0 } else { eta_used / 2.0 };
            }
        }
    };
    record.eta_used = eta_used;
    let red = match reduced {
        Some(red) => red,
        None => return Ok(record),
    };
    record.reduction = Some(red.stats());

    let unchanged = red.fixed.is_empty() && red.removed_rows.is_empty();
    let second = if unchanged { first } else { predict(params, &red.sub)? };
    run_guided_dfs(inst, &red.sub, &second, &|a| red.lift(a), budget, clock, &mut record)?;
    Ok(record)
}

/// Single-prediction guided DFS over the full instance: the same tree and
/// dive machinery as `bp_rb`, with no reduction stage.
pub fn pb_dfs(
    inst: &MipInstance,
    params: &GcnParams,
    budget: &Budget,
    clock: &dyn Stopwatch,
) -> Result<SearchRecord, SearchError> {
    if let Some(var) = inst.first_non_binary() {
        return Err(SearchError::NonBinaryVariable(var));
    }
    let mut record = SearchRecord::new();
    let p = predict(params, inst)?;
    run_guided_dfs(inst, inst, &p, &|a| a.clone(), budget, clock, &mut record)?;
    Ok(record)
}

/// Evaluate the single rounded prediction; an incumbent only if feasible.
pub fn rounding_baseline(
    inst: &MipInstance,
    p: &ProbabilityVector,
    clock: &dyn Stopwatch,
) -> Result<SearchRecord, SearchError> {
    if let Some(var) = inst.first_non_binary() {
        return Err(SearchError::NonBinaryVariable(var));
    }
    let mut record = SearchRecord::new();
    let rounded = p.round();
    let eval = evaluate(inst, &rounded)?;
    if eval.feasible {
        record.offer(rounded, eval.objective, clock.elapsed_s());
    }
    Ok(record)
}
