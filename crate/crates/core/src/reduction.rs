//! Prediction-guided problem reduction: greedily fix the most certain
//! variables, fold them into the rows, drop rows no free assignment can
//! violate, and propagate single-row logical fixings to a fixpoint.
//!
//! The transformation is sound: the feasible completions of the initial
//! fixes in the parent are exactly the fixed values crossed with the
//! feasible set of the reduced sub-instance, with objectives matching up to
//! the recorded offset. When no completion exists the outcome is an explicit
//! `Conflict` carrying a violated-row witness; deciding what to do about a
//! conflict (the search retries with a smaller fixing fraction) is the
//! caller's business.
//!
//! Logical fixes are collected row by row and applied in batches between
//! sweeps, so the outcome does not depend on row order; a batch that forces
//! one variable both ways is itself a conflict proof.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fx;
use crate::gcn::ProbabilityVector;
use crate::mip::{Assignment, MipInstance, Row, FEAS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixSource {
    Greedy,
    LogicalZero,
    LogicalOne,
}

/// Partial map from variable index to a fixed 0/1 value with its origin.
/// A variable can never hold two different values; attempting that is an
/// error at the call site, not a representable state.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSet {
    slots: Vec<Option<(bool, FixSource)>>,
    count: usize,
}

impl FixedSet {
    pub fn empty(n_vars: usize) -> Self {
        Self { slots: alloc::vec![None; n_vars], count: 0 }
    }

    pub fn n_vars(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn get(&self, var: usize) -> Option<bool> {
        self.slots[var].map(|(v, _)| v)
    }

    pub fn source(&self, var: usize) -> Option<FixSource> {
        self.slots[var].map(|(_, s)| s)
    }

    /// Insert a fix; panics on a contradictory re-fix, which callers must
    /// rule out beforehand.
    pub fn insert(&mut self, var: usize, value: bool, source: FixSource) {
        match self.slots[var] {
            None => {
                self.slots[var] = Some((value, source));
                self.count += 1;
            }
            Some((old, _)) => {
                assert_eq!(old, value, "contradictory fix for variable {var}");
            }
        }
    }

    /// `(var, value, source)` in ascending variable order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, bool, FixSource)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(v, s)| s.map(|(value, source)| (v, value, source)))
    }

    pub fn count_by_source(&self, source: FixSource) -> usize {
        self.iter().filter(|&(_, _, s)| s == source).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReductionError {
    InvalidEta(f64),
    NonBinaryVariable(usize),
    IndexOutOfRange { var: usize, n_vars: usize },
    LengthMismatch { left: usize, right: usize },
}

impl fmt::Display for ReductionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionError::InvalidEta(eta) => write!(f, "eta {eta} not in [0, 1)"),
            ReductionError::NonBinaryVariable(var) => {
                write!(f, "variable {var} is not binary; reduction needs a fully binary instance")
            }
            ReductionError::IndexOutOfRange { var, n_vars } => {
                write!(f, "fixed variable {var} out of range (n_vars = {n_vars})")
            }
            ReductionError::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
        }
    }
}

impl core::error::Error for ReductionError {}

/// Greedy fixing: rank variables by certainty `z_i = max(p_i, 1 - p_i)`
/// (ties by ascending index) and fix the top `floor(eta * n)` to their
/// rounded prediction (1 iff `p_i >= 0.5`).
pub fn select_fix_set(p: &ProbabilityVector, eta: f64) -> Result<FixedSet, ReductionError> {
    if !(0.0..1.0).contains(&eta) {
        return Err(ReductionError::InvalidEta(eta));
    }
    let n = p.len();
    let k = fx::floor(eta * n as f64) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let za = p.get(a).max(1.0 - p.get(a));
        let zb = p.get(b).max(1.0 - p.get(b));
        zb.total_cmp(&za).then(a.cmp(&b))
    });
    let mut fixes = FixedSet::empty(n);
    for &var in order.iter().take(k) {
        fixes.insert(var, p.get(var) >= 0.5, FixSource::Greedy);
    }
    Ok(fixes)
}

/// A row with the fixed contributions folded into the rhs; coefficients
/// range over free variables in parent index space.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedRow {
    pub parent_row: usize,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

fn fold_row(row: &Row, parent_row: usize, fixes: &FixedSet) -> FoldedRow {
    let mut coeffs = Vec::with_capacity(row.coeffs.len());
    let mut rhs = row.rhs;
    for &(var, coef) in &row.coeffs {
        match fixes.get(var) {
            Some(true) => rhs -= coef,
            Some(false) => {}
            None => coeffs.push((var, coef)),
        }
    }
    FoldedRow { parent_row, coeffs, rhs }
}

/// Fold every row of the instance and compute the fixed objective
/// contribution `Σ c_j x̂_j`.
pub fn apply_fixing(inst: &MipInstance, fixes: &FixedSet) -> (Vec<FoldedRow>, f64) {
    let folded = inst
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| fold_row(row, i, fixes))
        .collect();
    let offset = fixes
        .iter()
        .map(|(var, value, _)| if value { inst.objective()[var] } else { 0.0 })
        .sum();
    (folded, offset)
}

/// A folded row is redundant when even the worst free assignment satisfies
/// it: `Σ max(a, 0) ≤ rhs`.
pub fn detect_redundant(row: &FoldedRow) -> bool {
    let worst: f64 = row.coeffs.iter().map(|&(_, a)| a.max(0.0)).sum();
    worst <= row.rhs + FEAS_TOL
}

/// Single-row forcings: a positive-coefficient variable is forced to 0 when
/// setting it to 1 overshoots the rhs even with every other free variable at
/// its row-friendliest value; a negative-coefficient variable is forced to 1
/// when leaving it at 0 cannot reach the rhs. Returns `(var, value)` pairs
/// in ascending variable order.
pub fn logical_fix(row: &FoldedRow) -> Vec<(usize, bool)> {
    let neg_sum: f64 = row.coeffs.iter().map(|&(_, a)| a.min(0.0)).sum();
    let mut forced = Vec::new();
    for &(var, coef) in &row.coeffs {
        if coef > 0.0 {
            if coef + neg_sum > row.rhs + FEAS_TOL {
                forced.push((var, false));
            }
        } else if neg_sum - coef > row.rhs + FEAS_TOL {
            forced.push((var, true));
        }
    }
    forced
}

/// Sub-instance after reduction, with everything needed to map solutions
/// back to the parent.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub sub: MipInstance,
    pub fixed: FixedSet,
    /// Parent indices of rows removed as redundant.
    pub removed_rows: Vec<usize>,
    /// Parent indices of surviving rows, in sub row order.
    pub kept_rows: Vec<usize>,
    /// `Σ c_j x̂_j` over the fixed variables; parent objective = sub
    /// objective + this.
    pub objective_offset: f64,
    sub_to_parent: Vec<usize>,
    parent_to_sub: Vec<Option<usize>>,
}

impl ReducedInstance {
    pub fn n_free(&self) -> usize {
        self.sub_to_parent.len()
    }

    pub fn sub_to_parent(&self, sub_var: usize) -> usize {
        self.sub_to_parent[sub_var]
    }

    pub fn parent_to_sub(&self, parent_var: usize) -> Option<usize> {
        self.parent_to_sub[parent_var]
    }

    /// Combine a total sub-assignment with the fixed values into a total
    /// parent assignment.
    pub fn lift(&self, sub_assignment: &Assignment) -> Assignment {
        let mut out = Assignment::empty(self.parent_to_sub.len());
        for (var, value, _) in self.fixed.iter() {
            out.set(var, value);
        }
        for (sub_var, &parent_var) in self.sub_to_parent.iter().enumerate() {
            if let Some(v) = sub_assignment.get(sub_var) {
                out.set(parent_var, v);
            }
        }
        out
    }

    pub fn stats(&self) -> ReductionStats {
        ReductionStats {
            greedy_fixes: self.fixed.count_by_source(FixSource::Greedy),
            logical_fixes: self.fixed.count_by_source(FixSource::LogicalZero)
                + self.fixed.count_by_source(FixSource::LogicalOne),
            removed_rows: self.removed_rows.len(),
            free_vars: self.n_free(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReductionStats {
    pub greedy_fixes: usize,
    pub logical_fixes: usize,
    pub removed_rows: usize,
    pub free_vars: usize,
}

/// Either a reduced sub-instance or a proof that the initial fixes admit no
/// feasible completion.
#[derive(Debug, Clone)]
pub enum ReductionOutcome {
    Reduced(ReducedInstance),
    Conflict { row: usize, explanation: String },
}

impl ReductionOutcome {
    pub fn is_conflict(&self) -> bool {
        matches!(self, ReductionOutcome::Conflict { .. })
    }
}

/// Iterate folding, redundant-row removal, and logical fixing until nothing
/// changes. Sweeps scan rows in ascending order; fixes collected in a sweep
/// are applied together afterwards. Terminates within `n_vars + 1`
/// productive sweeps.
pub fn reduce_to_fixpoint(
    inst: &MipInstance,
    initial: &FixedSet,
) -> Result<ReductionOutcome, ReductionError> {
    if let Some(var) = inst.first_non_binary() {
        return Err(ReductionError::NonBinaryVariable(var));
    }
    if initial.n_vars() != inst.n_vars() {
        return Err(ReductionError::LengthMismatch {
            left: initial.n_vars(),
            right: inst.n_vars(),
        });
    }
    let n_vars = inst.n_vars();
    let mut fixes = initial.clone();
    let mut removed = alloc::vec![false; inst.n_cons()];
    let mut removed_rows: Vec<usize> = Vec::new();

    // forced_by[var] remembers the row that forced a value within a sweep
    // so contradictions can name both witnesses.
    let mut forced_by: Vec<Option<(bool, usize)>> = alloc::vec![None; n_vars];

    let mut sweeps = 0usize;
    loop {
        sweeps += 1;
        assert!(
            sweeps <= n_vars + 2,
            "reduction failed to reach a fixpoint within {} sweeps",
            n_vars + 2
        );
        let mut new_fixes: Vec<(usize, bool, usize)> = Vec::new();
        let mut newly_removed: Vec<usize> = Vec::new();
        for (i, row) in inst.rows().iter().enumerate() {
            if removed[i] {
                continue;
            }
            let folded = fold_row(row, i, &fixes);
            if folded.coeffs.is_empty() {
                if folded.rhs < -FEAS_TOL {
                    return Ok(ReductionOutcome::Conflict {
                        row: i,
                        explanation: format!(
                            "row {i} has no free support and residual rhs {} < 0",
                            folded.rhs
                        ),
                    });
                }
                newly_removed.push(i);
                continue;
            }
            if detect_redundant(&folded) {
                newly_removed.push(i);
                continue;
            }
            for (var, value) in logical_fix(&folded) {
                new_fixes.push((var, value, i));
            }
        }

        if new_fixes.is_empty() && newly_removed.is_empty() {
            break;
        }
        for i in newly_removed {
            removed[i] = true;
            removed_rows.push(i);
        }
        for &(var, value, row) in &new_fixes {
            match forced_by[var] {
                None => forced_by[var] = Some((value, row)),
                Some((prev, prev_row)) => {
                    if prev != value {
                        let (zero_row, one_row) =
                            if prev { (row, prev_row) } else { (prev_row, row) };
                        return Ok(ReductionOutcome::Conflict {
                            row,
                            explanation: format!(
                                "variable {var} forced to 0 by row {zero_row} and to 1 by row {one_row}"
                            ),
                        });
                    }
                }
            }
        }
        for (var, value, _) in new_fixes {
            if fixes.get(var).is_none() {
                let source = if value { FixSource::LogicalOne } else { FixSource::LogicalZero };
                fixes.insert(var, value, source);
            }
        }
    }

    // Assemble the sub-instance over the surviving free variables.
    let mut sub_to_parent = Vec::with_capacity(n_vars - fixes.len());
    let mut parent_to_sub = alloc::vec![None; n_vars];
    for var in 0..n_vars {
        if fixes.get(var).is_none() {
            parent_to_sub[var] = Some(sub_to_parent.len());
            sub_to_parent.push(var);
        }
    }
    let sub_objective: Vec<f64> = sub_to_parent.iter().map(|&v| inst.objective()[v]).collect();
    let mut kept_rows = Vec::new();
    let mut sub_rows = Vec::new();
    for (i, row) in inst.rows().iter().enumerate() {
        if removed[i] {
            continue;
        }
        let folded = fold_row(row, i, &fixes);
        kept_rows.push(i);
        sub_rows.push(Row::new(
            folded
                .coeffs
                .iter()
                .map(|&(v, a)| (parent_to_sub[v].expect("free var has a sub index"), a))
                .collect(),
            folded.rhs,
        ));
    }
    let sub = MipInstance::with_parts(
        inst.name(),
        sub_objective,
        inst.objective_offset(),
        sub_rows,
        alloc::vec![crate::mip::VarKind::Binary; sub_to_parent.len()],
        inst.maximize_input(),
    )
    .expect("reduced instance is structurally valid");
    let objective_offset: f64 = fixes
        .iter()
        .map(|(var, value, _)| if value { inst.objective()[var] } else { 0.0 })
        .sum();
    Ok(ReductionOutcome::Reduced(ReducedInstance {
        sub,
        fixed: fixes,
        removed_rows,
        kept_rows,
        objective_offset,
        sub_to_parent,
        parent_to_sub,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::MipInstance;
    use crate::oracle;
    use crate::rng::{self, Rng};

    fn prob(p: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(p.to_vec())
    }

    #[test]
    fn select_fix_set_eta_zero_is_empty() {
        let fixes = select_fix_set(&prob(&[0.9, 0.1]), 0.0).unwrap();
        assert!(fixes.is_empty());
    }

    #[test]
    fn select_fix_set_takes_most_certain() {
        // z = (0.9, 0.8, 0.55), k = floor(3 * 0.34) = 1.
        let fixes = select_fix_set(&prob(&[0.9, 0.2, 0.55]), 0.34).unwrap();
        assert_eq!(fixes.len(), 1);
        assert_eq!(fixes.get(0), Some(true));
        assert_eq!(fixes.source(0), Some(FixSource::Greedy));
    }

    #[test]
    fn select_fix_set_breaks_ties_by_index_and_rounds_up() {
        let fixes = select_fix_set(&prob(&[0.5, 0.5]), 0.5).unwrap();
        assert_eq!(fixes.len(), 1);
        assert_eq!(fixes.get(0), Some(true));
        assert_eq!(fixes.get(1), None);
    }

    #[test]
    fn select_fix_set_rejects_bad_eta() {
        assert!(select_fix_set(&prob(&[0.5]), 1.0).is_err());
        assert!(select_fix_set(&prob(&[0.5]), -0.1).is_err());
    }

    #[test]
    fn apply_fixing_folds_rhs_and_offset() {
        let inst = MipInstance::binary(
            "f",
            alloc::vec![3.0, 1.0],
            alloc::vec![Row::new(alloc::vec![(0, 1.0), (1, 1.0)], 1.0)],
        )
        .unwrap();
        let mut fixes = FixedSet::empty(2);
        fixes.insert(0, true, FixSource::Greedy);
        let (folded, offset) = apply_fixing(&inst, &fixes);
        assert_eq!(folded[0].coeffs, alloc::vec![(1, 1.0)]);
        assert_eq!(folded[0].rhs, 0.0);
        assert_eq!(offset, 3.0);

        let (unchanged, zero) = apply_fixing(&inst, &FixedSet::empty(2));
        assert_eq!(unchanged[0].coeffs, inst.rows()[0].coeffs);
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn apply_fixing_preserves_completions_by_enumeration() {
        let mut r = rng::from_seed(17);
        for _ in 0..30 {
            let n = r.gen_range(3..=10);
            let rows = r.gen_range(1..=6);
            let inst = oracle::random_binary_instance(&mut r, "af", n, rows, 3);
            let mut fixes = FixedSet::empty(n);
            let mut fix_list = Vec::new();
            for var in 0..n {
                if r.gen_bool(0.3) {
                    let value = r.gen_bool(0.5);
                    fixes.insert(var, value, FixSource::Greedy);
                    fix_list.push((var, value));
                }
            }
            let (folded, _) = apply_fixing(&inst, &fixes);
            // A completion satisfies the parent rows iff the free part
            // satisfies every folded row.
            for (bits, _) in oracle::feasible_completions(&inst, &fix_list) {
                for row in &folded {
                    let lhs: f64 = row
                        .coeffs
                        .iter()
                        .map(|&(v, a)| a * ((bits >> v) & 1) as f64)
                        .sum();
                    assert!(lhs <= row.rhs + FEAS_TOL);
                }
            }
        }
    }

    #[test]
    fn detect_redundant_examples() {
        let slack = FoldedRow { parent_row: 0, coeffs: alloc::vec![(1, 1.0)], rhs: 2.0 };
        assert!(detect_redundant(&slack));
        let nonpos = FoldedRow { parent_row: 0, coeffs: alloc::vec![(1, -1.0)], rhs: 0.0 };
        assert!(detect_redundant(&nonpos));
        let tight = FoldedRow {
            parent_row: 0,
            coeffs: alloc::vec![(1, 1.0), (2, 1.0)],
            rhs: 1.0,
        };
        assert!(!detect_redundant(&tight));
    }

    #[test]
    fn logical_fix_examples() {
        // 2x0 + x1 - x2 <= 0 forces x0 = 0 and nothing else.
        let row = FoldedRow {
            parent_row: 0,
            coeffs: alloc::vec![(0, 2.0), (1, 1.0), (2, -1.0)],
            rhs: 0.0,
        };
        assert_eq!(logical_fix(&row), alloc::vec![(0, false)]);

        // -2x0 + x1 <= -2 forces x0 = 1 (and consequently x1 = 0).
        let row = FoldedRow {
            parent_row: 0,
            coeffs: alloc::vec![(0, -2.0), (1, 1.0)],
            rhs: -2.0,
        };
        let forced = logical_fix(&row);
        assert!(forced.contains(&(0, true)));
        assert!(forced.contains(&(1, false)));

        // Slack row forces nothing.
        let row = FoldedRow {
            parent_row: 0,
            coeffs: alloc::vec![(0, 1.0), (1, 1.0)],
            rhs: 2.0,
        };
        assert!(logical_fix(&row).is_empty());
    }

    #[test]
    fn fixpoint_on_slack_system_is_identity() {
        let inst = MipInstance::binary(
            "slack",
            alloc::vec![1.0, 1.0],
            alloc::vec![Row::new(alloc::vec![(0, 1.0), (1, 1.0)], 2.0)],
        )
        .unwrap();
        match reduce_to_fixpoint(&inst, &FixedSet::empty(2)).unwrap() {
            ReductionOutcome::Reduced(red) => {
                assert_eq!(red.n_free(), 2);
                // The all-slack row is itself redundant and dropped.
                assert_eq!(red.removed_rows, alloc::vec![0]);
                assert_eq!(red.objective_offset, 0.0);
            }
            ReductionOutcome::Conflict { .. } => panic!("unexpected conflict"),
        }
    }

    #[test]
    fn fixpoint_detects_conflict_with_witness() {
        // x0 + x1 <= 1 and -x1 - x2 <= -2: fixing x0 = 1 has no feasible
        // completion (row 0 forces x1 = 0, row 1 needs x1 = x2 = 1).
        let inst = MipInstance::binary(
            "conf",
            alloc::vec![1.0, 1.0, 1.0],
            alloc::vec![
                Row::new(alloc::vec![(0, 1.0), (1, 1.0)], 1.0),
                Row::new(alloc::vec![(1, -1.0), (2, -1.0)], -2.0),
            ],
        )
        .unwrap();
        let mut f0 = FixedSet::empty(3);
        f0.insert(0, true, FixSource::Greedy);
        assert!(oracle::feasible_completions(&inst, &[(0, true)]).is_empty());
        match reduce_to_fixpoint(&inst, &f0).unwrap() {
            ReductionOutcome::Conflict { explanation, .. } => {
                assert!(explanation.contains("variable 1"), "{explanation}");
            }
            ReductionOutcome::Reduced(_) => panic!("expected conflict"),
        }
    }

    #[test]
    fn fixpoint_cascades_on_a_path() {
        // VC rows on the path 0-1-2-3; fixing x0 = 0 forces its neighbor.
        let rows = (0..3)
            .map(|t| Row::new(alloc::vec![(t, -1.0), (t + 1, -1.0)], -1.0))
            .collect();
        let inst = MipInstance::binary("path", alloc::vec![1.0; 4], rows).unwrap();
        let mut f0 = FixedSet::empty(4);
        f0.insert(0, false, FixSource::Greedy);
        match reduce_to_fixpoint(&inst, &f0).unwrap() {
            ReductionOutcome::Reduced(red) => {
                assert_eq!(red.fixed.get(1), Some(true));
                assert_eq!(red.fixed.source(1), Some(FixSource::LogicalOne));
                // Surviving feasible sets match the parent's completions.
                oracle::check_reduction_soundness(&inst, &f0).unwrap();
            }
            ReductionOutcome::Conflict { .. } => panic!("path is satisfiable"),
        }
    }

    #[test]
    fn soundness_on_random_instances() {
        let mut r = rng::from_seed(4242);
        for trial in 0..120 {
            let n = r.gen_range(3..=12);
            let rows = r.gen_range(0..=8);
            let inst = oracle::random_binary_instance(&mut r, "snd", n, rows, 3);
            let mut f0 = FixedSet::empty(n);
            for var in 0..n {
                if r.gen_bool(0.35) {
                    f0.insert(var, r.gen_bool(0.5), FixSource::Greedy);
                }
            }
            oracle::check_reduction_soundness(&inst, &f0)
                .unwrap_or_else(|msg| panic!("trial {trial}: {msg}"));
        }
    }

    #[test]
    fn free_count_is_monotone_in_eta() {
        let mut r = rng::from_seed(77);
        for _ in 0..25 {
            let n = r.gen_range(4..=14);
            let rows = r.gen_range(1..=8);
            let inst = oracle::random_binary_instance(&mut r, "mono", n, rows, 3);
            let p = ProbabilityVector::new((0..n).map(|_| r.gen_range(0.0..1.0)).collect());
            let mut last_free = usize::MAX;
            for eta in [0.0, 0.2, 0.4, 0.6, 0.8] {
                let fixes = select_fix_set(&p, eta).unwrap();
                let free = match reduce_to_fixpoint(&inst, &fixes).unwrap() {
                    ReductionOutcome::Reduced(red) => red.n_free(),
                    ReductionOutcome::Conflict { .. } => 0,
                };
                assert!(free <= last_free, "free went up at eta {eta}");
                last_free = free;
            }
        }
    }

    #[test]
    fn fixpoint_is_idempotent() {
        let mut r = rng::from_seed(5150);
        for _ in 0..30 {
            let n = r.gen_range(3..=10);
            let rows = r.gen_range(1..=6);
            let inst = oracle::random_binary_instance(&mut r, "idem", n, rows, 3);
            let mut f0 = FixedSet::empty(n);
            for var in 0..n {
                if r.gen_bool(0.3) {
                    f0.insert(var, r.gen_bool(0.5), FixSource::Greedy);
                }
            }
            let red = match reduce_to_fixpoint(&inst, &f0).unwrap() {
                ReductionOutcome::Reduced(red) => red,
                ReductionOutcome::Conflict { .. } => continue,
            };
            match reduce_to_fixpoint(&red.sub, &FixedSet::empty(red.n_free())).unwrap() {
                ReductionOutcome::Reduced(again) => {
                    assert_eq!(again.sub, red.sub);
                    assert!(again.fixed.is_empty());
                    assert!(again.removed_rows.is_empty());
                }
                ReductionOutcome::Conflict { .. } => panic!("fixpoint output conflicted"),
            }
        }
    }

    #[test]
    fn malformed_initial_fixes_are_rejected() {
        let inst = MipInstance::binary("r", alloc::vec![1.0], alloc::vec![]).unwrap();
        let wrong_len = FixedSet::empty(3);
        assert!(matches!(
            reduce_to_fixpoint(&inst, &wrong_len),
            Err(ReductionError::LengthMismatch { .. })
        ));
    }
}
