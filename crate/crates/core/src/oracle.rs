//! Exhaustive reference implementations used by the test suites.
//!
//! Everything here recomputes feasibility and objectives directly from the
//! instance data with plain loops, independent of `mip::evaluate` and of the
//! solvers it is used to check. Only practical for small variable counts.

use alloc::string::String;
use alloc::vec::Vec;

use crate::mip::{Assignment, MipInstance, Row, FEAS_TOL};
use crate::rng::{Rng, Seeded};

const MAX_ENUM_VARS: usize = 26;

/// Decode bit `j` of an enumeration word.
#[inline]
fn bit(bits: u64, j: usize) -> f64 {
    ((bits >> j) & 1) as f64
}

/// Feasibility of a total assignment encoded as a bit word, checked with the
/// same `FEAS_TOL` tolerance the model uses.
pub fn is_feasible_bits(inst: &MipInstance, bits: u64) -> bool {
    inst.rows().iter().all(|row| {
        let lhs: f64 = row.coeffs.iter().map(|&(v, a)| a * bit(bits, v)).sum();
        lhs <= row.rhs + FEAS_TOL
    })
}

/// Internal-sense objective of a total assignment encoded as a bit word.
pub fn objective_bits(inst: &MipInstance, bits: u64) -> f64 {
    let mut obj = inst.objective_offset();
    for (j, &c) in inst.objective().iter().enumerate() {
        obj += c * bit(bits, j);
    }
    obj
}

pub fn assignment_from_bits(n_vars: usize, bits: u64) -> Assignment {
    let values: Vec<bool> = (0..n_vars).map(|j| (bits >> j) & 1 == 1).collect();
    Assignment::total(&values)
}

/// Optimal solution by full enumeration, if any assignment is feasible.
pub struct BruteForceOpt {
    pub objective: f64,
    pub assignment: Assignment,
}

pub fn brute_force_optimum(inst: &MipInstance) -> Option<BruteForceOpt> {
    let n = inst.n_vars();
    assert!(n <= MAX_ENUM_VARS, "brute force limited to {MAX_ENUM_VARS} vars");
    let mut best: Option<(f64, u64)> = None;
    for bits in 0..(1u64 << n) {
        if !is_feasible_bits(inst, bits) {
            continue;
        }
        let obj = objective_bits(inst, bits);
        if best.map_or(true, |(b, _)| obj < b) {
            best = Some((obj, bits));
        }
    }
    best.map(|(objective, bits)| BruteForceOpt {
        objective,
        assignment: assignment_from_bits(n, bits),
    })
}

/// Objective values of every feasible assignment (with multiplicity).
pub fn feasible_objectives(inst: &MipInstance) -> Vec<f64> {
    let n = inst.n_vars();
    assert!(n <= MAX_ENUM_VARS);
    (0..(1u64 << n))
        .filter(|&bits| is_feasible_bits(inst, bits))
        .map(|bits| objective_bits(inst, bits))
        .collect()
}

/// All feasible total assignments extending the given partial fixes,
/// returned as `(bits, objective)` sorted by bits. Enumerates only the free
/// variables.
pub fn feasible_completions(inst: &MipInstance, fixes: &[(usize, bool)]) -> Vec<(u64, f64)> {
    let n = inst.n_vars();
    assert!(n <= MAX_ENUM_VARS);
    let mut base = 0u64;
    let mut fixed_mask = 0u64;
    for &(var, value) in fixes {
        fixed_mask |= 1 << var;
        if value {
            base |= 1 << var;
        }
    }
    let free: Vec<usize> = (0..n).filter(|j| fixed_mask >> j & 1 == 0).collect();
    let mut out = Vec::new();
    for word in 0..(1u64 << free.len()) {
        let mut bits = base;
        for (t, &j) in free.iter().enumerate() {
            if (word >> t) & 1 == 1 {
                bits |= 1 << j;
            }
        }
        if is_feasible_bits(inst, bits) {
            out.push((bits, objective_bits(inst, bits)));
        }
    }
    out.sort_by_key(|&(bits, _)| bits);
    out
}

/// Exhaustively verify one reduction run: the feasible completions of the
/// initial fixes in the parent must equal the fixed values crossed with the
/// reduced sub-instance's feasible set, objectives matching up to the
/// recorded offset, and a conflict may be reported only when no completion
/// exists. Returns a description of the first mismatch.
pub fn check_reduction_soundness(
    inst: &MipInstance,
    initial: &crate::reduction::FixedSet,
) -> Result<(), String> {
    use crate::reduction::{reduce_to_fixpoint, ReductionOutcome};
    use alloc::format;

    let fix_list: Vec<(usize, bool)> =
        initial.iter().map(|(var, value, _)| (var, value)).collect();
    let parent = feasible_completions(inst, &fix_list);
    let outcome = reduce_to_fixpoint(inst, initial).map_err(|e| format!("reduce error: {e}"))?;
    match outcome {
        ReductionOutcome::Conflict { row, explanation } => {
            if parent.is_empty() {
                Ok(())
            } else {
                Err(format!(
                    "conflict at row {row} ({explanation}) but {} feasible completions exist",
                    parent.len()
                ))
            }
        }
        ReductionOutcome::Reduced(red) => {
            let n_sub = red.sub.n_vars();
            assert!(n_sub <= MAX_ENUM_VARS);
            let mut lifted: Vec<(u64, f64)> = Vec::new();
            for sub_bits in 0..(1u64 << n_sub) {
                if !is_feasible_bits(&red.sub, sub_bits) {
                    continue;
                }
                let mut bits = 0u64;
                for (var, value, _) in red.fixed.iter() {
                    if value {
                        bits |= 1 << var;
                    }
                }
                for sub_var in 0..n_sub {
                    if (sub_bits >> sub_var) & 1 == 1 {
                        bits |= 1 << red.sub_to_parent(sub_var);
                    }
                }
                lifted.push((bits, objective_bits(&red.sub, sub_bits) + red.objective_offset));
            }
            lifted.sort_by_key(|&(bits, _)| bits);
            if parent.len() != lifted.len() {
                return Err(format!(
                    "completion count mismatch: parent {} vs reduced {}",
                    parent.len(),
                    lifted.len()
                ));
            }
            for (&(pb, pobj), &(lb, lobj)) in parent.iter().zip(&lifted) {
                if pb != lb {
                    return Err(format!("assignment sets differ: {pb:b} vs {lb:b}"));
                }
                if (pobj - lobj).abs() > 1e-9 {
                    return Err(format!(
                        "objective mismatch on {pb:b}: parent {pobj} vs reduced {lobj}"
                    ));
                }
            }
            Ok(())
        }
    }
}

/// Verify that removing one detected-redundant row, or applying one logical
/// fix, preserves the feasible completion set of the given fixes.
pub fn check_local_rules(
    inst: &MipInstance,
    initial: &crate::reduction::FixedSet,
) -> Result<(), String> {
    use crate::reduction::{apply_fixing, detect_redundant, logical_fix};
    use alloc::format;

    let fix_list: Vec<(usize, bool)> =
        initial.iter().map(|(var, value, _)| (var, value)).collect();
    let base = feasible_completions(inst, &fix_list);
    let (folded, _) = apply_fixing(inst, initial);
    for row in &folded {
        if detect_redundant(row) {
            // Dropping the row must not admit new completions: every
            // completion of the remaining rows must satisfy it too.
            let others: Vec<usize> =
                (0..inst.n_cons()).filter(|&i| i != row.parent_row).collect();
            let without = feasible_completions_rows(inst, &fix_list, &others);
            for &(bits, _) in &without {
                let lhs: f64 =
                    row.coeffs.iter().map(|&(v, a)| a * bit(bits, v)).sum();
                if lhs > row.rhs + FEAS_TOL {
                    return Err(format!(
                        "row {} flagged redundant but {bits:b} violates it",
                        row.parent_row
                    ));
                }
            }
        }
        for (var, value) in logical_fix(row) {
            // Every feasible completion must already take the forced value.
            for &(bits, _) in &base {
                let actual = (bits >> var) & 1 == 1;
                if actual != value {
                    return Err(format!(
                        "row {} forces x{var} = {} but completion {bits:b} disagrees",
                        row.parent_row, value as u8
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Completions restricted to a subset of rows (by parent index).
fn feasible_completions_rows(
    inst: &MipInstance,
    fixes: &[(usize, bool)],
    rows: &[usize],
) -> Vec<(u64, f64)> {
    let n = inst.n_vars();
    assert!(n <= MAX_ENUM_VARS);
    let mut base = 0u64;
    let mut fixed_mask = 0u64;
    for &(var, value) in fixes {
        fixed_mask |= 1 << var;
        if value {
            base |= 1 << var;
        }
    }
    let free: Vec<usize> = (0..n).filter(|j| fixed_mask >> j & 1 == 0).collect();
    let mut out = Vec::new();
    for word in 0..(1u64 << free.len()) {
        let mut bits = base;
        for (t, &j) in free.iter().enumerate() {
            if (word >> t) & 1 == 1 {
                bits |= 1 << j;
            }
        }
        let ok = rows.iter().all(|&i| {
            let row = &inst.rows()[i];
            let lhs: f64 = row.coeffs.iter().map(|&(v, a)| a * bit(bits, v)).sum();
            lhs <= row.rhs + FEAS_TOL
        });
        if ok {
            out.push((bits, objective_bits(inst, bits)));
        }
    }
    out.sort_by_key(|&(bits, _)| bits);
    out
}

/// Uniform random permutation (`out[old] = new`).
pub fn random_permutation(rng: &mut Seeded, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for t in (1..n).rev() {
        let pick = rng.gen_range(0..=t);
        perm.swap(t, pick);
    }
    perm
}

/// Relabel variables and reorder rows: `var_perm[old] = new` index,
/// `row_perm[old] = new` position. Objective sense and offset carry over.
pub fn permute_instance(inst: &MipInstance, var_perm: &[usize], row_perm: &[usize]) -> MipInstance {
    assert_eq!(var_perm.len(), inst.n_vars());
    assert_eq!(row_perm.len(), inst.n_cons());
    let mut objective = alloc::vec![0.0; inst.n_vars()];
    let mut kinds = alloc::vec![crate::mip::VarKind::Binary; inst.n_vars()];
    for old in 0..inst.n_vars() {
        objective[var_perm[old]] = inst.objective()[old];
        kinds[var_perm[old]] = inst.var_kind(old);
    }
    let mut rows = alloc::vec![Row::new(Vec::new(), 0.0); inst.n_cons()];
    for (old, row) in inst.rows().iter().enumerate() {
        rows[row_perm[old]] = Row::new(
            row.coeffs.iter().map(|&(v, a)| (var_perm[v], a)).collect(),
            row.rhs,
        );
    }
    MipInstance::with_parts(
        inst.name(),
        objective,
        inst.objective_offset(),
        rows,
        kinds,
        inst.maximize_input(),
    )
    .expect("permutation preserves validity")
}

/// Random all-binary instance with integer data: `n` variables, `n_rows`
/// rows, coefficients drawn from `-max_coef..=max_coef` (zeros skipped), and
/// rhs values scaled so a mix of feasible and infeasible rows appears.
pub fn random_binary_instance(
    rng: &mut Seeded,
    name: &str,
    n: usize,
    n_rows: usize,
    max_coef: i64,
) -> MipInstance {
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-max_coef..=max_coef) as f64).collect();
    let mut rows = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let support = rng.gen_range(1..=n.min(4));
        let mut vars: Vec<usize> = (0..n).collect();
        // Partial Fisher-Yates: the first `support` entries become the row.
        for t in 0..support {
            let pick = rng.gen_range(t..n);
            vars.swap(t, pick);
        }
        let mut coeffs = Vec::with_capacity(support);
        let mut pos_sum = 0i64;
        let mut neg_sum = 0i64;
        for &v in vars.iter().take(support) {
            let c = loop {
                let c = rng.gen_range(-max_coef..=max_coef);
                if c != 0 {
                    break c;
                }
            };
            if c > 0 {
                pos_sum += c;
            } else {
                neg_sum += c;
            }
            coeffs.push((v, c as f64));
        }
        // Pick rhs between the row's minimum and maximum lhs, padded one
        // step each way so some rows are slack and a few are impossible.
        let rhs = rng.gen_range(neg_sum - 1..=pos_sum + 1) as f64;
        rows.push(Row::new(coeffs, rhs));
    }
    let mut inst_name = String::from(name);
    if inst_name.is_empty() {
        inst_name.push_str("rand");
    }
    MipInstance::binary(&inst_name, objective, rows).expect("random instance is valid")
}
