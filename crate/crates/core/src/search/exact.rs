//! Exact depth-first branch and bound for labeling and gap measurement.
//!
//! Branches on the lowest-index free variable, value 1 first, with
//! single-row propagation at every node and the admissible bound
//! `offset + Σ_fixed c_j x_j + Σ_free min(0, c_j)`; a node is pruned when
//! the bound cannot beat the incumbent. No LP relaxation anywhere, so the
//! pruning is weak but exact.

use super::propagate::Propagator;
use super::{Budget, SearchError, SearchRecord, Stopwatch, TraceEntry};
use crate::mip::{evaluate, MipInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactStatus {
    /// The tree was exhausted: the incumbent is optimal, or the instance is
    /// infeasible when there is none.
    Optimal,
    BudgetExhausted,
}

struct Search<'a> {
    inst: &'a MipInstance,
    budget: &'a Budget,
    clock: &'a dyn Stopwatch,
    record: SearchRecord,
    exhausted: bool,
}

impl<'a> Search<'a> {
    fn run(&mut self, prop: &mut Propagator<'a>, from_hint: usize) {
        self.record.nodes_processed += 1;
        if self.record.nodes_processed >= self.budget.node_limit
            || self.clock.elapsed_s() >= self.budget.time_limit_s
        {
            self.exhausted = true;
            return;
        }
        if let Some(ref inc) = self.record.incumbent {
            if prop.lower_bound() >= inc.objective {
                return;
            }
        }
        let var = match prop.first_free_from(from_hint) {
            Some(v) => v,
            None => {
                let assignment = prop.assignment();
                let objective = prop.fixed_objective();
                debug_assert!(evaluate(self.inst, &assignment).unwrap().feasible);
                if self.record.offer(assignment, objective, self.clock.elapsed_s()) {
                    self.record.trace.push(TraceEntry {
                        node: self.record.nodes_processed as usize,
                        objective: Some(objective),
                    });
                }
                return;
            }
        };
        for value in [true, false] {
            let mark = prop.mark();
            if prop.fix(var, value).is_ok() {
                self.run(prop, var + 1);
            }
            prop.undo_to(mark);
            if self.exhausted {
                return;
            }
        }
    }
}

/// Exact search; `Optimal` status means the tree was exhausted within the
/// budget (the trace records incumbent improvements by node count).
pub fn exact_bnb(
    inst: &MipInstance,
    budget: &Budget,
    clock: &dyn Stopwatch,
) -> Result<(ExactStatus, SearchRecord), SearchError> {
    if let Some(var) = inst.first_non_binary() {
        return Err(SearchError::NonBinaryVariable(var));
    }
    let mut search = Search { inst, budget, clock, record: SearchRecord::new(), exhausted: false };
    let mut prop = Propagator::new(inst);
    if prop.initial_propagate().is_ok() {
        search.run(&mut prop, 0);
    }
    let status = if search.exhausted { ExactStatus::BudgetExhausted } else { ExactStatus::Optimal };
    Ok((status, search.record))
}

#[cfg(test)]
mod tests {
    use super::super::testclock::ManualClock;
    use super::*;
    use crate::gen;
    use crate::mip::{MipInstance, Row};
    use crate::oracle;
    use crate::rng::{self, Rng};

    fn solve(inst: &MipInstance) -> (ExactStatus, SearchRecord) {
        exact_bnb(inst, &Budget::default(), &ManualClock::new()).unwrap()
    }

    #[test]
    fn unconstrained_minimum_is_zero() {
        let inst = MipInstance::binary("u5", alloc::vec![1.0; 5], alloc::vec![]).unwrap();
        let (status, record) = solve(&inst);
        assert_eq!(status, ExactStatus::Optimal);
        assert_eq!(record.incumbent.unwrap().objective, 0.0);
    }

    #[test]
    fn triangle_vc_optimum_is_two() {
        let g = gen::Graph::new(3, alloc::vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let (status, record) = solve(&gen::gen_vc(&g));
        assert_eq!(status, ExactStatus::Optimal);
        assert_eq!(record.incumbent.unwrap().objective, 2.0);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut r = rng::from_seed(2024);
        for trial in 0..40 {
            let n = r.gen_range(4..=12);
            let rows = r.gen_range(0..=10);
            let inst = oracle::random_binary_instance(&mut r, "x", n, rows, 3);
            let (status, record) = solve(&inst);
            assert_eq!(status, ExactStatus::Optimal);
            let brute = oracle::brute_force_optimum(&inst);
            match (record.incumbent, brute) {
                (Some(inc), Some(b)) => {
                    assert!(
                        (inc.objective - b.objective).abs() < 1e-9,
                        "trial {trial}: {} vs {}",
                        inc.objective,
                        b.objective
                    );
                    let eval = evaluate(&inst, &inc.assignment).unwrap();
                    assert!(eval.feasible);
                }
                (None, None) => {}
                (inc, b) => panic!(
                    "trial {trial}: feasibility disagreement (exact {:?}, brute {:?})",
                    inc.is_some(),
                    b.is_some()
                ),
            }
        }
    }

    #[test]
    fn maximization_instances_solve_in_internal_sense() {
        let g = gen::gen_graph(10, 2, 3).unwrap();
        let inst = gen::gen_mis(&g);
        let (status, record) = solve(&inst);
        assert_eq!(status, ExactStatus::Optimal);
        let brute = oracle::brute_force_optimum(&inst).unwrap();
        assert!((record.incumbent.unwrap().objective - brute.objective).abs() < 1e-9);
    }

    #[test]
    fn node_budget_reports_exhaustion() {
        let g = gen::gen_graph(20, 3, 1).unwrap();
        let inst = gen::gen_vc(&g);
        let budget = Budget::new(1e9, 3, u64::MAX).unwrap();
        let (status, record) = exact_bnb(&inst, &budget, &ManualClock::new()).unwrap();
        assert_eq!(status, ExactStatus::BudgetExhausted);
        assert!(record.nodes_processed <= 3);
    }

    #[test]
    fn infeasible_instance_proves_infeasibility() {
        // x0 >= 1 and x0 <= 0 in one system.
        let inst = MipInstance::binary(
            "inf",
            alloc::vec![1.0],
            alloc::vec![
                Row::new(alloc::vec![(0, -1.0)], -1.0),
                Row::new(alloc::vec![(0, 1.0)], 0.0),
            ],
        )
        .unwrap();
        let (status, record) = solve(&inst);
        assert_eq!(status, ExactStatus::Optimal);
        assert!(record.incumbent.is_none());
    }

    #[test]
    fn incumbent_improvements_are_monotone() {
        let mut r = rng::from_seed(555);
        let inst = oracle::random_binary_instance(&mut r, "mono", 10, 6, 3);
        let (_, record) = solve(&inst);
        let objs: alloc::vec::Vec<f64> =
            record.trace.iter().filter_map(|e| e.objective).collect();
        for pair in objs.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }
}
