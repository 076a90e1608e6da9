//! Incremental single-row propagation with an undo trail, shared by the
//! guided dives and the exact tree search.
//!
//! Per row the engine tracks the residual rhs under the current fixes, the
//! sum of negative coefficients over free variables, and the free-variable
//! count. Fixing a variable updates only its incident rows and rechecks them
//! for forcings, so one dive costs about one pass over the nonzeros rather
//! than a full sweep per fix.

use alloc::vec::Vec;

use crate::mip::{Assignment, MipInstance, FEAS_TOL};

/// Row index that witnessed a contradiction. `DIRECT` marks a contradictory
/// caller-requested fix with no single row to blame.
pub(crate) type ConflictRow = usize;
pub(crate) const DIRECT: ConflictRow = usize::MAX;

pub(crate) struct Propagator<'a> {
    inst: &'a MipInstance,
    /// Rows (with coefficient) per variable.
    var_rows: Vec<Vec<(usize, f64)>>,
    resid: Vec<f64>,
    neg_sum: Vec<f64>,
    free_count: Vec<usize>,
    fixes: Vec<Option<bool>>,
    trail: Vec<usize>,
    /// Σ c_j over variables fixed to 1.
    fixed_obj: f64,
    /// Σ min(0, c_j) over free variables; with `fixed_obj` this yields an
    /// admissible lower bound on any completion.
    free_neg_obj: f64,
    queue: Vec<usize>,
    in_queue: Vec<bool>,
}

impl<'a> Propagator<'a> {
    pub fn new(inst: &'a MipInstance) -> Self {
        let n = inst.n_vars();
        let m = inst.n_cons();
        let mut var_rows = alloc::vec![Vec::new(); n];
        let mut resid = Vec::with_capacity(m);
        let mut neg_sum = alloc::vec![0.0; m];
        let mut free_count = alloc::vec![0usize; m];
        for (i, row) in inst.rows().iter().enumerate() {
            resid.push(row.rhs);
            for &(var, coef) in &row.coeffs {
                var_rows[var].push((i, coef));
                if coef < 0.0 {
                    neg_sum[i] += coef;
                }
                free_count[i] += 1;
            }
        }
        let free_neg_obj = inst.objective().iter().map(|&c| c.min(0.0)).sum();
        Self {
            inst,
            var_rows,
            resid,
            neg_sum,
            free_count,
            fixes: alloc::vec![None; n],
            trail: Vec::with_capacity(n),
            fixed_obj: 0.0,
            free_neg_obj,
            queue: Vec::new(),
            in_queue: alloc::vec![false; m],
        }
    }

    pub fn n_fixed(&self) -> usize {
        self.trail.len()
    }

    pub fn value(&self, var: usize) -> Option<bool> {
        self.fixes[var]
    }

    /// Admissible lower bound on the internal objective of any completion
    /// of the current fixes.
    pub fn lower_bound(&self) -> f64 {
        self.inst.objective_offset() + self.fixed_obj + self.free_neg_obj
    }

    /// Internal objective of the current (total) assignment.
    pub fn fixed_objective(&self) -> f64 {
        self.inst.objective_offset() + self.fixed_obj
    }

    pub fn assignment(&self) -> Assignment {
        let mut out = Assignment::empty(self.fixes.len());
        for (var, fix) in self.fixes.iter().enumerate() {
            if let Some(v) = *fix {
                out.set(var, v);
            }
        }
        out
    }

    /// First free variable at or after `from`; fixed prefixes stay fixed,
    /// so exact search can carry the hint down the tree.
    pub fn first_free_from(&self, from: usize) -> Option<usize> {
        (from..self.fixes.len()).find(|&v| self.fixes[v].is_none())
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    /// Roll the trail back to a mark, restoring row states exactly (the
    /// additive updates are reversed in reverse order).
    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().expect("trail nonempty");
            let value = self.fixes[var].take().expect("trailed var is fixed");
            let c = self.inst.objective()[var];
            if value {
                self.fixed_obj -= c;
            }
            self.free_neg_obj += c.min(0.0);
            for &(row, coef) in &self.var_rows[var] {
                self.free_count[row] += 1;
                if value {
                    self.resid[row] += coef;
                }
                if coef < 0.0 {
                    self.neg_sum[row] += coef;
                }
            }
        }
        self.clear_queue();
    }

    fn clear_queue(&mut self) {
        for row in self.queue.drain(..) {
            self.in_queue[row] = false;
        }
    }

    fn enqueue(&mut self, row: usize) {
        if !self.in_queue[row] {
            self.in_queue[row] = true;
            self.queue.push(row);
        }
    }

    fn apply(&mut self, var: usize, value: bool) {
        debug_assert!(self.fixes[var].is_none());
        self.fixes[var] = Some(value);
        self.trail.push(var);
        let c = self.inst.objective()[var];
        if value {
            self.fixed_obj += c;
        }
        self.free_neg_obj -= c.min(0.0);
        for t in 0..self.var_rows[var].len() {
            let (row, coef) = self.var_rows[var][t];
            self.free_count[row] -= 1;
            if value {
                self.resid[row] -= coef;
            }
            if coef < 0.0 {
                self.neg_sum[row] -= coef;
            }
            self.enqueue(row);
        }
    }

    /// Recheck one row: conflict when its free support is empty and the
    /// residual is negative, otherwise collect single-row forcings.
    fn check_row(&mut self, row: usize) -> Result<(), ConflictRow> {
        if self.free_count[row] == 0 {
            if self.resid[row] < -FEAS_TOL {
                return Err(row);
            }
            return Ok(());
        }
        let rhs = self.resid[row];
        let neg = self.neg_sum[row];
        // Collect first: applying a forcing mutates this row's state.
        let mut forced: Vec<(usize, bool)> = Vec::new();
        for &(var, coef) in &self.inst.rows()[row].coeffs {
            if self.fixes[var].is_some() {
                continue;
            }
            if coef > 0.0 {
                if coef + neg > rhs + FEAS_TOL {
                    forced.push((var, false));
                }
            } else if neg - coef > rhs + FEAS_TOL {
                forced.push((var, true));
            }
        }
        for (var, value) in forced {
            match self.fixes[var] {
                Some(v) if v == value => {}
                Some(_) => return Err(row),
                None => self.apply(var, value),
            }
        }
        Ok(())
    }

    fn drain(&mut self) -> Result<(), ConflictRow> {
        while let Some(row) = self.queue.pop() {
            self.in_queue[row] = false;
            if let Err(conflict) = self.check_row(row) {
                self.clear_queue();
                return Err(conflict);
            }
        }
        Ok(())
    }

    /// Check every row once and propagate; catches rows that force values
    /// (or are infeasible) before anything is fixed.
    pub fn initial_propagate(&mut self) -> Result<(), ConflictRow> {
        for row in 0..self.inst.n_cons() {
            self.enqueue(row);
        }
        self.drain()
    }

    /// Fix a variable and propagate all consequences. On conflict the state
    /// is left mid-propagation; callers roll back with `undo_to`.
    pub fn fix(&mut self, var: usize, value: bool) -> Result<(), ConflictRow> {
        match self.fixes[var] {
            Some(v) if v == value => return Ok(()),
            Some(_) => return Err(DIRECT),
            None => {}
        }
        self.apply(var, value);
        self.drain()
    }
}
