//! Canonical in-memory model of a (binary) integer program, kept in
//! minimization form with every constraint stored as `Σ a_ij x_j ≤ b_i`.
//!
//! Maximization inputs are negated on entry and flagged so reports can show
//! objectives in the original sense. Transforms (`normalize_constraints`,
//! `binarize_integer_var`) return new instances; an instance never mutates
//! after construction and is safe to share across threads.

pub mod codec;
pub mod mps;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Feasibility tolerance: a row is violated iff its lhs exceeds the rhs by
/// more than this.
pub const FEAS_TOL: f64 = 1e-9;

/// Kind of a decision variable. The search and reduction modules require
/// every variable to be `Binary`; the other kinds exist so instances can be
/// imported and then binarized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Binary,
    /// General integer with finite inclusive bounds.
    Integer { lower: i64, upper: i64 },
    /// Continuous with a nonnegative lower bound. Representable but rejected
    /// by every solve path in this crate.
    Continuous { lower: f64 },
}

/// One `≤` constraint: sparse coefficients (sorted by variable index, no
/// duplicates, finite and nonzero) and a right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }
}

/// Relation of a raw constraint before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// A constraint as it arrives from a file or a builder, before being put in
/// `≤` form.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConstraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// Instance names are single tokens in the text format.
    InvalidName(String),
    ObjectiveLengthMismatch { objective: usize, kinds: usize },
    NonFiniteValue { what: &'static str },
    ZeroCoefficient { row: usize, var: usize },
    DuplicateCoefficient { row: usize, var: usize },
    IndexOutOfRange { row: usize, var: usize, n_vars: usize },
    InvalidIntegerBounds { var: usize, lower: i64, upper: i64 },
    InvalidContinuousBound { var: usize },
    NotInteger { var: usize },
    /// Produced by importers for integer columns without finite bounds.
    UnboundedDomain { var: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidName(name) => {
                write!(f, "invalid instance name {name:?}: must be a nonempty token")
            }
            ModelError::ObjectiveLengthMismatch { objective, kinds } => write!(
                f,
                "objective length {objective} does not match variable count {kinds}"
            ),
            ModelError::NonFiniteValue { what } => write!(f, "non-finite {what}"),
            ModelError::ZeroCoefficient { row, var } => {
                write!(f, "zero coefficient for variable {var} in row {row}")
            }
            ModelError::DuplicateCoefficient { row, var } => {
                write!(f, "duplicate coefficient for variable {var} in row {row}")
            }
            ModelError::IndexOutOfRange { row, var, n_vars } => write!(
                f,
                "variable index {var} in row {row} out of range (n_vars = {n_vars})"
            ),
            ModelError::InvalidIntegerBounds { var, lower, upper } => {
                write!(f, "variable {var} has invalid integer bounds [{lower}, {upper}]")
            }
            ModelError::InvalidContinuousBound { var } => {
                write!(f, "variable {var} has an invalid continuous lower bound")
            }
            ModelError::NotInteger { var } => {
                write!(f, "variable {var} is not a general integer")
            }
            ModelError::UnboundedDomain { var } => {
                write!(f, "integer variable {var} has an unbounded domain")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// Sparse binary minimization program.
#[derive(Debug, Clone, PartialEq)]
pub struct MipInstance {
    name: String,
    objective: Vec<f64>,
    /// Constant added to `c^T x`; produced by transforms such as
    /// binarization with a nonzero lower bound.
    objective_offset: f64,
    rows: Vec<Row>,
    var_kinds: Vec<VarKind>,
    /// True when the original problem was a maximization; the stored
    /// objective is already negated.
    maximize_input: bool,
}

impl MipInstance {
    /// Validating constructor. Rows are canonicalized (coefficients sorted by
    /// variable index).
    pub fn new(
        name: &str,
        objective: Vec<f64>,
        rows: Vec<Row>,
        var_kinds: Vec<VarKind>,
    ) -> Result<Self, ModelError> {
        Self::with_parts(name, objective, 0.0, rows, var_kinds, false)
    }

    /// All-binary convenience constructor.
    pub fn binary(name: &str, objective: Vec<f64>, rows: Vec<Row>) -> Result<Self, ModelError> {
        let kinds = alloc::vec![VarKind::Binary; objective.len()];
        Self::new(name, objective, rows, kinds)
    }

    /// All-binary maximization: the objective is negated and the sign flag
    /// recorded so reports can restore the original sense.
    pub fn binary_max(
        name: &str,
        objective: Vec<f64>,
        rows: Vec<Row>,
    ) -> Result<Self, ModelError> {
        let negated = objective.iter().map(|c| -c).collect::<Vec<_>>();
        let kinds = alloc::vec![VarKind::Binary; negated.len()];
        Self::with_parts(name, negated, 0.0, rows, kinds, true)
    }

    pub fn with_parts(
        name: &str,
        objective: Vec<f64>,
        objective_offset: f64,
        rows: Vec<Row>,
        var_kinds: Vec<VarKind>,
        maximize_input: bool,
    ) -> Result<Self, ModelError> {
        if name.is_empty() || name.chars().any(|c| c.is_whitespace()) {
            return Err(ModelError::InvalidName(name.to_string()));
        }
        if objective.len() != var_kinds.len() {
            return Err(ModelError::ObjectiveLengthMismatch {
                objective: objective.len(),
                kinds: var_kinds.len(),
            });
        }
        if objective.iter().any(|c| !c.is_finite()) || !objective_offset.is_finite() {
            return Err(ModelError::NonFiniteValue { what: "objective coefficient" });
        }
        for (j, kind) in var_kinds.iter().enumerate() {
            match *kind {
                VarKind::Binary => {}
                VarKind::Integer { lower, upper } => {
                    if lower > upper {
                        return Err(ModelError::InvalidIntegerBounds { var: j, lower, upper });
                    }
                }
                VarKind::Continuous { lower } => {
                    if !lower.is_finite() || lower < 0.0 {
                        return Err(ModelError::InvalidContinuousBound { var: j });
                    }
                }
            }
        }
        let n_vars = objective.len();
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            if !row.rhs.is_finite() {
                return Err(ModelError::NonFiniteValue { what: "row rhs" });
            }
            row.coeffs.sort_by_key(|&(var, _)| var);
            let mut prev: Option<usize> = None;
            for &(var, coef) in &row.coeffs {
                if var >= n_vars {
                    return Err(ModelError::IndexOutOfRange { row: i, var, n_vars });
                }
                if !coef.is_finite() {
                    return Err(ModelError::NonFiniteValue { what: "row coefficient" });
                }
                if coef == 0.0 {
                    return Err(ModelError::ZeroCoefficient { row: i, var });
                }
                if prev == Some(var) {
                    return Err(ModelError::DuplicateCoefficient { row: i, var });
                }
                prev = Some(var);
            }
        }
        Ok(Self {
            name: name.to_string(),
            objective,
            objective_offset,
            rows,
            var_kinds,
            maximize_input,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_cons(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn var_kind(&self, j: usize) -> VarKind {
        self.var_kinds[j]
    }

    pub fn var_kinds(&self) -> &[VarKind] {
        &self.var_kinds
    }

    pub fn maximize_input(&self) -> bool {
        self.maximize_input
    }

    pub fn is_fully_binary(&self) -> bool {
        self.var_kinds.iter().all(|k| matches!(k, VarKind::Binary))
    }

    /// First non-binary variable, if any.
    pub fn first_non_binary(&self) -> Option<usize> {
        self.var_kinds.iter().position(|k| !matches!(k, VarKind::Binary))
    }

    /// Same instance under a different name.
    pub fn with_name(&self, name: &str) -> Result<Self, ModelError> {
        Self::with_parts(
            name,
            self.objective.clone(),
            self.objective_offset,
            self.rows.clone(),
            self.var_kinds.clone(),
            self.maximize_input,
        )
    }

    /// Map an internal (minimization) objective value back to the sense of
    /// the original input.
    pub fn original_sense_objective(&self, internal: f64) -> f64 {
        if self.maximize_input {
            -internal
        } else {
            internal
        }
    }

    /// Replace general-integer variable `j` by its binary expansion.
    ///
    /// With `l = upper - lower + 1` values and `m = ceil(log2 l)` bits, the
    /// variable becomes `m` binaries with weights `2^(m-1), …, 1` spliced in
    /// at position `j`; the constant `lower` folds into row rhs values and
    /// the objective offset. When the expansion can exceed `upper - lower`,
    /// a bound row `Σ 2^(m-1-t) b_t ≤ upper - lower` is appended to keep the
    /// feasible set exactly equal.
    pub fn binarize_integer_var(&self, j: usize) -> Result<Self, ModelError> {
        let (lower, upper) = match self.var_kinds.get(j) {
            Some(&VarKind::Integer { lower, upper }) => (lower, upper),
            Some(_) => return Err(ModelError::NotInteger { var: j }),
            None => {
                return Err(ModelError::IndexOutOfRange {
                    row: usize::MAX,
                    var: j,
                    n_vars: self.n_vars(),
                })
            }
        };
        let l = (upper - lower + 1) as u64;
        let m = if l <= 1 { 0 } else { 64 - (l - 1).leading_zeros() as usize };
        let weights: Vec<f64> = (0..m).map(|t| (1u64 << (m - 1 - t)) as f64).collect();
        let span = (upper - lower) as f64;

        let remap = |var: usize| -> usize {
            if var < j {
                var
            } else {
                var + m - 1
            }
        };

        let mut objective = Vec::with_capacity(self.n_vars() + m - 1);
        let mut var_kinds = Vec::with_capacity(self.n_vars() + m - 1);
        for (v, (&c, &kind)) in self.objective.iter().zip(self.var_kinds.iter()).enumerate() {
            if v == j {
                for &w in &weights {
                    objective.push(c * w);
                    var_kinds.push(VarKind::Binary);
                }
            } else {
                objective.push(c);
                var_kinds.push(kind);
            }
        }
        let objective_offset = self.objective_offset + self.objective[j] * lower as f64;

        let mut rows = Vec::with_capacity(self.rows.len() + 1);
        for row in &self.rows {
            let mut coeffs = Vec::with_capacity(row.coeffs.len() + m);
            let mut rhs = row.rhs;
            for &(var, coef) in &row.coeffs {
                if var == j {
                    rhs -= coef * lower as f64;
                    for (t, &w) in weights.iter().enumerate() {
                        coeffs.push((j + t, coef * w));
                    }
                } else {
                    coeffs.push((remap(var), coef));
                }
            }
            rows.push(Row::new(coeffs, rhs));
        }
        // 2^m - 1 can overshoot upper - lower; pin it down.
        if m > 0 && ((1u64 << m) - 1) as f64 > span {
            let coeffs = weights.iter().enumerate().map(|(t, &w)| (j + t, w)).collect();
            rows.push(Row::new(coeffs, span));
        }

        Self::with_parts(
            &self.name,
            objective,
            objective_offset,
            rows,
            var_kinds,
            self.maximize_input,
        )
    }

    /// Binarize every general-integer variable (continuous variables are
    /// left untouched).
    pub fn binarize(&self) -> Result<Self, ModelError> {
        let mut inst = self.clone();
        while let Some(j) = inst
            .var_kinds
            .iter()
            .position(|k| matches!(k, VarKind::Integer { .. }))
        {
            inst = inst.binarize_integer_var(j)?;
        }
        Ok(inst)
    }
}

/// Total or partial 0/1 assignment over a fixed variable count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn empty(n_vars: usize) -> Self {
        Self { values: alloc::vec![None; n_vars] }
    }

    pub fn total(values: &[bool]) -> Self {
        Self {
            values: values.iter().map(|&v| Some(v)).collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, var: usize) -> Option<bool> {
        self.values[var]
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.values[var] = Some(value);
    }

    pub fn assigned(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }

    /// First unassigned variable, if any.
    pub fn first_missing(&self) -> Option<usize> {
        self.values.iter().position(|v| v.is_none())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Option<bool>)> + '_ {
        self.values.iter().enumerate().map(|(i, v)| (i, *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    IncompleteAssignment { var: usize },
    NotBinary { var: usize },
    LengthMismatch { assignment: usize, n_vars: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::IncompleteAssignment { var } => {
                write!(f, "assignment is missing variable {var}")
            }
            EvalError::NotBinary { var } => {
                write!(f, "variable {var} is not binary; evaluate needs a fully binary instance")
            }
            EvalError::LengthMismatch { assignment, n_vars } => write!(
                f,
                "assignment covers {assignment} variables but the instance has {n_vars}"
            ),
        }
    }
}

impl core::error::Error for EvalError {}

/// Outcome of evaluating a total assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub feasible: bool,
    /// `c^T x` plus the instance's objective offset (minimization sense).
    pub objective: f64,
    /// `(row index, lhs value)` for every violated row.
    pub violated_rows: Vec<(usize, f64)>,
}

/// Evaluate a total assignment: objective and the set of violated rows,
/// using the `FEAS_TOL` feasibility tolerance.
pub fn evaluate(inst: &MipInstance, x: &Assignment) -> Result<EvalResult, EvalError> {
    if let Some(var) = inst.first_non_binary() {
        return Err(EvalError::NotBinary { var });
    }
    if x.n_vars() != inst.n_vars() {
        return Err(EvalError::LengthMismatch {
            assignment: x.n_vars(),
            n_vars: inst.n_vars(),
        });
    }
    if let Some(var) = x.first_missing() {
        return Err(EvalError::IncompleteAssignment { var });
    }
    let bit = |var: usize| -> f64 {
        match x.get(var) {
            Some(true) => 1.0,
            _ => 0.0,
        }
    };
    let mut objective = inst.objective_offset();
    for (j, &c) in inst.objective().iter().enumerate() {
        objective += c * bit(j);
    }
    let mut violated_rows = Vec::new();
    for (i, row) in inst.rows().iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().map(|&(var, coef)| coef * bit(var)).sum();
        if lhs > row.rhs + FEAS_TOL {
            violated_rows.push((i, lhs));
        }
    }
    Ok(EvalResult {
        feasible: violated_rows.is_empty(),
        objective,
        violated_rows,
    })
}

/// Put raw constraints in `≤` form: `≥` rows are negated, `=` rows split
/// into a `≤` pair (the plain row first), `≤` rows pass through. Row order
/// is stable.
pub fn normalize_constraints(constraints: &[RawConstraint]) -> Vec<Row> {
    let mut rows = Vec::with_capacity(constraints.len());
    for c in constraints {
        match c.relation {
            Relation::Le => rows.push(Row::new(c.coeffs.clone(), c.rhs)),
            Relation::Ge => rows.push(negated_row(c)),
            Relation::Eq => {
                rows.push(Row::new(c.coeffs.clone(), c.rhs));
                rows.push(negated_row(c));
            }
        }
    }
    rows
}

fn negated_row(c: &RawConstraint) -> Row {
    Row::new(
        c.coeffs.iter().map(|&(var, coef)| (var, -coef)).collect(),
        -c.rhs,
    )
}

/// Short human-readable shape summary, handy in logs.
pub fn describe(inst: &MipInstance) -> String {
    format!(
        "{} ({} vars, {} rows, {})",
        inst.name(),
        inst.n_vars(),
        inst.n_cons(),
        if inst.maximize_input() { "max" } else { "min" }
    )
}
