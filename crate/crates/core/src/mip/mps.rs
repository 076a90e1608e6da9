//! Minimal MPS interchange: ROWS / COLUMNS (with integer markers) / RHS /
//! BOUNDS plus the OBJSENSE extension. Enough to move binary and
//! bounded-integer programs in and out; general LP features (ranges, free
//! rows beyond the objective, continuous upper bounds) are out of scope.
//!
//! Reading treats columns between `INTORG`/`INTEND` markers as integer with
//! the classic default bounds `[0, 1]`; `≥` and `=` rows are normalized to
//! `≤` form on import, so the imported row count may exceed the ROWS count.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use super::codec::ParseError;
use super::{normalize_constraints, MipInstance, RawConstraint, Relation, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    ObjSense,
    Done,
}

#[derive(Debug, Clone, Copy)]
struct ColBounds {
    lower: Option<f64>,
    upper: Option<f64>,
    fixed: Option<f64>,
    binary: bool,
}

impl ColBounds {
    fn none() -> Self {
        Self { lower: None, upper: None, fixed: None, binary: false }
    }
}

/// Import a (fixed- or free-format) MPS document.
pub fn parse_mps(text: &str) -> Result<MipInstance, ParseError> {
    let mut name = String::from("mps");
    let mut maximize = false;
    let mut section = Section::None;

    // Row bookkeeping: objective row name plus constraint rows in order.
    let mut obj_row: Option<String> = None;
    let mut row_order: Vec<String> = Vec::new();
    let mut row_relation: BTreeMap<String, Relation> = BTreeMap::new();

    let mut col_order: Vec<String> = Vec::new();
    let mut col_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut col_integer: Vec<bool> = Vec::new();
    let mut col_entries: Vec<Vec<(String, f64)>> = Vec::new();
    let mut in_integer_block = false;

    let mut rhs_values: BTreeMap<String, f64> = BTreeMap::new();
    let mut bounds: BTreeMap<usize, ColBounds> = BTreeMap::new();

    for (line_no, raw_line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        if raw_line.starts_with('*') {
            continue;
        }
        let is_header = !raw_line.starts_with(' ') && !raw_line.starts_with('\t');
        let fields: Vec<&str> = raw_line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if is_header {
            match fields[0] {
                "NAME" => {
                    if let Some(n) = fields.get(1) {
                        name = n.to_string();
                    }
                    continue;
                }
                "OBJSENSE" => {
                    section = Section::ObjSense;
                    if let Some(s) = fields.get(1) {
                        maximize = s.eq_ignore_ascii_case("MAX") || s.eq_ignore_ascii_case("MAXIMIZE");
                    }
                    continue;
                }
                "ROWS" => {
                    section = Section::Rows;
                    continue;
                }
                "COLUMNS" => {
                    section = Section::Columns;
                    continue;
                }
                "RHS" => {
                    section = Section::Rhs;
                    continue;
                }
                "BOUNDS" => {
                    section = Section::Bounds;
                    continue;
                }
                "RANGES" => {
                    return Err(ParseError::new_mps(line_no, "RANGES section unsupported"));
                }
                "ENDATA" => {
                    section = Section::Done;
                    break;
                }
                other => {
                    return Err(ParseError::new_mps(line_no, format!("unknown section {other:?}")));
                }
            }
        }

        match section {
            Section::ObjSense => {
                maximize = fields[0].eq_ignore_ascii_case("MAX")
                    || fields[0].eq_ignore_ascii_case("MAXIMIZE");
            }
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(ParseError::new_mps(line_no, "ROWS line needs `<type> <name>`"));
                }
                let row_name = fields[1].to_string();
                match fields[0] {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(ParseError::new_mps(line_no, "multiple N rows"));
                        }
                        obj_row = Some(row_name);
                    }
                    "L" | "G" | "E" => {
                        if row_relation.contains_key(&row_name) {
                            return Err(ParseError::new_mps(
                                line_no,
                                format!("duplicate row {row_name:?}"),
                            ));
                        }
                        let rel = match fields[0] {
                            "L" => Relation::Le,
                            "G" => Relation::Ge,
                            _ => Relation::Eq,
                        };
                        row_order.push(row_name.clone());
                        row_relation.insert(row_name, rel);
                    }
                    other => {
                        return Err(ParseError::new_mps(
                            line_no,
                            format!("unknown row type {other:?}"),
                        ))
                    }
                }
            }
            Section::Columns => {
                if fields.iter().any(|f| *f == "'INTORG'") {
                    in_integer_block = true;
                    continue;
                }
                if fields.iter().any(|f| *f == "'INTEND'") {
                    in_integer_block = false;
                    continue;
                }
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(ParseError::new_mps(
                        line_no,
                        "COLUMNS line needs `<col> (<row> <value>)+`",
                    ));
                }
                let col_name = fields[0];
                let idx = *col_index.entry(col_name.to_string()).or_insert_with(|| {
                    col_order.push(col_name.to_string());
                    col_integer.push(in_integer_block);
                    col_entries.push(Vec::new());
                    col_order.len() - 1
                });
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1].parse().map_err(|_| {
                        ParseError::new_mps(line_no, format!("malformed value {:?}", pair[1]))
                    })?;
                    col_entries[idx].push((pair[0].to_string(), value));
                }
            }
            Section::Rhs => {
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(ParseError::new_mps(
                        line_no,
                        "RHS line needs `<set> (<row> <value>)+`",
                    ));
                }
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1].parse().map_err(|_| {
                        ParseError::new_mps(line_no, format!("malformed value {:?}", pair[1]))
                    })?;
                    rhs_values.insert(pair[0].to_string(), value);
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(ParseError::new_mps(
                        line_no,
                        "BOUNDS line needs `<type> <set> <col> [value]`",
                    ));
                }
                let col = fields[2];
                let idx = *col_index.get(col).ok_or_else(|| {
                    ParseError::new_mps(line_no, format!("bound on unknown column {col:?}"))
                })?;
                let entry = bounds.entry(idx).or_insert_with(ColBounds::none);
                let value = || -> Result<f64, ParseError> {
                    fields
                        .get(3)
                        .ok_or_else(|| ParseError::new_mps(line_no, "bound value missing"))?
                        .parse()
                        .map_err(|_| ParseError::new_mps(line_no, "malformed bound value"))
                };
                match fields[0] {
                    "UP" | "UI" => entry.upper = Some(value()?),
                    "LO" | "LI" => entry.lower = Some(value()?),
                    "FX" => entry.fixed = Some(value()?),
                    "BV" => entry.binary = true,
                    "PL" => {}
                    "MI" | "FR" => {
                        return Err(ParseError::new_mps(
                            line_no,
                            "free / minus-infinity bounds unsupported",
                        ))
                    }
                    other => {
                        return Err(ParseError::new_mps(
                            line_no,
                            format!("unknown bound type {other:?}"),
                        ))
                    }
                }
            }
            Section::None | Section::Done => {
                return Err(ParseError::new_mps(line_no, "data before any section header"));
            }
        }
    }
    if section != Section::Done {
        return Err(ParseError::new_mps(0, "missing ENDATA"));
    }
    let obj_row = obj_row.ok_or_else(|| ParseError::new_mps(0, "missing N (objective) row"))?;

    let n_vars = col_order.len();
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut objective = alloc::vec![0.0f64; n_vars];
    let mut raw_by_row: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (idx, entries) in col_entries.iter().enumerate() {
        for (row_name, value) in entries {
            if *row_name == obj_row {
                objective[idx] += sign * value;
            } else if row_relation.contains_key(row_name) {
                raw_by_row.entry(row_name.clone()).or_default().push((idx, *value));
            } else {
                return Err(ParseError::new_mps(
                    0,
                    format!("column entry references unknown row {row_name:?}"),
                ));
            }
        }
    }

    let mut var_kinds = Vec::with_capacity(n_vars);
    for idx in 0..n_vars {
        let b = bounds.get(&idx).copied().unwrap_or_else(ColBounds::none);
        let kind = if col_integer[idx] || b.binary || b.fixed.is_some() && col_integer[idx] {
            if b.binary {
                VarKind::Binary
            } else if let Some(v) = b.fixed {
                VarKind::Integer { lower: v as i64, upper: v as i64 }
            } else {
                let lower = b.lower.unwrap_or(0.0);
                // Classic MPS convention: integer columns default to [0, 1].
                let upper = match b.upper {
                    Some(u) => u,
                    None => {
                        if b.lower.is_none() {
                            1.0
                        } else {
                            return Err(ParseError::new_mps(
                                0,
                                ModelErrorText::unbounded(&col_order[idx]),
                            ));
                        }
                    }
                };
                if lower == 0.0 && upper == 1.0 {
                    VarKind::Binary
                } else {
                    VarKind::Integer { lower: lower as i64, upper: upper as i64 }
                }
            }
        } else if b.binary {
            VarKind::Binary
        } else {
            if b.upper.is_some() || b.fixed.is_some() {
                return Err(ParseError::new_mps(
                    0,
                    format!(
                        "continuous column {:?} with an upper or fixed bound is unsupported",
                        col_order[idx]
                    ),
                ));
            }
            VarKind::Continuous { lower: b.lower.unwrap_or(0.0) }
        };
        var_kinds.push(kind);
    }

    let mut raw = Vec::with_capacity(row_order.len());
    for row_name in &row_order {
        raw.push(RawConstraint {
            coeffs: raw_by_row.remove(row_name).unwrap_or_default(),
            relation: row_relation[row_name],
            rhs: rhs_values.get(row_name).copied().unwrap_or(0.0),
        });
    }
    let rows = normalize_constraints(&raw);
    MipInstance::with_parts(&name, objective, 0.0, rows, var_kinds, maximize)
        .map_err(|e| ParseError::new_mps(0, e.to_string()))
}

struct ModelErrorText;
impl ModelErrorText {
    fn unbounded(col: &str) -> String {
        format!("integer column {col:?} has an unbounded domain")
    }
}

/// Export in MPS form. Rows are already `≤`, so every constraint is an `L`
/// row named `r<i>`; columns are named `x<j>`.
pub fn write_mps(inst: &MipInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", inst.name());
    if inst.maximize_input() {
        let _ = writeln!(out, "OBJSENSE");
        let _ = writeln!(out, "    MAX");
    }
    let sign = if inst.maximize_input() { -1.0 } else { 1.0 };
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  COST");
    for i in 0..inst.n_cons() {
        let _ = writeln!(out, " L  r{i}");
    }
    let _ = writeln!(out, "COLUMNS");
    // Column entries: objective first, then rows, per column.
    let mut by_col: Vec<Vec<(String, f64)>> = alloc::vec![Vec::new(); inst.n_vars()];
    for (j, &c) in inst.objective().iter().enumerate() {
        if c != 0.0 {
            by_col[j].push(("COST".to_string(), sign * c));
        }
    }
    for (i, row) in inst.rows().iter().enumerate() {
        for &(var, coef) in &row.coeffs {
            by_col[var].push((format!("r{i}"), coef));
        }
    }
    let mut integer_open = false;
    let mut marker = 0usize;
    for (j, entries) in by_col.iter().enumerate() {
        let is_int = !matches!(inst.var_kind(j), VarKind::Continuous { .. });
        if is_int != integer_open {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER{marker:<10}'MARKER'                 {tag}");
            marker += 1;
            integer_open = is_int;
        }
        for (row_name, value) in entries {
            let _ = writeln!(out, "    x{j:<9}{row_name:<10}{value}");
        }
    }
    if integer_open {
        let _ = writeln!(out, "    MARKER{marker:<10}'MARKER'                 'INTEND'");
    }
    let _ = writeln!(out, "RHS");
    for (i, row) in inst.rows().iter().enumerate() {
        if row.rhs != 0.0 {
            let _ = writeln!(out, "    RHS       r{i:<9}{}", row.rhs);
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for j in 0..inst.n_vars() {
        match inst.var_kind(j) {
            VarKind::Binary => {
                let _ = writeln!(out, " BV BND       x{j}");
            }
            VarKind::Integer { lower, upper } => {
                let _ = writeln!(out, " LI BND       x{j:<9}{lower}");
                let _ = writeln!(out, " UI BND       x{j:<9}{upper}");
            }
            VarKind::Continuous { lower } => {
                if lower != 0.0 {
                    let _ = writeln!(out, " LO BND       x{j:<9}{lower}");
                }
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

impl ParseError {
    fn new_mps(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::Row;

    #[test]
    fn export_import_preserves_structure() {
        let inst = MipInstance::binary_max(
            "pack",
            alloc::vec![3.0, 5.0, 0.0],
            alloc::vec![
                Row::new(alloc::vec![(0, 1.0), (1, 1.0)], 1.0),
                Row::new(alloc::vec![(1, 1.0), (2, 1.0)], 1.0),
            ],
        )
        .unwrap();
        let text = write_mps(&inst);
        let back = parse_mps(&text).unwrap();
        assert_eq!(back.n_vars(), 3);
        assert_eq!(back.n_cons(), 2);
        assert!(back.maximize_input());
        assert_eq!(back.objective(), inst.objective());
        assert_eq!(back.rows(), inst.rows());
        assert!(back.is_fully_binary());
    }

    #[test]
    fn integer_bounds_round_trip() {
        let inst = MipInstance::with_parts(
            "ints",
            alloc::vec![1.0, 2.0],
            0.0,
            alloc::vec![Row::new(alloc::vec![(0, 1.0), (1, 3.0)], 9.0)],
            alloc::vec![VarKind::Integer { lower: -1, upper: 4 }, VarKind::Binary],
            false,
        )
        .unwrap();
        let back = parse_mps(&write_mps(&inst)).unwrap();
        assert_eq!(back.var_kind(0), VarKind::Integer { lower: -1, upper: 4 });
        assert_eq!(back.var_kind(1), VarKind::Binary);
        assert_eq!(back.rows(), inst.rows());
    }

    #[test]
    fn ge_and_eq_rows_normalize() {
        let text = "\
NAME          t
ROWS
 N  COST
 G  cover
 E  pick
COLUMNS
    x0        COST      1   cover     1
    x1        COST      1   cover     1
    x1        pick      1
RHS
    RHS       cover     1   pick      1
BOUNDS
 BV BND       x0
 BV BND       x1
ENDATA
";
        let inst = parse_mps(text).unwrap();
        // G row negated plus E row split: 3 internal rows.
        assert_eq!(inst.n_cons(), 3);
        assert_eq!(inst.rows()[0], Row::new(alloc::vec![(0, -1.0), (1, -1.0)], -1.0));
        assert_eq!(inst.rows()[1], Row::new(alloc::vec![(1, 1.0)], 1.0));
        assert_eq!(inst.rows()[2], Row::new(alloc::vec![(1, -1.0)], -1.0));
    }

    #[test]
    fn unbounded_integer_column_is_an_error() {
        let text = "\
NAME          t
ROWS
 N  COST
COLUMNS
    MARKER                 'MARKER'                 'INTORG'
    x0        COST      1
    MARKER                 'MARKER'                 'INTEND'
BOUNDS
 LO BND       x0        2
ENDATA
";
        let err = parse_mps(text).unwrap_err();
        assert!(err.message.contains("unbounded"), "{}", err.message);
    }

    #[test]
    fn default_integer_columns_become_binary() {
        let text = "\
NAME          t
ROWS
 N  COST
 L  cap
COLUMNS
    MARKER                 'MARKER'                 'INTORG'
    x0        COST      -1   cap      1
    x1        COST      -2   cap      1
    MARKER                 'MARKER'                 'INTEND'
RHS
    RHS       cap       1
ENDATA
";
        let inst = parse_mps(text).unwrap();
        assert!(inst.is_fully_binary());
        assert_eq!(inst.objective(), &[-1.0, -2.0]);
    }
}
