//! Canonical text format for instances.
//!
//! ```text
//! bpmip 1 <name> <sense> <n_vars> <n_cons>
//! var <idx> b                  # binary
//! var <idx> i <lb> <ub>        # general integer
//! var <idx> c <lb>             # continuous, lower bound only
//! obj <idx> <coef>             # one line per objective nonzero
//! offset <value>               # only present when nonzero
//! row <idx> <rhs>              # rows are `<= rhs`; entries follow
//! e <var> <coef>
//! ```
//!
//! The objective (and offset) are written in the instance's original sense;
//! a `max` header negates them back on parse. Numbers use Rust's shortest
//! round-trip decimal form, so serialize/parse is exact. `serialize` then
//! `parse` is the identity, as is the reverse on canonically formatted text.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use super::{MipInstance, ModelError, Row, VarKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// 1-based line number the error was detected on (0 for end-of-input
    /// level problems).
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl core::error::Error for ParseError {}

pub fn serialize_instance(inst: &MipInstance) -> String {
    let sense = if inst.maximize_input() { "max" } else { "min" };
    let sign = if inst.maximize_input() { -1.0 } else { 1.0 };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "bpmip 1 {} {} {} {}",
        inst.name(),
        sense,
        inst.n_vars(),
        inst.n_cons()
    );
    for (j, kind) in inst.var_kinds().iter().enumerate() {
        match *kind {
            VarKind::Binary => {
                let _ = writeln!(out, "var {j} b");
            }
            VarKind::Integer { lower, upper } => {
                let _ = writeln!(out, "var {j} i {lower} {upper}");
            }
            VarKind::Continuous { lower } => {
                let _ = writeln!(out, "var {j} c {lower}");
            }
        }
    }
    for (j, &c) in inst.objective().iter().enumerate() {
        if c != 0.0 {
            let _ = writeln!(out, "obj {j} {}", sign * c);
        }
    }
    if inst.objective_offset() != 0.0 {
        let _ = writeln!(out, "offset {}", sign * inst.objective_offset());
    }
    for (i, row) in inst.rows().iter().enumerate() {
        let _ = writeln!(out, "row {i} {}", row.rhs);
        for &(var, coef) in &row.coeffs {
            let _ = writeln!(out, "e {var} {coef}");
        }
    }
    out
}

struct Cursor<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| ParseError::new(self.line, format!("missing {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn parse<T: core::str::FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let tok = self.next(what)?;
        tok.parse::<T>()
            .map_err(|_| ParseError::new(self.line, format!("malformed {what}: {tok:?}")))
    }

    fn finish(self) -> Result<(), ParseError> {
        if self.pos != self.tokens.len() {
            return Err(ParseError::new(
                self.line,
                format!("unexpected trailing token {:?}", self.tokens[self.pos]),
            ));
        }
        Ok(())
    }
}

pub fn parse_instance(text: &str) -> Result<MipInstance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(0, "empty document"))?;
    let mut cur = Cursor {
        tokens: header.split_whitespace().collect(),
        pos: 0,
        line: header_line,
    };
    let magic = cur.next("magic")?;
    let version = cur.next("version")?;
    if magic != "bpmip" || version != "1" {
        return Err(ParseError::new(header_line, "expected header `bpmip 1 ...`"));
    }
    let name = cur.next("name")?.to_string();
    let sense = cur.next("sense")?;
    let maximize = match sense {
        "min" => false,
        "max" => true,
        other => {
            return Err(ParseError::new(
                header_line,
                format!("sense must be min or max, got {other:?}"),
            ))
        }
    };
    let n_vars: usize = cur.parse("variable count")?;
    let n_cons: usize = cur.parse("constraint count")?;
    cur.finish()?;
    let sign = if maximize { -1.0 } else { 1.0 };

    let mut var_kinds: Vec<Option<VarKind>> = alloc::vec![None; n_vars];
    let mut objective = alloc::vec![0.0f64; n_vars];
    let mut obj_seen = alloc::vec![false; n_vars];
    let mut objective_offset = 0.0f64;
    let mut offset_seen = false;
    let mut rows: Vec<Row> = Vec::with_capacity(n_cons);
    let mut row_open = false;

    for (line_no, line) in lines {
        let mut cur = Cursor {
            tokens: line.split_whitespace().collect(),
            pos: 0,
            line: line_no,
        };
        let directive = cur.next("directive")?;
        match directive {
            "var" => {
                let idx: usize = cur.parse("variable index")?;
                if idx >= n_vars {
                    return Err(ParseError::new(
                        line_no,
                        format!("variable index {idx} out of range (n_vars = {n_vars})"),
                    ));
                }
                if var_kinds[idx].is_some() {
                    return Err(ParseError::new(line_no, format!("duplicate var line for {idx}")));
                }
                let kind = match cur.next("variable kind")? {
                    "b" => VarKind::Binary,
                    "i" => {
                        let lower: i64 = cur.parse("integer lower bound")?;
                        let upper: i64 = cur.parse("integer upper bound")?;
                        VarKind::Integer { lower, upper }
                    }
                    "c" => {
                        let lower: f64 = cur.parse("continuous lower bound")?;
                        VarKind::Continuous { lower }
                    }
                    other => {
                        return Err(ParseError::new(
                            line_no,
                            format!("unknown variable kind {other:?}"),
                        ))
                    }
                };
                var_kinds[idx] = Some(kind);
                cur.finish()?;
            }
            "obj" => {
                let idx: usize = cur.parse("objective index")?;
                if idx >= n_vars {
                    return Err(ParseError::new(
                        line_no,
                        format!("objective index {idx} out of range (n_vars = {n_vars})"),
                    ));
                }
                if obj_seen[idx] {
                    return Err(ParseError::new(line_no, format!("duplicate obj line for {idx}")));
                }
                obj_seen[idx] = true;
                let coef: f64 = cur.parse("objective coefficient")?;
                objective[idx] = sign * coef;
                cur.finish()?;
            }
            "offset" => {
                if offset_seen {
                    return Err(ParseError::new(line_no, "duplicate offset line"));
                }
                offset_seen = true;
                let value: f64 = cur.parse("objective offset")?;
                objective_offset = sign * value;
                cur.finish()?;
            }
            "row" => {
                let idx: usize = cur.parse("row index")?;
                if idx != rows.len() {
                    return Err(ParseError::new(
                        line_no,
                        format!("row index {idx} out of order (expected {})", rows.len()),
                    ));
                }
                if idx >= n_cons {
                    return Err(ParseError::new(
                        line_no,
                        format!("row index {idx} out of range (n_cons = {n_cons})"),
                    ));
                }
                let rhs: f64 = cur.parse("row rhs")?;
                rows.push(Row::new(Vec::new(), rhs));
                row_open = true;
                cur.finish()?;
            }
            "e" => {
                if !row_open {
                    return Err(ParseError::new(line_no, "entry line before any row"));
                }
                let var: usize = cur.parse("entry variable")?;
                if var >= n_vars {
                    return Err(ParseError::new(
                        line_no,
                        format!("entry variable {var} out of range (n_vars = {n_vars})"),
                    ));
                }
                let coef: f64 = cur.parse("entry coefficient")?;
                let row = rows.last_mut().expect("row_open implies a row");
                if row.coeffs.iter().any(|&(v, _)| v == var) {
                    return Err(ParseError::new(
                        line_no,
                        format!("duplicate entry for variable {var} in row {}", rows.len() - 1),
                    ));
                }
                row.coeffs.push((var, coef));
                cur.finish()?;
            }
            other => {
                return Err(ParseError::new(line_no, format!("unknown directive {other:?}")));
            }
        }
    }

    if let Some(missing) = var_kinds.iter().position(|k| k.is_none()) {
        return Err(ParseError::new(0, format!("missing var line for variable {missing}")));
    }
    if rows.len() != n_cons {
        return Err(ParseError::new(
            0,
            format!("expected {n_cons} rows, found {}", rows.len()),
        ));
    }
    let var_kinds: Vec<VarKind> = var_kinds.into_iter().map(|k| k.unwrap()).collect();
    MipInstance::with_parts(&name, objective, objective_offset, rows, var_kinds, maximize)
        .map_err(|e: ModelError| ParseError::new(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::Relation;

    fn triangle_vc() -> MipInstance {
        MipInstance::binary(
            "tri-vc",
            alloc::vec![1.0, 1.0, 1.0],
            alloc::vec![
                Row::new(alloc::vec![(0, -1.0), (1, -1.0)], -1.0),
                Row::new(alloc::vec![(0, -1.0), (2, -1.0)], -1.0),
                Row::new(alloc::vec![(1, -1.0), (2, -1.0)], -1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_instance_round_trip() {
        let inst = MipInstance::binary("empty", alloc::vec![], alloc::vec![]).unwrap();
        let text = serialize_instance(&inst);
        assert_eq!(text, "bpmip 1 empty min 0 0\n");
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn triangle_round_trip() {
        let inst = triangle_vc();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
        // And parse -> serialize is the identity on canonical text.
        assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn max_sense_round_trip_restores_sign() {
        let inst = MipInstance::binary_max(
            "m",
            alloc::vec![3.0, 0.0],
            alloc::vec![Row::new(alloc::vec![(0, 1.0), (1, 1.0)], 1.0)],
        )
        .unwrap();
        let text = serialize_instance(&inst);
        assert!(text.contains("max"));
        assert!(text.contains("obj 0 3"));
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn mixed_kinds_round_trip() {
        let inst = MipInstance::with_parts(
            "kinds",
            alloc::vec![1.5, -2.0, 0.25],
            0.75,
            alloc::vec![Row::new(alloc::vec![(0, 1.0), (1, -3.5)], 2.0)],
            alloc::vec![
                VarKind::Binary,
                VarKind::Integer { lower: -2, upper: 5 },
                VarKind::Continuous { lower: 0.5 },
            ],
            false,
        )
        .unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn out_of_range_index_names_line() {
        let text = "bpmip 1 bad min 1 1\nvar 0 b\nrow 0 1\ne 3 1\n";
        let err = parse_instance(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("out of range"));
    }

    #[test]
    fn duplicate_entry_rejected() {
        let text = "bpmip 1 bad min 2 1\nvar 0 b\nvar 1 b\nrow 0 1\ne 0 1\ne 0 2\n";
        let err = parse_instance(text).unwrap_err();
        assert_eq!(err.line, 6);
        assert!(err.message.contains("duplicate entry"));
    }

    #[test]
    fn missing_rows_detected() {
        let text = "bpmip 1 bad min 1 2\nvar 0 b\nrow 0 1\n";
        let err = parse_instance(text).unwrap_err();
        assert!(err.message.contains("expected 2 rows"));
    }

    #[test]
    fn normalized_equality_instance_round_trips() {
        let rows = crate::mip::normalize_constraints(&[RawishEq::raw()]);
        let inst = MipInstance::binary("eqn", alloc::vec![1.0], rows).unwrap();
        let back = parse_instance(&serialize_instance(&inst)).unwrap();
        assert_eq!(back, inst);
    }

    struct RawishEq;
    impl RawishEq {
        fn raw() -> crate::mip::RawConstraint {
            crate::mip::RawConstraint {
                coeffs: alloc::vec![(0, 1.0)],
                relation: Relation::Eq,
                rhs: 1.0,
            }
        }
    }
}
