//! Variable–constraint bipartite graph and static feature extraction.
//!
//! Every structural nonzero `a_ij` becomes one edge between variable node
//! `j` and constraint node `i`, carrying the coefficient. Features are
//! computed purely from `(c, A, b)` and min–max normalized per column and
//! per instance, which makes the tables invariant to a common positive
//! rescaling of the data and lets one model serve instances of any size.

use alloc::vec::Vec;
use core::fmt;

use crate::fx;
use crate::matrix::Matrix;
use crate::mip::MipInstance;

/// Variable feature columns: objective coefficient, degree, mean/min/max of
/// incident coefficients, positive and negative incident counts, and
/// `|c_j| / ||c||_inf`.
pub const VAR_FEATURES: usize = 8;
/// Constraint feature columns: rhs, degree, mean/min/max of row
/// coefficients.
pub const CONS_FEATURES: usize = 5;
/// Edge feature columns: the coefficient itself.
pub const EDGE_FEATURES: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum BigraphError {
    NonBinaryVariable(usize),
}

impl fmt::Display for BigraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BigraphError::NonBinaryVariable(var) => {
                write!(f, "variable {var} is not binary; the bipartite encoding needs a fully binary instance")
            }
        }
    }
}

impl core::error::Error for BigraphError {}

/// Bipartite graph over variable and constraint nodes. Edges are stored in
/// row-major order (by constraint, then by variable), and both adjacency
/// indexes list edge ids sorted by the opposite endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    var_nodes: usize,
    cons_nodes: usize,
    edges: Vec<(usize, usize, f64)>,
    var_adj: Vec<Vec<usize>>,
    cons_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn var_nodes(&self) -> usize {
        self.var_nodes
    }

    pub fn cons_nodes(&self) -> usize {
        self.cons_nodes
    }

    /// `(variable, constraint, coefficient)` triples.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge ids incident to a variable node.
    pub fn var_edges(&self, var: usize) -> &[usize] {
        &self.var_adj[var]
    }

    /// Edge ids incident to a constraint node.
    pub fn cons_edges(&self, cons: usize) -> &[usize] {
        &self.cons_adj[cons]
    }

    pub fn var_degree(&self, var: usize) -> usize {
        self.var_adj[var].len()
    }

    pub fn cons_degree(&self, cons: usize) -> usize {
        self.cons_adj[cons].len()
    }
}

/// Build the bipartite encoding of a fully binary instance.
pub fn build_bigraph(inst: &MipInstance) -> Result<BipartiteGraph, BigraphError> {
    if let Some(var) = inst.first_non_binary() {
        return Err(BigraphError::NonBinaryVariable(var));
    }
    let var_nodes = inst.n_vars();
    let cons_nodes = inst.n_cons();
    let mut edges = Vec::new();
    let mut var_adj = alloc::vec![Vec::new(); var_nodes];
    let mut cons_adj = alloc::vec![Vec::new(); cons_nodes];
    for (i, row) in inst.rows().iter().enumerate() {
        for &(j, coef) in &row.coeffs {
            let edge_id = edges.len();
            edges.push((j, i, coef));
            var_adj[j].push(edge_id);
            cons_adj[i].push(edge_id);
        }
    }
    Ok(BipartiteGraph { var_nodes, cons_nodes, edges, var_adj, cons_adj })
}

/// Feature tables for one instance; row counts match the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub var_features: Matrix,
    pub cons_features: Matrix,
    pub edge_features: Matrix,
}

/// Raw (unnormalized) features, derived purely from `(c, A, b)`.
/// Degree-0 nodes get zero aggregates.
pub fn raw_features(inst: &MipInstance, g: &BipartiteGraph) -> FeatureSet {
    let c_inf = inst
        .objective()
        .iter()
        .fold(0.0f64, |acc, &c| acc.max(fx::abs(c)));

    let mut var_features = Matrix::zeros(g.var_nodes(), VAR_FEATURES);
    for j in 0..g.var_nodes() {
        let c = inst.objective()[j];
        let incident = g.var_edges(j);
        let (mut sum, mut min, mut max, mut pos, mut neg) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (t, &e) in incident.iter().enumerate() {
            let a = g.edges()[e].2;
            sum += a;
            if t == 0 {
                min = a;
                max = a;
            } else {
                min = min.min(a);
                max = max.max(a);
            }
            if a > 0.0 {
                pos += 1.0;
            } else {
                neg += 1.0;
            }
        }
        let degree = incident.len() as f64;
        let mean = if incident.is_empty() { 0.0 } else { sum / degree };
        let rel_c = if c_inf > 0.0 { fx::abs(c) / c_inf } else { 0.0 };
        let row = var_features.row_mut(j);
        row[0] = c;
        row[1] = degree;
        row[2] = mean;
        row[3] = min;
        row[4] = max;
        row[5] = pos;
        row[6] = neg;
        row[7] = rel_c;
    }

    let mut cons_features = Matrix::zeros(g.cons_nodes(), CONS_FEATURES);
    for i in 0..g.cons_nodes() {
        let rhs = inst.rows()[i].rhs;
        let incident = g.cons_edges(i);
        let (mut sum, mut min, mut max) = (0.0, 0.0, 0.0);
        for (t, &e) in incident.iter().enumerate() {
            let a = g.edges()[e].2;
            sum += a;
            if t == 0 {
                min = a;
                max = a;
            } else {
                min = min.min(a);
                max = max.max(a);
            }
        }
        let degree = incident.len() as f64;
        let mean = if incident.is_empty() { 0.0 } else { sum / degree };
        let row = cons_features.row_mut(i);
        row[0] = rhs;
        row[1] = degree;
        row[2] = mean;
        row[3] = min;
        row[4] = max;
    }

    let mut edge_features = Matrix::zeros(g.n_edges(), EDGE_FEATURES);
    for (e, &(_, _, coef)) in g.edges().iter().enumerate() {
        edge_features.set(e, 0, coef);
    }

    FeatureSet { var_features, cons_features, edge_features }
}

/// Min–max normalize each column to `[0, 1]` in place; constant columns map
/// to 0.
pub fn normalize_columns(m: &mut Matrix) {
    let (rows, cols) = (m.rows(), m.cols());
    for c in 0..cols {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..rows {
            let v = m.get(r, c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = hi - lo;
        for r in 0..rows {
            let v = if span > 0.0 { (m.get(r, c) - lo) / span } else { 0.0 };
            m.set(r, c, v);
        }
    }
}

/// Normalized feature tables for an instance and its bipartite graph.
pub fn extract_features(inst: &MipInstance, g: &BipartiteGraph) -> FeatureSet {
    let mut f = raw_features(inst, g);
    normalize_columns(&mut f.var_features);
    normalize_columns(&mut f.cons_features);
    normalize_columns(&mut f.edge_features);
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_vc, Graph};
    use crate::mip::{MipInstance, Row, VarKind};

    fn triangle_vc() -> MipInstance {
        let g = Graph::new(3, alloc::vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        gen_vc(&g)
    }

    #[test]
    fn single_entry_graph() {
        let inst = MipInstance::binary(
            "one",
            alloc::vec![1.0],
            alloc::vec![Row::new(alloc::vec![(0, 1.0)], 1.0)],
        )
        .unwrap();
        let g = build_bigraph(&inst).unwrap();
        assert_eq!((g.var_nodes(), g.cons_nodes(), g.n_edges()), (1, 1, 1));
        assert_eq!(g.edges()[0], (0, 0, 1.0));
    }

    #[test]
    fn triangle_vc_edge_count() {
        let g = build_bigraph(&triangle_vc()).unwrap();
        assert_eq!((g.var_nodes(), g.cons_nodes(), g.n_edges()), (3, 3, 6));
        // Every variable sits in two edge rows.
        for j in 0..3 {
            assert_eq!(g.var_degree(j), 2);
        }
    }

    #[test]
    fn zero_support_row_has_degree_zero() {
        let inst = MipInstance::binary(
            "deg0",
            alloc::vec![1.0],
            alloc::vec![Row::new(alloc::vec![], 1.0), Row::new(alloc::vec![(0, 2.0)], 2.0)],
        )
        .unwrap();
        let g = build_bigraph(&inst).unwrap();
        assert_eq!(g.cons_degree(0), 0);
        assert_eq!(g.cons_degree(1), 1);
        let f = extract_features(&inst, &g);
        assert!(f.cons_features.is_finite());
    }

    #[test]
    fn rejects_non_binary() {
        let inst = MipInstance::new(
            "int",
            alloc::vec![1.0],
            alloc::vec![],
            alloc::vec![VarKind::Integer { lower: 0, upper: 3 }],
        )
        .unwrap();
        assert!(matches!(build_bigraph(&inst), Err(BigraphError::NonBinaryVariable(0))));
    }

    #[test]
    fn constant_objective_column_normalizes_to_zero() {
        let inst = triangle_vc();
        let g = build_bigraph(&inst).unwrap();
        let f = extract_features(&inst, &g);
        for j in 0..3 {
            assert_eq!(f.var_features.get(j, 0), 0.0);
        }
    }

    #[test]
    fn degree_column_before_normalization() {
        let inst = triangle_vc();
        let g = build_bigraph(&inst).unwrap();
        let raw = raw_features(&inst, &g);
        for j in 0..3 {
            assert_eq!(raw.var_features.get(j, 1), 2.0);
        }
    }

    #[test]
    fn common_scaling_leaves_features_unchanged() {
        let base = MipInstance::binary(
            "scale",
            alloc::vec![1.0, -2.0, 0.5],
            alloc::vec![
                Row::new(alloc::vec![(0, 1.0), (1, -1.0)], 2.0),
                Row::new(alloc::vec![(1, 3.0), (2, 1.0)], -1.0),
            ],
        )
        .unwrap();
        let scaled = MipInstance::binary(
            "scale10",
            base.objective().iter().map(|c| c * 10.0).collect(),
            base.rows()
                .iter()
                .map(|r| {
                    Row::new(
                        r.coeffs.iter().map(|&(v, a)| (v, a * 10.0)).collect(),
                        r.rhs * 10.0,
                    )
                })
                .collect(),
        )
        .unwrap();
        let fb = extract_features(&base, &build_bigraph(&base).unwrap());
        let fs = extract_features(&scaled, &build_bigraph(&scaled).unwrap());
        assert_eq!(fb.var_features, fs.var_features);
        assert_eq!(fb.cons_features, fs.cons_features);
        assert_eq!(fb.edge_features, fs.edge_features);
    }

    #[test]
    fn normalized_features_stay_in_unit_interval() {
        let g = crate::gen::gen_graph(25, 3, 77).unwrap();
        for inst in [gen_vc(&g), crate::gen::gen_ds(&g), crate::gen::gen_mis(&g)] {
            let bg = build_bigraph(&inst).unwrap();
            let f = extract_features(&inst, &bg);
            for table in [&f.var_features, &f.cons_features, &f.edge_features] {
                assert!(table.data().iter().all(|&v| (0.0..=1.0).contains(&v) && v.is_finite()));
            }
        }
    }

    #[test]
    fn permuting_variables_permutes_feature_rows() {
        // Swap variables 0 and 2 of the instance; feature rows must follow.
        let inst = MipInstance::binary(
            "perm",
            alloc::vec![3.0, -1.0, 2.0],
            alloc::vec![
                Row::new(alloc::vec![(0, 2.0), (1, -1.0)], 1.0),
                Row::new(alloc::vec![(2, 1.0)], 0.0),
            ],
        )
        .unwrap();
        let perm = [2usize, 1, 0];
        let permuted = MipInstance::binary(
            "perm2",
            {
                let mut c = alloc::vec![0.0; 3];
                for (old, &new) in perm.iter().enumerate() {
                    c[new] = inst.objective()[old];
                }
                c
            },
            inst.rows()
                .iter()
                .map(|r| {
                    Row::new(r.coeffs.iter().map(|&(v, a)| (perm[v], a)).collect(), r.rhs)
                })
                .collect(),
        )
        .unwrap();
        let f = extract_features(&inst, &build_bigraph(&inst).unwrap());
        let fp = extract_features(&permuted, &build_bigraph(&permuted).unwrap());
        for (old, &new) in perm.iter().enumerate() {
            assert_eq!(f.var_features.row(old), fp.var_features.row(new));
        }
    }
}
