//! Seeded generators for the four benchmark families: vertex cover (VC),
//! maximum independent set (MIS), dominating set (DS), and combinatorial
//! auctions (CA). Every generator is a pure function of its arguments, seed
//! included.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fx;
use crate::mip::{MipInstance, Row};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq)]
pub enum GenError {
    InvalidParameter(String),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for GenError {}

/// Simple undirected graph: edges are `(u, v)` with `u < v`, no duplicates,
/// no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n_nodes: usize, mut edges: Vec<(usize, usize)>) -> Result<Self, GenError> {
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u == v {
                return Err(GenError::InvalidParameter(format!("self-loop at node {u}")));
            }
            if v >= n_nodes {
                return Err(GenError::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {n_nodes} nodes"
                )));
            }
            if i > 0 && edges[i - 1] == (u, v) {
                return Err(GenError::InvalidParameter(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self { n_nodes, edges })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbor lists, sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = alloc::vec![Vec::new(); self.n_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }
}

/// Preferential-attachment random graph: the first `affinity` nodes are
/// seeds, and each arriving node attaches to `affinity` distinct existing
/// nodes sampled without replacement with probability proportional to
/// `degree + 1`. Edge count is exactly `affinity * (n_nodes - affinity)`.
pub fn gen_graph(n_nodes: usize, affinity: usize, seed: u64) -> Result<Graph, GenError> {
    if affinity < 1 {
        return Err(GenError::InvalidParameter("affinity must be at least 1".into()));
    }
    if n_nodes <= affinity {
        return Err(GenError::InvalidParameter(format!(
            "n_nodes {n_nodes} leaves no room to attach with affinity {affinity}"
        )));
    }
    let mut r = rng::from_seed(seed);
    let mut degree = alloc::vec![0u64; n_nodes];
    let mut edges = Vec::with_capacity(affinity * (n_nodes - affinity));
    let mut chosen: Vec<usize> = Vec::with_capacity(affinity);
    for t in affinity..n_nodes {
        chosen.clear();
        while chosen.len() < affinity {
            // Weighted draw over 0..t by degree + 1, retrying duplicates.
            let total: u64 = degree[..t].iter().map(|d| d + 1).sum();
            let mut ticket = r.gen_range(0..total);
            let mut target = 0usize;
            for (v, &d) in degree[..t].iter().enumerate() {
                let w = d + 1;
                if ticket < w {
                    target = v;
                    break;
                }
                ticket -= w;
            }
            if !chosen.contains(&target) {
                chosen.push(target);
            }
        }
        chosen.sort_unstable();
        for &v in &chosen {
            edges.push((v, t));
            degree[v] += 1;
            degree[t] += 1;
        }
    }
    Graph::new(n_nodes, edges)
}

/// Erdős–Rényi alternative: each pair is an edge independently with
/// probability `p`.
pub fn gen_graph_er(n_nodes: usize, p: f64, seed: u64) -> Result<Graph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::InvalidParameter(format!("edge probability {p} not in [0, 1]")));
    }
    let mut r = rng::from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n_nodes {
        for v in (u + 1)..n_nodes {
            if r.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n_nodes, edges)
}

/// Minimum vertex cover: `min Σ x_v` with `-x_u - x_v ≤ -1` per edge.
pub fn gen_vc(g: &Graph) -> MipInstance {
    let rows = g
        .edges()
        .iter()
        .map(|&(u, v)| Row::new(alloc::vec![(u, -1.0), (v, -1.0)], -1.0))
        .collect();
    MipInstance::binary("vc", alloc::vec![1.0; g.n_nodes()], rows)
        .expect("VC instance is structurally valid")
}

/// Maximum independent set: `max Σ x_v` (stored negated) with
/// `x_u + x_v ≤ 1` per edge.
pub fn gen_mis(g: &Graph) -> MipInstance {
    let rows = g
        .edges()
        .iter()
        .map(|&(u, v)| Row::new(alloc::vec![(u, 1.0), (v, 1.0)], 1.0))
        .collect();
    MipInstance::binary_max("mis", alloc::vec![1.0; g.n_nodes()], rows)
        .expect("MIS instance is structurally valid")
}

/// Minimum dominating set: `min Σ x_v` with
/// `-x_v - Σ_{u ∈ N(v)} x_u ≤ -1` per node.
pub fn gen_ds(g: &Graph) -> MipInstance {
    let adj = g.adjacency();
    let rows = (0..g.n_nodes())
        .map(|v| {
            let mut coeffs = alloc::vec![(v, -1.0)];
            coeffs.extend(adj[v].iter().map(|&u| (u, -1.0)));
            Row::new(coeffs, -1.0)
        })
        .collect();
    MipInstance::binary("ds", alloc::vec![1.0; g.n_nodes()], rows)
        .expect("DS instance is structurally valid")
}

/// A combinatorial auction: bids are (item bundle, price) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionSpec {
    pub n_items: usize,
    pub bids: Vec<(Vec<usize>, f64)>,
}

impl AuctionSpec {
    pub fn new(n_items: usize, bids: Vec<(Vec<usize>, f64)>) -> Result<Self, GenError> {
        for (i, (bundle, price)) in bids.iter().enumerate() {
            if bundle.is_empty() {
                return Err(GenError::InvalidParameter(format!("bid {i} has an empty bundle")));
            }
            if let Some(&item) = bundle.iter().find(|&&item| item >= n_items) {
                return Err(GenError::InvalidParameter(format!(
                    "bid {i} references item {item} out of range"
                )));
            }
            if !(*price > 0.0) {
                return Err(GenError::InvalidParameter(format!("bid {i} has price {price} <= 0")));
            }
        }
        Ok(Self { n_items, bids })
    }
}

/// Winner determination MIP for an auction: `max Σ price_j x_j` (stored
/// negated) with `Σ_{j : i ∈ bundle_j} x_j ≤ 1` for every item `i` that
/// appears in at least one bid, items in ascending order.
pub fn auction_to_mip(spec: &AuctionSpec) -> MipInstance {
    let mut item_bids: Vec<Vec<usize>> = alloc::vec![Vec::new(); spec.n_items];
    for (j, (bundle, _)) in spec.bids.iter().enumerate() {
        for &item in bundle {
            item_bids[item].push(j);
        }
    }
    let rows = item_bids
        .iter()
        .filter(|bids| !bids.is_empty())
        .map(|bids| Row::new(bids.iter().map(|&j| (j, 1.0)).collect(), 1.0))
        .collect();
    let prices = spec.bids.iter().map(|(_, p)| *p).collect();
    MipInstance::binary_max("ca", prices, rows).expect("CA instance is structurally valid")
}

/// Generate an auction by random walks over a random item-compatibility
/// graph: each bid walks from a uniform start item collecting distinct items
/// until a target bundle size drawn from 2..=10 is reached (or the walk
/// stalls), and prices each bundle at `size * (1 + uniform[0, 0.5])` rounded
/// to 2 decimals.
pub fn gen_ca_spec(n_items: usize, n_bids: usize, seed: u64) -> Result<AuctionSpec, GenError> {
    if n_items < 1 || n_bids < 1 {
        return Err(GenError::InvalidParameter(format!(
            "need at least one item and one bid, got {n_items} items, {n_bids} bids"
        )));
    }
    let mut r = rng::from_seed(seed);
    // Compatibility graph with expected degree ~6.
    let adj = if n_items > 1 {
        let p = (6.0 / (n_items - 1) as f64).min(1.0);
        gen_graph_er(n_items, p, rng::derive_seed(seed, 0xca))?.adjacency()
    } else {
        alloc::vec![Vec::new(); 1]
    };
    let mut bids = Vec::with_capacity(n_bids);
    for _ in 0..n_bids {
        let target = r.gen_range(2usize..=10).min(n_items);
        let start = r.gen_range(0..n_items);
        let mut bundle = alloc::vec![start];
        let mut current = start;
        let mut steps = 0;
        while bundle.len() < target && steps < 50 {
            steps += 1;
            let neigh = &adj[current];
            if neigh.is_empty() {
                break;
            }
            current = neigh[r.gen_range(0..neigh.len())];
            if !bundle.contains(&current) {
                bundle.push(current);
            }
        }
        bundle.sort_unstable();
        let price = fx::round(bundle.len() as f64 * (1.0 + r.gen_range(0.0..0.5)) * 100.0) / 100.0;
        bids.push((bundle, price));
    }
    AuctionSpec::new(n_items, bids)
}

/// Generate a winner-determination instance directly.
pub fn gen_ca(n_items: usize, n_bids: usize, seed: u64) -> Result<MipInstance, GenError> {
    Ok(auction_to_mip(&gen_ca_spec(n_items, n_bids, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::{evaluate, Assignment};
    use crate::oracle;

    fn triangle() -> Graph {
        Graph::new(3, alloc::vec![(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn gen_graph_rejects_no_room() {
        assert!(matches!(gen_graph(4, 4, 1), Err(GenError::InvalidParameter(_))));
        assert!(matches!(gen_graph(3, 0, 1), Err(GenError::InvalidParameter(_))));
    }

    #[test]
    fn first_arrival_attaches_to_all_seeds() {
        let g = gen_graph(5, 4, 99).unwrap();
        assert_eq!(g.n_edges(), 4);
        assert!(g.edges().iter().all(|&(_, v)| v == 4));
    }

    #[test]
    fn edge_count_formula_and_determinism() {
        let g1 = gen_graph(200, 4, 7).unwrap();
        let g2 = gen_graph(200, 4, 7).unwrap();
        assert_eq!(g1.n_edges(), 4 * (200 - 4));
        assert_eq!(g1, g2);
        let g3 = gen_graph(200, 4, 8).unwrap();
        assert_ne!(g1, g3);
    }

    #[test]
    fn no_isolated_nodes_in_pa_graphs() {
        let g = gen_graph(60, 4, 3).unwrap();
        let adj = g.adjacency();
        assert!(adj.iter().all(|n| !n.is_empty()));
    }

    #[test]
    fn er_mode_is_deterministic() {
        let g1 = gen_graph_er(30, 0.2, 5).unwrap();
        let g2 = gen_graph_er(30, 0.2, 5).unwrap();
        assert_eq!(g1, g2);
        assert!(gen_graph_er(10, 1.5, 0).is_err());
    }

    #[test]
    fn vc_optima_match_brute_force() {
        let edgeless = Graph::new(4, alloc::vec![]).unwrap();
        assert_eq!(oracle::brute_force_optimum(&gen_vc(&edgeless)).unwrap().objective, 0.0);

        assert_eq!(oracle::brute_force_optimum(&gen_vc(&triangle())).unwrap().objective, 2.0);

        let path = Graph::new(3, alloc::vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(oracle::brute_force_optimum(&gen_vc(&path)).unwrap().objective, 1.0);
    }

    #[test]
    fn mis_optima_match_brute_force() {
        let edgeless = Graph::new(5, alloc::vec![]).unwrap();
        let inst = gen_mis(&edgeless);
        let best = oracle::brute_force_optimum(&inst).unwrap();
        assert_eq!(inst.original_sense_objective(best.objective), 5.0);

        let tri = gen_mis(&triangle());
        let best = oracle::brute_force_optimum(&tri).unwrap();
        assert_eq!(tri.original_sense_objective(best.objective), 1.0);
    }

    #[test]
    fn mis_and_vc_are_complements() {
        for seed in 0..6u64 {
            let g = gen_graph(6 + (seed as usize % 5), 2, seed).unwrap();
            let vc = oracle::brute_force_optimum(&gen_vc(&g)).unwrap().objective;
            let mis_inst = gen_mis(&g);
            let mis = mis_inst
                .original_sense_objective(oracle::brute_force_optimum(&mis_inst).unwrap().objective);
            assert_eq!(vc + mis, g.n_nodes() as f64, "seed {seed}");
        }
    }

    #[test]
    fn ds_optima_match_brute_force() {
        let single = Graph::new(1, alloc::vec![]).unwrap();
        assert_eq!(oracle::brute_force_optimum(&gen_ds(&single)).unwrap().objective, 1.0);

        let star = Graph::new(5, alloc::vec![(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(oracle::brute_force_optimum(&gen_ds(&star)).unwrap().objective, 1.0);

        assert_eq!(oracle::brute_force_optimum(&gen_ds(&triangle())).unwrap().objective, 1.0);
    }

    #[test]
    fn ca_single_item_picks_best_price() {
        let spec = AuctionSpec::new(
            1,
            alloc::vec![(alloc::vec![0], 3.0), (alloc::vec![0], 5.0)],
        )
        .unwrap();
        let inst = auction_to_mip(&spec);
        assert_eq!(inst.n_cons(), 1);
        let best = oracle::brute_force_optimum(&inst).unwrap();
        assert_eq!(inst.original_sense_objective(best.objective), 5.0);
    }

    #[test]
    fn ca_disjoint_bundles_sum_all_prices() {
        let spec = AuctionSpec::new(
            4,
            alloc::vec![(alloc::vec![0, 1], 2.5), (alloc::vec![2, 3], 4.0)],
        )
        .unwrap();
        let inst = auction_to_mip(&spec);
        let best = oracle::brute_force_optimum(&inst).unwrap();
        assert_eq!(inst.original_sense_objective(best.objective), 6.5);
    }

    #[test]
    fn ca_generator_counts_and_determinism() {
        let a = gen_ca(80, 100, 11).unwrap();
        let b = gen_ca(80, 100, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_vars(), 100);
        assert!(a.n_cons() <= 80);
        assert!(a.maximize_input());
        assert!(gen_ca(0, 5, 1).is_err());
    }

    #[test]
    fn trivial_witnesses_are_feasible() {
        let g = gen_graph(20, 3, 42).unwrap();
        let ones = Assignment::total(&alloc::vec![true; 20]);
        let zeros = Assignment::total(&alloc::vec![false; 20]);
        assert!(evaluate(&gen_vc(&g), &ones).unwrap().feasible);
        assert!(evaluate(&gen_ds(&g), &ones).unwrap().feasible);
        assert!(evaluate(&gen_mis(&g), &zeros).unwrap().feasible);

        let ca = gen_ca(15, 20, 4).unwrap();
        let zeros = Assignment::total(&alloc::vec![false; ca.n_vars()]);
        assert!(evaluate(&ca, &zeros).unwrap().feasible);
    }

    #[test]
    fn family_shapes_match_closed_forms() {
        let g = gen_graph(30, 4, 9).unwrap();
        let vc = gen_vc(&g);
        assert_eq!((vc.n_vars(), vc.n_cons()), (30, g.n_edges()));
        let ds = gen_ds(&g);
        assert_eq!((ds.n_vars(), ds.n_cons()), (30, 30));
        let mis = gen_mis(&g);
        assert_eq!((mis.n_vars(), mis.n_cons()), (30, g.n_edges()));
    }
}
