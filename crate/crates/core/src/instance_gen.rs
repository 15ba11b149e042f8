//! Synthetic instances: PageRank feasibility LPs and random bounded LPs.
//!
//! The PageRank LP for a graph on `n` nodes with column-stochastic link
//! matrix `S` and damping `θ` is
//!
//! ```text
//!   x_i − θ (S x)_i ≥ (1 − θ)/n    for every node i
//!   Σ x_i = 1,  x ≥ 0
//! ```
//!
//! with zero objective, so it has `n + 1` rows and `n` columns. Summing the
//! inequalities shows they are all tight at any feasible point, which is then
//! the PageRank vector.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lp_model::{LpProblem, SparseMatrix};

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: {msg}")]
    EdgeList { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PagerankConfig {
    pub n_nodes: usize,
    pub damping: f64,
    pub attachment: usize,
    pub seed: u64,
}

impl Default for PagerankConfig {
    fn default() -> Self {
        PagerankConfig { n_nodes: 1000, damping: 0.85, attachment: 3, seed: 0 }
    }
}

/// Directed graph as an edge list over nodes `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Digraph {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Preferential-attachment digraph: every node draws `attachment` distinct
/// out-neighbours with probability proportional to `1 + in-degree`.
pub fn preferential_attachment(n_nodes: usize, attachment: usize, seed: u64) -> Digraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // one token per node plus one per received edge
    let mut tokens: Vec<usize> = (0..n_nodes).collect();
    let mut edges = Vec::with_capacity(n_nodes * attachment);
    let mut chosen = HashSet::with_capacity(attachment);
    for src in 0..n_nodes {
        chosen.clear();
        let want = attachment.min(n_nodes - 1);
        while chosen.len() < want {
            let dst = tokens[rng.gen_range(0..tokens.len())];
            if dst != src && chosen.insert(dst) {
                edges.push((src, dst));
            }
        }
        for &(_, dst) in &edges[edges.len() - want..] {
            tokens.push(dst);
        }
    }
    Digraph { n_nodes, edges }
}

pub fn gen_pagerank(cfg: &PagerankConfig) -> Result<LpProblem, GenError> {
    if cfg.n_nodes < cfg.attachment + 1 || cfg.n_nodes < 2 {
        return Err(GenError::Config(format!(
            "n_nodes = {} is too small for attachment = {}",
            cfg.n_nodes, cfg.attachment
        )));
    }
    let graph = preferential_attachment(cfg.n_nodes, cfg.attachment, cfg.seed);
    pagerank_lp(&graph, cfg.damping)
}

/// Column-stochastic link matrix entries `(i, j, S_ij)` for edges `j → i`.
/// Nodes without out-edges get a self-loop; duplicate edges are merged.
pub fn link_matrix(graph: &Digraph) -> Vec<(usize, usize, f64)> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); graph.n_nodes];
    for &(s, d) in &graph.edges {
        out[s].push(d);
    }
    let mut t = Vec::with_capacity(graph.edges.len());
    for (j, dsts) in out.iter_mut().enumerate() {
        dsts.sort_unstable();
        dsts.dedup();
        if dsts.is_empty() {
            dsts.push(j);
        }
        let w = 1.0 / dsts.len() as f64;
        t.extend(dsts.iter().map(|&i| (i, j, w)));
    }
    t
}

pub fn pagerank_lp(graph: &Digraph, damping: f64) -> Result<LpProblem, GenError> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(GenError::Config(format!("damping {damping} must lie in (0, 1)")));
    }
    let n = graph.n_nodes;
    if n == 0 {
        return Err(GenError::Config("graph has no nodes".into()));
    }
    if let Some(&(s, d)) = graph.edges.iter().find(|&&(s, d)| s >= n || d >= n) {
        return Err(GenError::Config(format!("edge ({s}, {d}) out of range")));
    }
    let g_t = (0..n)
        .map(|i| (i, i, 1.0))
        .chain(link_matrix(graph).into_iter().map(|(i, j, s)| (i, j, -damping * s)));
    let g = SparseMatrix::from_triplets(n, n, g_t).expect("indices checked");
    let a = SparseMatrix::from_triplets(1, n, (0..n).map(|j| (0, j, 1.0))).expect("indices checked");
    let h = vec![(1.0 - damping) / n as f64; n];
    LpProblem::new(a, g, vec![0.0; n], vec![1.0], h, vec![0.0; n], vec![f64::INFINITY; n])
        .map_err(|e| GenError::Config(e.to_string()))
}

/// Reads whitespace-separated `src dst` pairs; `#` starts a comment. Node ids
/// are renumbered densely in increasing id order.
pub fn read_edge_list(reader: impl BufRead) -> Result<Digraph, GenError> {
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        let mut next = || -> Result<u64, GenError> {
            let tok = it.next().ok_or_else(|| GenError::EdgeList { line: idx + 1, msg: "expected two ids".into() })?;
            tok.parse().map_err(|_| GenError::EdgeList { line: idx + 1, msg: format!("bad node id '{tok}'") })
        };
        let (s, d) = (next()?, next()?);
        raw.push((s, d));
    }
    let mut ids = BTreeMap::new();
    for &(s, d) in &raw {
        ids.insert(s, 0);
        ids.insert(d, 0);
    }
    for (k, v) in ids.values_mut().enumerate() {
        *v = k;
    }
    Ok(Digraph { n_nodes: ids.len(), edges: raw.iter().map(|(s, d)| (ids[s], ids[d])).collect() })
}

/// Random LP `min cᵀx  s.t.  Gx ≥ h, 0 ≤ x ≤ 1`, feasible by construction:
/// `h = Gx̂ − |noise|` for a sampled `x̂ ∈ [0,1]ⁿ`.
pub fn gen_random_lp(m: usize, n: usize, density: f64, seed: u64) -> LpProblem {
    random_lp_with_point(m, n, density, seed).0
}

/// [`gen_random_lp`] also returning the interior point `x̂`.
pub fn random_lp_with_point(m: usize, n: usize, density: f64, seed: u64) -> (LpProblem, Vec<f64>) {
    assert!(m >= 1 && n >= 1, "need at least one row and one column");
    assert!(density > 0.0 && density <= 1.0, "density must lie in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_hat: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
    let mut t = Vec::new();
    for i in 0..m {
        let before = t.len();
        for j in 0..n {
            if rng.gen::<f64>() < density {
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
        if t.len() == before {
            t.push((i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0)));
        }
    }
    let g = SparseMatrix::from_triplets(m, n, t).expect("indices in range");
    let gx = g.mul_vec(crate::linalg::Exec::Sequential, &x_hat);
    let h: Vec<f64> = gx.iter().map(|v| v - 0.5 * rng.gen::<f64>()).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let p = LpProblem::new(SparseMatrix::zeros(0, n), g, c, vec![], h, vec![0.0; n], vec![1.0; n])
        .expect("generated data is consistent");
    (p, x_hat)
}
