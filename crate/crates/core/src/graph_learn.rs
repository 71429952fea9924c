//! Reconstructing a hidden graph from additive or cut queries.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{label_bits, BipartiteSplit, WeightedGraph};
use crate::matrix_learn::{learn_dense, learn_m_nonzeros, learn_sparse_rows, DecoderChoice, Matrix};
use crate::oracle::{AdjacencyOracle, Biadjacency, OracleHandle};
use crate::profile::Profile;

/// What the caller promises about the hidden graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    /// Every vertex has at most this many neighbours.
    Degree(usize),
    /// The number of edges is unknown; it is estimated from degrees.
    Edges,
}

/// Decoder and repetition settings shared by the learning routines.
#[derive(Clone, Copy, Debug)]
pub struct LearnOptions {
    pub decoder: DecoderChoice,
    pub profile: Profile,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions { decoder: DecoderChoice::Auto, profile: Profile::Paper }
    }
}

/// Collects `(u, v, w)` observations, zeros included, and rejects conflicting weights.
#[derive(Default)]
struct EdgeUnion {
    seen: BTreeMap<(usize, usize), u64>,
}

impl EdgeUnion {
    fn add(&mut self, u: usize, v: usize, w: u64) -> Result<()> {
        let key = (u.min(v), u.max(v));
        match self.seen.insert(key, w) {
            Some(old) if old != w => Err(Error::Integrity(format!(
                "pair ({},{}) learned with weights {old} and {w}",
                key.0, key.1
            ))),
            _ => Ok(()),
        }
    }

    fn finish(self, n: usize, bound: u64) -> Result<WeightedGraph> {
        WeightedGraph::from_edges(n, bound, self.seen.into_iter().map(|((u, v), w)| (u, v, w)))
    }
}

/// Learns the graph behind an additive (or matrix) handle; each matrix query
/// costs 5 additive queries in additive mode.
pub fn learn_graph_additive<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    budget: Budget,
    delta: f64,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<WeightedGraph> {
    let (n, bound) = (h.n(), h.weight_bound());
    let mut adj = AdjacencyOracle::new(h)?;
    let a = match budget {
        Budget::Degree(d) => learn_sparse_rows(&mut adj, bound, d, delta, opts.decoder, rng)?,
        Budget::Edges => learn_m_nonzeros(&mut adj, bound, delta, opts.profile.repetition(), opts.decoder, rng)?.matrix,
    };
    let mut edges = EdgeUnion::default();
    for (u, row) in a.iter().enumerate() {
        for (v, &w) in row.iter().enumerate() {
            if u != v {
                edges.add(u, v, w)?;
            }
        }
    }
    edges.finish(n, bound)
}

/// Learns every vertex's row from its biadjacency against the rest of the
/// graph; exactly `3n⌈log₂ M⌉` cut queries for `n ≥ 2`.
pub fn learn_graph_cut_full(h: &mut OracleHandle) -> Result<WeightedGraph> {
    let (n, bound) = (h.n(), h.weight_bound());
    let mut edges = EdgeUnion::default();
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&v| v != i).collect();
        let right = others.iter().map(|&v| vec![v]).collect();
        let mut b = Biadjacency::new(h, vec![vec![i]], right)?;
        let row = learn_dense(&mut b, bound)?;
        for (&v, &w) in others.iter().zip(&row[0]) {
            edges.add(i, v, w)?;
        }
    }
    edges.finish(n, bound)
}

/// Learns the biadjacency matrix between disjoint vertex lists; each matrix
/// query costs 3 cut queries.
pub fn learn_bipartite_cut<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    left: &[usize],
    right: &[usize],
    budget: Budget,
    delta: f64,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<Matrix> {
    let bound = h.weight_bound();
    let singletons = |s: &[usize]| s.iter().map(|&v| vec![v]).collect();
    let mut b = Biadjacency::new(h, singletons(left), singletons(right))?;
    match budget {
        Budget::Degree(d) => learn_sparse_rows(&mut b, bound, d, delta, opts.decoder, rng),
        Budget::Edges => Ok(learn_m_nonzeros(&mut b, bound, delta, opts.profile.repetition(), opts.decoder, rng)?.matrix),
    }
}

/// Learns the graph as the union of its `⌈log₂ n⌉` label-bit bipartite
/// subgraphs, each with failure budget `δ/r`. Edges seen in several splits
/// must agree.
pub fn learn_graph_cut<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    budget: Budget,
    delta: f64,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<WeightedGraph> {
    let (n, bound) = (h.n(), h.weight_bound());
    let r = label_bits(n).max(1);
    let mut edges = EdgeUnion::default();
    for split in BipartiteSplit::all(n) {
        let b = learn_bipartite_cut(h, &split.left, &split.right, budget, delta / r as f64, opts, rng)?;
        for (&u, row) in split.left.iter().zip(&b) {
            for (&v, &w) in split.right.iter().zip(row) {
                edges.add(u, v, w)?;
            }
        }
    }
    edges.finish(n, bound)
}
