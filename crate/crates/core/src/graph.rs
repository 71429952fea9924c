//! Weighted undirected graphs, instance families, and brute-force references.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::VertexMask;
use crate::union_find::UnionFind;

/// Largest vertex count for which a dense adjacency view is materialized.
pub const DENSE_LIMIT: usize = 4096;

/// A hidden instance: `n` vertices with integer weights in `1..bound` on unordered pairs.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    bound: u64,
    edges: BTreeMap<(usize, usize), u64>,
    neighbors: Vec<Vec<(usize, u64)>>,
    // Present only when every weight is 1 and n <= DENSE_LIMIT.
    unit_rows: Option<Vec<VertexMask>>,
}

impl PartialEq for WeightedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.bound == other.bound && self.edges == other.edges
    }
}

impl Eq for WeightedGraph {}

impl WeightedGraph {
    /// Builds a graph from `(u, v, w)` triples. Zero weights are dropped.
    pub fn from_edges<I>(n: usize, bound: u64, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        if n == 0 {
            return Err(Error::Parameter("graph needs at least one vertex".into()));
        }
        if bound < 2 {
            return Err(Error::Parameter("weight bound must be at least 2".into()));
        }
        let mut map = BTreeMap::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::Parameter(format!("self-loop at {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Parameter(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if w >= bound {
                return Err(Error::Parameter(format!("weight {w} not below bound {bound}")));
            }
            if w == 0 {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if map.insert(key, w).is_some() {
                return Err(Error::Parameter(format!("duplicate pair ({},{})", key.0, key.1)));
            }
        }
        Ok(Self::from_map(n, bound, map))
    }

    fn from_map(n: usize, bound: u64, edges: BTreeMap<(usize, usize), u64>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for (&(u, v), &w) in &edges {
            neighbors[u].push((v, w));
            neighbors[v].push((u, w));
        }
        let unit_rows = if n <= DENSE_LIMIT && edges.values().all(|&w| w == 1) {
            let mut rows = vec![VertexMask::empty(n); n];
            for &(u, v) in edges.keys() {
                rows[u].insert(v);
                rows[v].insert(u);
            }
            Some(rows)
        } else {
            None
        };
        WeightedGraph { n, bound, edges, neighbors, unit_rows }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_map(n.max(1), 2, BTreeMap::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Exclusive weight bound `M`.
    pub fn weight_bound(&self) -> u64 {
        self.bound
    }

    pub fn weight(&self, u: usize, v: usize) -> u64 {
        if u == v {
            return 0;
        }
        *self.edges.get(&(u.min(v), u.max(v))).unwrap_or(&0)
    }

    /// Edges as `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, u64)] {
        &self.neighbors[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.neighbors[u].len()
    }

    /// Total weight from `u` into the vertices of `mask`.
    #[inline]
    pub fn weight_to(&self, u: usize, mask: &VertexMask) -> u64 {
        match &self.unit_rows {
            Some(rows) => rows[u].intersection_count(mask) as u64,
            None => self.neighbors[u]
                .iter()
                .filter(|(v, _)| mask.contains(*v))
                .map(|&(_, w)| w)
                .sum(),
        }
    }

    /// `χ_Xᵀ A χ_Y`; equals `w(X, Y)` when the sets are disjoint.
    pub fn weight_between(&self, x: &VertexMask, y: &VertexMask) -> u64 {
        x.iter().map(|u| self.weight_to(u, y)).sum()
    }

    pub fn cut_value_mask(&self, s: &VertexMask) -> u64 {
        self.weight_between(s, &s.complement())
    }

    pub fn additive_value_mask(&self, s: &VertexMask) -> u64 {
        self.weight_between(s, s) / 2
    }

    /// Total weight of edges with exactly one endpoint in `s`.
    pub fn cut_value(&self, s: &[usize]) -> u64 {
        self.cut_value_mask(&VertexMask::from_indices(self.n, s))
    }

    /// Total weight of edges with both endpoints in `s`.
    pub fn additive_value(&self, s: &[usize]) -> u64 {
        self.additive_value_mask(&VertexMask::from_indices(self.n, s))
    }

    /// Dense symmetric adjacency matrix with zero diagonal.
    pub fn dense_adjacency(&self) -> Result<Vec<Vec<u64>>> {
        if self.n > DENSE_LIMIT {
            return Err(Error::Capacity(format!("dense view limited to n <= {DENSE_LIMIT}")));
        }
        let mut a = vec![vec![0; self.n]; self.n];
        for (u, v, w) in self.edges() {
            a[u][v] = w;
            a[v][u] = w;
        }
        Ok(a)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn reference_components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.n);
        for (u, v, _) in self.edges() {
            uf.merge(u, v);
        }
        uf.groups()
    }

    pub fn reference_is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.n];
        for s in 0..self.n {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.neighbors[u] {
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn reference_is_acyclic(&self) -> bool {
        self.edge_count() + self.reference_components().len() == self.n
    }

    /// Serializes to the text format: `n`, then one `u v w` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (u, v, w) in self.edges() {
            out.push_str(&format!("{u} {v} {w}\n"));
        }
        out
    }

    /// Parses the text format. The weight bound becomes `max(2, max weight + 1)`.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut triples = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if fields.len() != 1 {
                        return Err(bad("expected vertex count".into()));
                    }
                    n = Some(fields[0].parse::<usize>().map_err(|e| bad(e.to_string()))?);
                }
                Some(nv) => {
                    if fields.len() != 3 {
                        return Err(bad("expected `u v w`".into()));
                    }
                    let u: usize = fields[0].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
                    let v: usize = fields[1].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
                    let w: u64 = fields[2].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
                    if u >= v || v >= nv {
                        return Err(bad(format!("need 0 <= u < v < {nv}")));
                    }
                    if w == 0 {
                        return Err(bad("weight must be positive".into()));
                    }
                    triples.push((u, v, w));
                }
            }
        }
        let n = n.ok_or(Error::Parse { line: 0, message: "missing vertex count".into() })?;
        let bound = triples.iter().map(|t| t.2 + 1).max().unwrap_or(2).max(2);
        Self::from_edges(n, bound, triples)
    }
}

/// Instance families for generated graphs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Empty,
    Path,
    Cycle,
    Matching,
    Complete,
    TwoCliques,
    ErdosRenyi { p: f64 },
    DRegular { d: usize },
    WeightedRandom { m: u64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Empty => "empty",
            Family::Path => "path",
            Family::Cycle => "cycle",
            Family::Matching => "matching",
            Family::Complete => "complete",
            Family::TwoCliques => "two_cliques",
            Family::ErdosRenyi { .. } => "erdos_renyi",
            Family::DRegular { .. } => "d_regular",
            Family::WeightedRandom { .. } => "weighted_random",
        }
    }

    /// Erdős–Rényi at the connectivity threshold scale `p = 2 ln n / n`.
    pub fn sparse_random(n: usize) -> Self {
        let p = if n <= 1 { 0.0 } else { (2.0 * (n as f64).ln() / n as f64).min(1.0) };
        Family::ErdosRenyi { p }
    }

    /// Parses a family name; parameterized families take their parameter from the arguments.
    pub fn parse(name: &str, n: usize, p: Option<f64>, d: Option<usize>, m: Option<u64>) -> Result<Self> {
        Ok(match name {
            "empty" => Family::Empty,
            "path" => Family::Path,
            "cycle" => Family::Cycle,
            "matching" => Family::Matching,
            "complete" => Family::Complete,
            "two_cliques" => Family::TwoCliques,
            "erdos_renyi" => match p {
                Some(p) => Family::ErdosRenyi { p },
                None => Family::sparse_random(n),
            },
            "d_regular" => Family::DRegular { d: d.unwrap_or(3) },
            "weighted_random" => Family::WeightedRandom { m: m.unwrap_or(4) },
            other => return Err(Error::Parameter(format!("unknown family `{other}`"))),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Generates an instance of `family` on `n` vertices; deterministic in `seed`.
pub fn generate(family: Family, n: usize, seed: u64) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut bound = 2;
    match family {
        Family::Empty => {}
        Family::Path => edges.extend((1..n).map(|v| (v - 1, v, 1))),
        Family::Cycle => {
            if n < 3 {
                return Err(Error::Parameter("cycle needs n >= 3".into()));
            }
            edges.extend((1..n).map(|v| (v - 1, v, 1)));
            edges.push((0, n - 1, 1));
        }
        Family::Matching => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            edges.extend(order.chunks_exact(2).map(|c| (c[0], c[1], 1)));
        }
        Family::Complete => {
            for u in 0..n {
                edges.extend((u + 1..n).map(|v| (u, v, 1)));
            }
        }
        Family::TwoCliques => {
            let half = n.div_ceil(2);
            for u in 0..n {
                for v in u + 1..n {
                    if (u < half) == (v < half) {
                        edges.push((u, v, 1));
                    }
                }
            }
        }
        Family::ErdosRenyi { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("edge probability {p} outside [0,1]")));
            }
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        edges.push((u, v, 1));
                    }
                }
            }
        }
        Family::DRegular { d } => {
            if d >= n || (d * n) % 2 == 1 {
                return Err(Error::Parameter(format!("no {d}-regular graph on {n} vertices")));
            }
            // Circulant C_n(1..d/2), plus antipodal chords for odd d, on a random relabeling.
            let mut label: Vec<usize> = (0..n).collect();
            label.shuffle(&mut rng);
            for i in 0..n {
                for s in 1..=d / 2 {
                    edges.push((label[i], label[(i + s) % n], 1));
                }
                if d % 2 == 1 && i < n / 2 {
                    edges.push((label[i], label[i + n / 2], 1));
                }
            }
        }
        Family::WeightedRandom { m } => {
            if m < 2 {
                return Err(Error::Parameter("weight bound must be at least 2".into()));
            }
            bound = m;
            for u in 0..n {
                for v in u + 1..n {
                    let w = rng.gen_range(0..m);
                    if w > 0 {
                        edges.push((u, v, w));
                    }
                }
            }
        }
    }
    WeightedGraph::from_edges(n, bound, edges)
}

/// Number of label bits `⌈log₂ n⌉`.
pub fn label_bits(n: usize) -> usize {
    crate::ceil_log2(n as u64) as usize
}

/// Splits `universe` by bit `bit` (1-based, least significant first) of each label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteSplit {
    pub bit: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl BipartiteSplit {
    pub fn new(universe: &[usize], bit: usize) -> Self {
        assert!(bit >= 1, "label bits are 1-based");
        let (right, left): (Vec<usize>, Vec<usize>) =
            universe.iter().partition(|&&v| (v >> (bit - 1)) & 1 == 1);
        BipartiteSplit { bit, left, right }
    }

    /// All `⌈log₂ n⌉` splits of the full vertex set.
    pub fn all(n: usize) -> Vec<Self> {
        let universe: Vec<usize> = (0..n).collect();
        (1..=label_bits(n)).map(|j| Self::new(&universe, j)).collect()
    }
}

/// One tree of a spanning forest: its vertex set and edge set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningTree {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// A forest with one tree per connected component.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningForest {
    pub trees: Vec<SpanningTree>,
}

impl SpanningForest {
    /// Checks that every edge is real, every tree is acyclic and spanning, and
    /// that tree vertex sets coincide with the components of `g`.
    pub fn validate(&self, g: &WeightedGraph) -> std::result::Result<(), String> {
        let mut seen = vec![false; g.n()];
        let mut uf = UnionFind::new(g.n());
        for (t, tree) in self.trees.iter().enumerate() {
            for &v in &tree.vertices {
                if v >= g.n() || seen[v] {
                    return Err(format!("tree {t}: vertex {v} repeated or out of range"));
                }
                seen[v] = true;
            }
            if tree.edges.len() + 1 != tree.vertices.len() {
                return Err(format!(
                    "tree {t}: {} edges on {} vertices",
                    tree.edges.len(),
                    tree.vertices.len()
                ));
            }
            let members: std::collections::HashSet<usize> = tree.vertices.iter().copied().collect();
            for &(u, v) in &tree.edges {
                if g.weight(u, v) == 0 {
                    return Err(format!("tree {t}: ({u},{v}) is not an edge"));
                }
                if !members.contains(&u) || !members.contains(&v) {
                    return Err(format!("tree {t}: edge ({u},{v}) leaves the tree"));
                }
                if !uf.merge(u, v) {
                    return Err(format!("tree {t}: edge ({u},{v}) closes a cycle"));
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(format!("vertex {v} not covered"));
        }
        let mut mine: Vec<Vec<usize>> = self
            .trees
            .iter()
            .map(|t| {
                let mut v = t.vertices.clone();
                v.sort_unstable();
                v
            })
            .collect();
        mine.sort();
        let mut reference = g.reference_components();
        reference.sort();
        if mine != reference {
            return Err("tree vertex sets differ from the connected components".into());
        }
        Ok(())
    }
}
