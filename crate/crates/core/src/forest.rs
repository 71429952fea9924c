//! Spanning forests from cut queries, by tracking one witness edge per
//! contracted superedge, plus the bipartiteness, acyclicity and emptiness tests
//! built on top.
//!
//! A witness list holds `(u, v)` vertex pairs with `u` in a left supervertex
//! and `v` in a right supervertex; every pair is a real edge.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ceil_log2;
use crate::ceil_log2_real;
use crate::connectivity::{
    approx_degree_sequence, bucket_range, bucket_sample_size, in_bucket, learn_low, ln_n, pick, position_split,
    sample_distinct, singletons, stall_limit, Sets,
};
use crate::error::{Error, Result};
use crate::graph::{label_bits, BipartiteSplit, SpanningForest, SpanningTree};
use crate::graph_learn::LearnOptions;
use crate::ledger::{ChargeForm, ChargeKind};
use crate::mask::VertexMask;
use crate::oracle::{OracleHandle, OracleMode, Probe};
use crate::union_find::UnionFind;

/// Edge witnesses `(u, v)`, `u` on the left and `v` on the right.
pub type Witnesses = Vec<(usize, usize)>;

/// Tree edges per supervertex, parallel to a supervertex list.
pub type Trees = Vec<Vec<(usize, usize)>>;

fn flatten(sets: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let mut vertices = Vec::new();
    let mut owner = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        vertices.extend_from_slice(set);
        owner.extend(std::iter::repeat(i).take(set.len()));
    }
    (vertices, owner)
}

/// A witness for every superedge between `s` and `t` when both sides have
/// superdegree at most `bound`.
pub fn witness_low_low<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    s: &[Vec<usize>],
    t: &[Vec<usize>],
    bound: usize,
    delta: f64,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<Witnesses> {
    let (u, owner) = flatten(s);
    let b = learn_low(h, &singletons(&u), t, bound, delta / 2.0, opts, rng)?;
    // Per (i, j): the least vertex of S_i with an edge into T_j.
    let mut first: Vec<Vec<Option<usize>>> = vec![vec![None; t.len()]; s.len()];
    for (a, row) in b.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            let slot = &mut first[owner[a]][j];
            if w > 0 && slot.map_or(true, |x| u[a] < x) {
                *slot = Some(u[a]);
            }
        }
    }
    let x: Vec<usize> = first.iter().flatten().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let (y, _) = flatten(t);
    let d = learn_low(h, &singletons(&y), &singletons(&x), bound.saturating_mul(bound), delta / 2.0, opts, rng)?;
    let mut out = Vec::new();
    for (yi, row) in d.iter().enumerate() {
        for (xi, &w) in row.iter().enumerate() {
            if w > 0 {
                out.push((x[xi], y[yi]));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// At least one witness for every `S_i` with a superedge into `t`, given
/// superdegree at most `bound` on the left.
pub fn witness_low_high<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    s: &[Vec<usize>],
    t: &[Vec<usize>],
    bound: usize,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<Witnesses> {
    let n = h.n();
    let inv_n = 1.0 / n as f64;
    let (u, owner) = flatten(s);
    let b = learn_low(h, &singletons(&u), t, bound, inv_n, opts, rng)?;
    // First vertex per S_i with any edge into T, and its heaviest T_j count.
    let mut chosen: Vec<Option<(usize, u64)>> = vec![None; s.len()];
    for (a, row) in b.iter().enumerate() {
        if chosen[owner[a]].is_some() {
            continue;
        }
        let best = row.iter().copied().enumerate().fold((0, 0), |acc, (j, w)| if w > acc.1 { (j, w) } else { acc });
        if best.1 > 0 {
            chosen[owner[a]] = Some((u[a], best.1));
        }
    }
    let x: Vec<(usize, u64)> = chosen.into_iter().flatten().collect();
    let (y, _) = flatten(t);
    let probe_bound = (opts.profile.probe_constant() * bound as f64 * ln_n(h)).ceil() as usize;
    let mut out = Vec::new();
    for q in 0..=ceil_log2(y.len() as u64) as i64 {
        let xq: Vec<usize> = x.iter().filter(|&&(_, w)| in_bucket(w as f64, q)).map(|&(v, _)| v).collect();
        if xq.is_empty() {
            continue;
        }
        let size = bucket_sample_size(y.len(), xq.len(), n, q);
        let rq: Vec<usize> = sample_distinct(y.len(), size, rng).into_iter().map(|i| y[i]).collect();
        let c = learn_low(h, &singletons(&xq), &singletons(&rq), probe_bound, inv_n, opts, rng)?;
        for (xi, row) in c.iter().enumerate() {
            for (ri, &w) in row.iter().enumerate() {
                if w > 0 {
                    out.push((xq[xi], rq[ri]));
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// At least one witness for every `S_i` of superdegree at least `d`, given a
/// good estimate `g` of those superdegrees.
pub fn witness_reduce_high<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    s: &[Vec<usize>],
    t: &[Vec<usize>],
    d: f64,
    g: &[f64],
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<Witnesses> {
    let n = h.n();
    let bound = (opts.profile.probe_constant() * ln_n(h)).ceil() as usize;
    let mut out = Vec::new();
    for q in bucket_range(d, t.len()) {
        let bucket: Vec<usize> = (0..s.len()).filter(|&i| in_bucket(g[i], q)).collect();
        if bucket.is_empty() {
            continue;
        }
        let size = bucket_sample_size(t.len(), bucket.len(), n, q);
        let sample = sample_distinct(t.len(), size, rng);
        out.extend(witness_low_high(h, &pick(s, &bucket), &pick(t, &sample), bound, opts, rng)?);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Working and finished supervertices with their spanning trees.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Contracted {
    pub working: Sets,
    pub working_trees: Trees,
    pub done: Sets,
    pub done_trees: Trees,
}

/// Merges supervertices along witnesses, growing their spanning trees. A
/// witness whose endpoints already share a merged set adds no edge.
pub fn witness_contract(s: &[Vec<usize>], trees: &[Vec<(usize, usize)>], witnesses: &[(usize, usize)], low: &[bool]) -> Contracted {
    let mut owner = std::collections::HashMap::new();
    for (i, set) in s.iter().enumerate() {
        for &v in set {
            owner.insert(v, i);
        }
    }
    let mut uf = UnionFind::new(s.len());
    let mut accepted = Vec::new();
    for &(u, v) in witnesses {
        if uf.merge(owner[&u], owner[&v]) {
            accepted.push((u.min(v), u.max(v)));
        }
    }
    let mut extra: Vec<Vec<(usize, usize)>> = vec![Vec::new(); s.len()];
    for &(u, v) in &accepted {
        let root = uf.find(owner[&u]);
        extra[root].push((u, v));
    }
    let mut out = Contracted::default();
    for group in uf.groups() {
        let mut set: Vec<usize> = group.iter().flat_map(|&i| s[i].iter().copied()).collect();
        set.sort_unstable();
        let mut tree: Vec<(usize, usize)> = group.iter().flat_map(|&i| trees[i].iter().copied()).collect();
        tree.extend_from_slice(&extra[uf.find(group[0])]);
        tree.sort_unstable();
        if group.iter().all(|&i| low[i]) {
            out.done.push(set);
            out.done_trees.push(tree);
        } else {
            out.working.push(set);
            out.working_trees.push(tree);
        }
    }
    out
}

/// One witness-tracking contraction round with degree threshold `d`.
pub fn witness_shrink<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    s: &[Vec<usize>],
    trees: &[Vec<(usize, usize)>],
    d: f64,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<Contracted> {
    let k = s.len();
    let n = h.n() as f64;
    let mut low = vec![true; k];
    let mut witnesses = Vec::new();
    for j in 1..=ceil_log2(k as u64) as usize {
        for b in 0..2 {
            let (left, right) = position_split(k, j, b);
            let (ls, rs) = (pick(s, &left), pick(s, &right));
            let g = approx_degree_sequence(h, &ls, &rs, 1.0 / (n * n), opts, rng)?;
            let high: Vec<usize> = (0..left.len()).filter(|&i| g[i] >= d).collect();
            let light: Vec<usize> = (0..left.len()).filter(|&i| g[i] < d).collect();
            if !high.is_empty() {
                for &i in &high {
                    low[left[i]] = false;
                }
                let gh: Vec<f64> = high.iter().map(|&i| g[i]).collect();
                witnesses.extend(witness_reduce_high(h, &pick(&ls, &high), &rs, d / 4.0, &gh, opts, rng)?);
            }
            if light.is_empty() || rs.is_empty() {
                continue;
            }
            let lset = pick(&ls, &light);
            let f = approx_degree_sequence(h, &rs, &lset, 1.0 / (n * n), opts, rng)?;
            let plus: Vec<usize> = (0..rs.len()).filter(|&i| f[i] >= 16.0 * d).collect();
            let minus: Vec<usize> = (0..rs.len()).filter(|&i| f[i] < 16.0 * d).collect();
            if !plus.is_empty() {
                let found = witness_low_high(h, &lset, &pick(&rs, &plus), (2.0 * d).ceil() as usize, opts, rng)?;
                let (u, owner) = flatten(&lset);
                for &(a, _) in &found {
                    let i = owner[u.iter().position(|&x| x == a).expect("witness endpoint on the left")];
                    low[left[light[i]]] = false;
                }
                witnesses.extend(found);
            }
            if !minus.is_empty() {
                let bound = (32.0 * d).ceil() as usize;
                witnesses.extend(witness_low_low(h, &lset, &pick(&rs, &minus), bound, 1.0 / n, opts, rng)?);
            }
        }
    }
    witnesses.sort_unstable();
    witnesses.dedup();
    Ok(witness_contract(s, trees, &witnesses, &low))
}

/// Outcome of a spanning-forest run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestRun {
    pub forest: SpanningForest,
    pub rounds: usize,
}

fn audit_trees(h: &mut OracleHandle, trees: &[Vec<(usize, usize)>]) -> Result<()> {
    for &(u, v) in trees.iter().flatten() {
        h.accounting().ledger.audit += 1;
        if h.hidden().weight(u, v) == 0 {
            return Err(Error::Integrity(format!("witness ({u},{v}) is not an edge")));
        }
    }
    Ok(())
}

/// A spanning forest of the hidden graph from cut queries.
pub fn spanning_forest<R: Rng + ?Sized>(h: &mut OracleHandle, opts: &LearnOptions, rng: &mut R) -> Result<ForestRun> {
    let n = h.n();
    let d = opts.profile.degree_threshold(n);
    let audit = h.accounting().audit_checks() > 0;
    let mut working: Sets = (0..n).map(|v| vec![v]).collect();
    let mut trees: Trees = vec![Vec::new(); n];
    let mut done = Vec::new();
    let (mut rounds, mut stalled) = (0, 0);
    while !working.is_empty() {
        let next = witness_shrink(h, &working, &trees, d, opts, rng)?;
        rounds += 1;
        stalled = if next.working.len() >= working.len() { stalled + 1 } else { 0 };
        if audit {
            audit_trees(h, &next.working_trees)?;
            audit_trees(h, &next.done_trees)?;
            crate::connectivity::audit_partition(h, &next.working, &next.done)?;
        }
        done.extend(next.done.into_iter().zip(next.done_trees));
        working = next.working;
        trees = next.working_trees;
        if stalled >= stall_limit(n) && !working.is_empty() {
            return Err(Error::FailureEvent(format!("no progress for {stalled} rounds")));
        }
    }
    done.sort();
    let trees = done.into_iter().map(|(vertices, edges)| SpanningTree { vertices, edges }).collect();
    Ok(ForestRun { forest: SpanningForest { trees }, rounds })
}

/// Two-colouring of every tree from its smallest vertex; `true` is red.
pub fn two_colour(n: usize, forest: &SpanningForest) -> Vec<bool> {
    let mut colour = vec![false; n];
    for tree in &forest.trees {
        let mut adj: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
        for &(u, v) in &tree.edges {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        let Some(&root) = tree.vertices.iter().min() else { continue };
        let mut seen = BTreeSet::from([root]);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in adj.get(&u).into_iter().flatten() {
                if seen.insert(v) {
                    colour[v] = !colour[u];
                    stack.push(v);
                }
            }
        }
    }
    colour
}

/// Answer of a forest-based structural test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub answer: bool,
    /// The bipartiteness answer computed along the way.
    pub bipartite: bool,
    pub forest: SpanningForest,
    pub rounds: usize,
}

fn logged_cross_weight(h: &mut OracleHandle, label: &str, x: &[usize], y: &[usize]) -> Result<u64> {
    let before = h.ledger();
    let w = h.disjoint_matrix_cut_via_cut(x, y)?;
    h.accounting().log(label, ChargeForm::Direct { kind: ChargeKind::Cut, count: 3 }, before);
    Ok(w)
}

/// Edge-free check of both colour classes through every label-bit split;
/// always issues all `2·⌈log₂ n⌉` three-query checks.
fn colour_classes_independent(h: &mut OracleHandle, colour: &[bool]) -> Result<bool> {
    let mut clean = true;
    for side in [false, true] {
        let class: Vec<usize> = (0..colour.len()).filter(|&v| colour[v] == side).collect();
        for bit in 1..=label_bits(colour.len()) {
            let split = BipartiteSplit::new(&class, bit);
            clean &= logged_cross_weight(h, "colour_class_split", &split.left, &split.right)? == 0;
        }
    }
    Ok(clean)
}

/// Whether the hidden graph is bipartite.
pub fn test_bipartite<R: Rng + ?Sized>(h: &mut OracleHandle, opts: &LearnOptions, rng: &mut R) -> Result<TestOutcome> {
    let run = spanning_forest(h, opts, rng)?;
    let colour = two_colour(h.n(), &run.forest);
    let answer = colour_classes_independent(h, &colour)?;
    Ok(TestOutcome { answer, bipartite: answer, forest: run.forest, rounds: run.rounds })
}

/// Whether the hidden graph is a forest: bipartite, and every edge between
/// the colour classes is a forest edge.
pub fn test_acyclic<R: Rng + ?Sized>(h: &mut OracleHandle, opts: &LearnOptions, rng: &mut R) -> Result<TestOutcome> {
    let mut out = test_bipartite(h, opts, rng)?;
    if out.answer {
        let colour = two_colour(h.n(), &out.forest);
        let (red, blue): (Vec<usize>, Vec<usize>) = (0..h.n()).partition(|&v| colour[v]);
        let cross = logged_cross_weight(h, "colour_cross_edges", &blue, &red)?;
        let forest_edges: usize = out.forest.trees.iter().map(|t| t.edges.len()).sum();
        out.answer = cross == forest_edges as u64;
    }
    Ok(out)
}

/// One-sided emptiness test of the subgraph induced by `s`: `⌈log₂(1/ε)⌉`
/// random bipartitions of `s`, reporting empty only if none is crossed.
pub fn test_empty_subgraph<R: Rng + ?Sized>(h: &mut OracleHandle, s: &[usize], eps: f64, rng: &mut R) -> Result<bool> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("epsilon {eps} outside (0,1)")));
    }
    if h.mode() != OracleMode::Cut {
        return Err(Error::Mode("emptiness test needs a cut oracle".into()));
    }
    let n = h.n();
    let members = VertexMask::from_indices(n, s);
    let whole = members.count() == n;
    let reps = ceil_log2_real(1.0 / eps).max(1) as u64;
    let before = h.ledger();
    let mut empty = true;
    for _ in 0..reps {
        let x: Vec<usize> = members.iter().filter(|_| rng.gen_bool(0.5)).collect();
        let xm = VertexMask::from_indices(n, &x);
        let crossed = if whole {
            h.raw_cut(&xm, Probe::Charged)?
        } else {
            h.disjoint_matrix_cut_mask(&xm, &members.difference(&xm), Probe::Charged)?
        };
        empty &= crossed == 0;
    }
    let count = if whole { reps } else { 3 * reps };
    h.accounting().log("empty_test", ChargeForm::Direct { kind: ChargeKind::Cut, count }, before);
    Ok(empty)
}
