//! Connected components from cut queries by repeated supervertex contraction.
//!
//! The working state is a list of supervertices (vertex sets known to induce
//! connected subgraphs) plus a list of finished components. Each shrink round
//! walks the label-bit splits of the supervertex list, estimates superdegrees,
//! learns every superedge of low-degree supervertices, finds at least one
//! superedge of each high-degree supervertex, and contracts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ceil_log2;
use crate::error::{Error, Result};
use crate::graph::label_bits;
use crate::graph_learn::LearnOptions;
use crate::ledger::{ChargeForm, QueryCost};
use crate::mask::VertexMask;
use crate::matrix_learn::{learn_sparse_rows, Matrix};
use crate::oracle::{Biadjacency, OracleHandle};
use crate::quantum::compute_ay_mod;
use crate::sketch::approximate_count;
use crate::union_find::UnionFind;

/// A list of disjoint vertex sets.
pub type Sets = Vec<Vec<usize>>;

/// Modulus for supervertex biadjacency entries: `n²(M−1)`, at least 2.
pub fn supervertex_modulus(h: &OracleHandle) -> u64 {
    let n = h.n() as u64;
    (n * n * (h.weight_bound() - 1)).max(2)
}

pub(crate) fn pick(sets: &[Vec<usize>], idx: &[usize]) -> Sets {
    idx.iter().map(|&i| sets[i].clone()).collect()
}

pub(crate) fn singletons(vertices: &[usize]) -> Sets {
    vertices.iter().map(|&v| vec![v]).collect()
}

pub(crate) fn ln_n(h: &OracleHandle) -> f64 {
    (h.n() as f64).ln()
}

/// `⌈16ℓ·ln(size·n)/2^q⌉`, capped at `4ℓ⌈ln n⌉`.
pub(crate) fn bucket_sample_size(len: usize, bucket: usize, n: usize, q: i64) -> usize {
    let raw = 16.0 * len as f64 * ((bucket * n) as f64).ln() / 2f64.powi(q as i32);
    let cap = 4 * len * ((n as f64).ln().ceil() as usize).max(1);
    (raw.ceil() as usize).clamp(1, cap)
}

/// Distinct with-replacement draws of `size` indices from `0..len`, ascending.
pub(crate) fn sample_distinct<R: Rng + ?Sized>(len: usize, size: usize, rng: &mut R) -> Vec<usize> {
    let mut hit = VertexMask::empty(len);
    for _ in 0..size {
        hit.insert(rng.gen_range(0..len));
    }
    hit.to_vec()
}

/// Estimates `deg_T(S_i)` for every supervertex of `s` within a factor that
/// makes it a good estimate with probability `1−δ`.
pub fn approx_degree_sequence<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    s: &[Vec<usize>],
    t: &[Vec<usize>],
    delta: f64,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let modulus = supervertex_modulus(h);
    let repetition = opts.profile.repetition();
    let before = h.ledger();
    let form = ChargeForm::ApproxCount {
        strings: s.len(),
        length: t.len(),
        delta,
        repetition,
        modulus,
        cost: QueryCost::CUT_REDUCTION,
    };
    let mut b = Biadjacency::new(h, s.to_vec(), t.to_vec())?;
    let mut or_query = |y: &[bool]| -> Result<Vec<bool>> {
        Ok(compute_ay_mod(&mut b, y, modulus)?.into_iter().map(|v| v >= 1).collect())
    };
    let est = approximate_count(&mut or_query, s.len(), t.len(), delta, repetition, rng)?;
    h.accounting().log("approx_degree_sequence", form, before);
    Ok(est.estimate)
}

/// Learns `B(i,j) = |E(S_i, T_j)|` exactly (probability `1−δ`) when every
/// `S_i` has superdegree at most `bound`.
pub fn learn_low<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    s: &[Vec<usize>],
    t: &[Vec<usize>],
    bound: usize,
    delta: f64,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<Matrix> {
    let modulus = supervertex_modulus(h);
    let mut b = Biadjacency::new(h, s.to_vec(), t.to_vec())?;
    learn_sparse_rows(&mut b, modulus, bound, delta, opts.decoder, rng)
}

/// Nonzero positions of `m`, mapped through the row and column index lists.
pub(crate) fn support(m: &Matrix, rows: &[usize], cols: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (&i, row) in rows.iter().zip(m) {
        for (&j, &v) in cols.iter().zip(row) {
            if v > 0 {
                out.push((i, j));
            }
        }
    }
    out
}

/// Degree buckets `q` visited by the high-degree reductions.
pub(crate) fn bucket_range(d: f64, len: usize) -> std::ops::RangeInclusive<i64> {
    let lo = (d.log2().floor() as i64 - 1).max(0);
    lo..=(ceil_log2(len as u64) as i64 + 2)
}

pub(crate) fn in_bucket(g: f64, q: i64) -> bool {
    2f64.powi(q as i32 - 1) < g && g <= 2f64.powi(q as i32)
}

/// Finds at least one superedge for every `S_i` of superdegree at least `d`
/// (given a good estimate `g`); returns `(i, j)` superedge positions.
pub fn reduce_high<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    s: &[Vec<usize>],
    t: &[Vec<usize>],
    d: f64,
    g: &[f64],
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    let n = h.n();
    let bound = (opts.profile.probe_constant() * ln_n(h)).ceil() as usize;
    let delta = 1.0 / (n as f64 * n as f64);
    let mut found = Vec::new();
    for q in bucket_range(d, t.len()) {
        let bucket: Vec<usize> = (0..s.len()).filter(|&i| in_bucket(g[i], q)).collect();
        if bucket.is_empty() {
            continue;
        }
        let size = bucket_sample_size(t.len(), bucket.len(), n, q);
        let sample = sample_distinct(t.len(), size, rng);
        let b = learn_low(h, &pick(s, &bucket), &pick(t, &sample), bound, delta, opts, rng)?;
        found.extend(support(&b, &bucket, &sample));
    }
    Ok(found)
}

/// Merges supervertices along superedges. Merged sets whose members were all
/// low become finished components; the rest keep working.
pub fn contract(s: &[Vec<usize>], superedges: &[(usize, usize)], low: &[bool]) -> (Sets, Sets) {
    let mut uf = UnionFind::new(s.len());
    for &(a, b) in superedges {
        uf.merge(a, b);
    }
    let mut working = Vec::new();
    let mut done = Vec::new();
    for group in uf.groups() {
        let mut set: Vec<usize> = group.iter().flat_map(|&i| s[i].iter().copied()).collect();
        set.sort_unstable();
        if group.iter().all(|&i| low[i]) {
            done.push(set);
        } else {
            working.push(set);
        }
    }
    (working, done)
}

/// Position indices `t` of `0..k` with bit `j` (1-based) equal to `b`, and the rest.
pub(crate) fn position_split(k: usize, j: usize, b: usize) -> (Vec<usize>, Vec<usize>) {
    (0..k).partition(|&t| (t >> (j - 1)) & 1 == b)
}

/// One contraction round with degree threshold `d`.
pub fn shrink<R: Rng + ?Sized>(
    h: &mut OracleHandle,
    s: &[Vec<usize>],
    d: f64,
    opts: &LearnOptions,
    rng: &mut R,
) -> Result<(Sets, Sets)> {
    let k = s.len();
    let inv_n = 1.0 / h.n() as f64;
    let mut low = vec![true; k];
    let mut superedges = Vec::new();
    for j in 1..=ceil_log2(k as u64) as usize {
        for b in 0..2 {
            let (left, right) = position_split(k, j, b);
            let (ls, rs) = (pick(s, &left), pick(s, &right));
            let g = approx_degree_sequence(h, &ls, &rs, inv_n, opts, rng)?;
            let high: Vec<usize> = (0..left.len()).filter(|&i| g[i] >= d).collect();
            let light: Vec<usize> = (0..left.len()).filter(|&i| g[i] < d).collect();
            if !high.is_empty() {
                for &i in &high {
                    low[left[i]] = false;
                }
                let gh: Vec<f64> = high.iter().map(|&i| g[i]).collect();
                let found = reduce_high(h, &pick(&ls, &high), &rs, d / 4.0, &gh, opts, rng)?;
                superedges.extend(found.into_iter().map(|(i, jj)| (left[high[i]], right[jj])));
            }
            if !light.is_empty() {
                let bound = (2.0 * d).ceil() as usize;
                let m = learn_low(h, &pick(&ls, &light), &rs, bound, inv_n, opts, rng)?;
                let rows: Vec<usize> = light.iter().map(|&i| left[i]).collect();
                superedges.extend(support(&m, &rows, &right));
            }
        }
    }
    Ok(contract(s, &superedges, &low))
}

/// Outcome of a components run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentsRun {
    pub components: Sets,
    pub rounds: usize,
}

/// Rounds without progress tolerated before giving up: `4⌈log₂ n⌉`, at least 4.
pub fn stall_limit(n: usize) -> usize {
    4 * label_bits(n).max(1)
}

/// Checks that every set induces a connected subgraph and that finished sets
/// have no edges leaving them. Uses audit probes only.
pub(crate) fn audit_partition(h: &mut OracleHandle, working: &[Vec<usize>], done: &[Vec<usize>]) -> Result<()> {
    let n = h.n();
    let mut covered = VertexMask::empty(n);
    for set in working.iter().chain(done) {
        for &v in set {
            if covered.contains(v) {
                return Err(Error::Integrity(format!("vertex {v} in two sets")));
            }
            covered.insert(v);
        }
        h.accounting().ledger.audit += 1;
        if !induces_connected(h, set) {
            return Err(Error::Integrity(format!("set {set:?} is not connected")));
        }
    }
    for set in done {
        if h.audit_cut(set)? != 0 {
            return Err(Error::FailureEvent("a finished component has outgoing edges".into()));
        }
    }
    Ok(())
}

fn induces_connected(h: &OracleHandle, set: &[usize]) -> bool {
    let g = h.hidden();
    let members = VertexMask::from_indices(g.n(), set);
    let mut seen = VertexMask::empty(g.n());
    let mut stack = vec![set[0]];
    seen.insert(set[0]);
    while let Some(u) = stack.pop() {
        for &(v, _) in g.neighbors(u) {
            if members.contains(v) && !seen.contains(v) {
                seen.insert(v);
                stack.push(v);
            }
        }
    }
    seen.count() == set.len()
}

/// Connected components of the hidden graph from cut queries.
pub fn connected_components<R: Rng + ?Sized>(h: &mut OracleHandle, opts: &LearnOptions, rng: &mut R) -> Result<ComponentsRun> {
    let n = h.n();
    let d = opts.profile.degree_threshold(n);
    let audit = h.accounting().audit_checks() > 0;
    let mut working: Sets = (0..n).map(|v| vec![v]).collect();
    let mut done: Sets = Vec::new();
    let (mut rounds, mut stalled) = (0, 0);
    while !working.is_empty() {
        let (next, finished) = shrink(h, &working, d, opts, rng)?;
        rounds += 1;
        stalled = if next.len() >= working.len() { stalled + 1 } else { 0 };
        done.extend(finished);
        working = next;
        if audit {
            audit_partition(h, &working, &done)?;
        }
        if stalled >= stall_limit(n) && !working.is_empty() {
            return Err(Error::FailureEvent(format!("no progress for {stalled} rounds")));
        }
    }
    done.sort();
    Ok(ComponentsRun { components: done, rounds })
}
