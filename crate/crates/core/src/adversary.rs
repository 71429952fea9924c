//! Two weighted graphs that agree on a given list of cut queries but differ in
//! total edge weight, built from an exact integer certificate.
//!
//! Pairs `{u, v}` with `u > v` are laid out column-major over the strict lower
//! triangle: `(1,0), (2,0), …, (n−1,0), (2,1), …`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// All `n(n−1)/2` pairs `(i, j)`, `i > j`, in column-major lower-triangle order.
pub fn symvec_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|j| (j + 1..n).map(move |i| (i, j))).collect()
}

/// Position of the pair `{i, j}` in [`symvec_pairs`].
pub fn symvec_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.max(j), i.min(j));
    assert!(i < n && i != j, "need distinct vertices below n");
    j * (n - 1) - j * j.saturating_sub(1) / 2 + (i - j - 1)
}

/// The strict lower triangle of a symmetric zero-diagonal matrix as a vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymVec<T> {
    pub n: usize,
    pub entries: Vec<T>,
}

impl<T: Clone + Zero> SymVec<T> {
    pub fn from_matrix(c: &[Vec<T>]) -> Self {
        let n = c.len();
        SymVec { n, entries: symvec_pairs(n).into_iter().map(|(i, j)| c[i][j].clone()).collect() }
    }

    pub fn to_matrix(&self) -> Vec<Vec<T>> {
        let mut c = vec![vec![T::zero(); self.n]; self.n];
        for ((i, j), v) in symvec_pairs(self.n).into_iter().zip(&self.entries) {
            c[i][j] = v.clone();
            c[j][i] = v.clone();
        }
        c
    }
}

/// Determinant by fraction-free Gaussian elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let k = m.len();
    if k == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for p in 0..k - 1 {
        if a[p][p].is_zero() {
            match (p + 1..k).find(|&r| !a[r][p].is_zero()) {
                Some(r) => {
                    a.swap(p, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in p + 1..k {
            for j in p + 1..k {
                a[i][j] = (&a[i][j] * &a[p][p] - &a[i][p] * &a[p][j]) / &prev;
            }
            a[i][p] = BigInt::zero();
        }
        prev = a[p][p].clone();
    }
    sign * &a[k - 1][k - 1]
}

/// Adjugate `adj(G)` with `adj(G)[j][i] = (−1)^{i+j}·det(G without row i, column j)`.
pub fn adjugate(g: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let k = g.len();
    let mut adj = vec![vec![BigInt::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            let minor: Vec<Vec<BigInt>> = (0..k)
                .filter(|&r| r != i)
                .map(|r| (0..k).filter(|&c| c != j).map(|c| g[r][c].clone()).collect())
                .collect();
            let d = determinant(&minor);
            adj[j][i] = if (i + j) % 2 == 0 { d } else { -d };
        }
    }
    adj
}

fn gram(columns: &[Vec<bool>]) -> Vec<Vec<BigInt>> {
    columns
        .iter()
        .map(|a| columns.iter().map(|b| BigInt::from(a.iter().zip(b).filter(|(x, y)| **x && **y).count())).collect())
        .collect()
}

/// `ŷ = det(AᵀA)·b − A·adj(AᵀA)·Aᵀb` for Boolean `A` given by its `k` columns
/// of length `N`. Satisfies `ŷᵀA = 0` and `ŷᵀb = det(AᵀA)·‖b − proj b‖² ≠ 0`.
pub fn fredholm_certificate(columns: &[Vec<bool>], b: &[bool]) -> Result<Vec<BigInt>> {
    let rows = b.len();
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::Parameter("columns and target differ in length".into()));
    }
    let g = gram(columns);
    let det = determinant(&g);
    if det.is_zero() {
        return Err(Error::Rank);
    }
    let adj = adjugate(&g);
    let atb: Vec<BigInt> = columns.iter().map(|c| BigInt::from(c.iter().zip(b).filter(|(x, y)| **x && **y).count())).collect();
    let z: Vec<BigInt> = adj.iter().map(|row| row.iter().zip(&atb).map(|(a, v)| a * v).sum()).collect();
    let y: Vec<BigInt> = (0..rows)
        .map(|r| {
            let az: BigInt = columns.iter().zip(&z).filter(|(c, _)| c[r]).map(|(_, v)| v.clone()).sum();
            (if b[r] { det.clone() } else { BigInt::zero() }) - az
        })
        .collect();
    for c in columns {
        let dot: BigInt = y.iter().zip(c).filter(|(_, x)| **x).map(|(v, _)| v.clone()).sum();
        if !dot.is_zero() {
            return Err(Error::Integrity("certificate is not orthogonal to a column".into()));
        }
    }
    if y.iter().all(Zero::is_zero) {
        return Err(Error::Solvable);
    }
    Ok(y)
}

/// `‖ŷ‖∞ ≤ N^{k+1/2}·k^{k/2}`, checked as `‖ŷ‖∞² ≤ N^{2k+1}·k^k`.
pub fn within_certificate_bound(y: &[BigInt], rows: usize, k: usize) -> bool {
    let norm = y.iter().map(|v| v.abs()).max().unwrap_or_default();
    let bound = BigInt::from(rows).pow(2 * k as u32 + 1) * BigInt::from(k).pow(k as u32);
    &norm * &norm <= bound
}

/// The pair column of a cut query: 1 on pairs split by `x`.
pub fn cut_column(n: usize, x: &[usize]) -> Vec<bool> {
    let mut inside = vec![false; n];
    for &v in x {
        inside[v] = true;
    }
    symvec_pairs(n).into_iter().map(|(i, j)| inside[i] != inside[j]).collect()
}

/// Distinct, linearly independent columns, kept greedily in input order.
pub fn independent_columns(columns: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let mut kept: Vec<Vec<bool>> = Vec::new();
    for c in columns {
        if kept.contains(c) {
            continue;
        }
        kept.push(c.clone());
        if determinant(&gram(&kept)).is_zero() {
            kept.pop();
        }
    }
    kept
}

/// Two graphs indistinguishable by the given cut queries.
#[derive(Clone, Debug)]
pub struct AdversaryPair {
    pub g1: WeightedGraph,
    pub g2: WeightedGraph,
    /// Uniform weight of every pair in `g1`.
    pub base_weight: u64,
    pub certificate: Vec<BigInt>,
    /// Columns that entered the certificate.
    pub rank: usize,
}

/// What the pair demonstrates, recomputed from the graphs themselves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryReport {
    pub query_answers: Vec<(u64, u64)>,
    pub totals: (u64, u64),
    pub y_inf_norm: String,
    pub certificate_bound_holds: bool,
}

impl AdversaryPair {
    pub fn report(&self, queries: &[Vec<usize>]) -> AdversaryReport {
        let n = self.g1.n();
        let norm = self.certificate.iter().map(|v| v.abs()).max().unwrap_or_default();
        AdversaryReport {
            query_answers: queries.iter().map(|x| (self.g1.cut_value(x), self.g2.cut_value(x))).collect(),
            totals: (self.g1.total_weight(), self.g2.total_weight()),
            y_inf_norm: norm.to_string(),
            certificate_bound_holds: self.rank == 0 || within_certificate_bound(&self.certificate, n * (n - 1) / 2, self.rank),
        }
    }
}

fn to_weight(v: &BigInt) -> Result<u64> {
    if v.is_negative() {
        return Err(Error::Integrity("negative adversary weight".into()));
    }
    v.to_u64().ok_or_else(|| Error::Capacity("adversary weight exceeds u64".into()))
}

/// Builds `G1` (weight `m` on every pair) and `G2 = G1 + ŷ` for `k < n/2`
/// queries, with `m = n^{2k+1}·⌈k^{k/2}⌉`.
pub fn build_adversary_pair(n: usize, queries: &[Vec<usize>]) -> Result<AdversaryPair> {
    let k = queries.len();
    if n < 2 || 2 * k >= n {
        return Err(Error::Parameter(format!("need n >= 2 and k < n/2, got n={n}, k={k}")));
    }
    if let Some(&v) = queries.iter().flatten().find(|&&v| v >= n) {
        return Err(Error::Parameter(format!("vertex {v} out of range")));
    }
    let pairs = symvec_pairs(n);
    let columns: Vec<Vec<bool>> = queries.iter().map(|x| cut_column(n, x)).collect();
    let kept = independent_columns(&columns);
    let y = if kept.is_empty() {
        let mut y = vec![BigInt::zero(); pairs.len()];
        y[0] = BigInt::one();
        y
    } else {
        fredholm_certificate(&kept, &vec![true; pairs.len()])?
    };
    let kk = BigInt::from(k).pow(k as u32);
    let mut root = kk.sqrt();
    if &root * &root < kk {
        root += 1;
    }
    let m = BigInt::from(n).pow(2 * k as u32 + 1) * root.max(BigInt::one());
    let base = to_weight(&m)?;
    let w2: Vec<u64> = y.iter().map(|v| to_weight(&(&m + v))).collect::<Result<_>>()?;
    let bound = w2.iter().copied().max().unwrap_or(0).max(base).checked_add(1).ok_or_else(|| Error::Capacity("weight bound overflow".into()))?;
    let g1 = WeightedGraph::from_edges(n, bound, pairs.iter().map(|&(i, j)| (j, i, base)))?;
    let g2 = WeightedGraph::from_edges(n, bound, pairs.iter().zip(&w2).map(|(&(i, j), &w)| (j, i, w)))?;
    Ok(AdversaryPair { g1, g2, base_weight: base, certificate: y, rank: kept.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn symvec_layout() {
        assert_eq!(symvec_pairs(4), vec![(1, 0), (2, 0), (3, 0), (2, 1), (3, 1), (3, 2)]);
        for (idx, (i, j)) in symvec_pairs(7).into_iter().enumerate() {
            assert_eq!(symvec_index(7, i, j), idx);
            assert_eq!(symvec_index(7, j, i), idx);
        }
        let c: Vec<Vec<i64>> = (0..5).map(|i| (0..5).map(|j| if i == j { 0 } else { (i + j) as i64 }).collect()).collect();
        let s = SymVec::from_matrix(&c);
        assert_eq!(s.entries.len(), 10);
        assert_eq!(s.to_matrix(), c);
    }

    #[test]
    fn determinant_and_adjugate() {
        let m = vec![big(&[2, 0, 1]), big(&[1, 3, 2]), big(&[1, 1, 2])];
        assert_eq!(determinant(&m), BigInt::from(6));
        let swap = vec![big(&[0, 1]), big(&[1, 0])];
        assert_eq!(determinant(&swap), BigInt::from(-1));
        let adj = adjugate(&m);
        // G·adj(G) = det(G)·I.
        for i in 0..3 {
            for j in 0..3 {
                let v: BigInt = (0..3).map(|t| &m[i][t] * &adj[t][j]).sum();
                assert_eq!(v, BigInt::from(6 * (i == j) as i64));
            }
        }
    }

    #[test]
    fn worked_certificate() {
        let a = vec![vec![true, true, true, false, false, false]];
        let y = fredholm_certificate(&a, &[true; 6]).unwrap();
        assert_eq!(y, big(&[0, 0, 0, 3, 3, 3]));
        let b = [false, false, false, true, false, true];
        assert_eq!(fredholm_certificate(&a, &b).unwrap(), big(&[0, 0, 0, 3, 0, 3]));
        assert_eq!(fredholm_certificate(&[a[0].clone(), a[0].clone()], &[true; 6]), Err(Error::Rank));
        assert_eq!(fredholm_certificate(&a, &a[0]), Err(Error::Solvable));
    }

    #[test]
    fn random_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut checked = 0;
        while checked < 30 {
            let cols: Vec<Vec<bool>> = (0..3).map(|_| (0..10).map(|_| rng.gen_bool(0.5)).collect()).collect();
            let b: Vec<bool> = (0..10).map(|_| rng.gen_bool(0.5)).collect();
            let Ok(y) = fredholm_certificate(&cols, &b) else { continue };
            let yb: BigInt = y.iter().zip(&b).filter(|(_, x)| **x).map(|(v, _)| v.clone()).sum();
            assert!(!yb.is_zero());
            assert!(within_certificate_bound(&y, 10, 3));
            checked += 1;
        }
    }

    #[test]
    fn pair_examples() {
        let q = vec![vec![0]];
        let pair = build_adversary_pair(4, &q).unwrap();
        let r = pair.report(&q);
        assert_eq!(pair.base_weight, 64);
        assert_eq!(r.query_answers, vec![(192, 192)]);
        assert_eq!(r.totals.1 - r.totals.0, 9);

        let pair = build_adversary_pair(4, &[]).unwrap();
        assert_eq!(pair.report(&[]).totals.1, pair.report(&[]).totals.0 + 1);

        let dup = vec![vec![0, 1], vec![2, 3, 4, 5]];
        let pair = build_adversary_pair(6, &dup).unwrap();
        assert_eq!(pair.rank, 1);
        let r = pair.report(&dup);
        assert!(r.query_answers.iter().all(|(a, b)| a == b));
        assert_ne!(r.totals.0, r.totals.1);
        assert!(build_adversary_pair(4, &[vec![0], vec![1]]).is_err());
    }
}
