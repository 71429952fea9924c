//! Charged access to a hidden graph and the constant-overhead reductions
//! between cut, additive, and matrix cut queries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::ledger::{Accounting, QueryCost, QueryLedger};
use crate::mask::VertexMask;
use crate::matrix_oracle::MatrixOracle;

/// Which primitive the handle answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Cut,
    Additive,
    /// Direct matrix cut queries on the adjacency matrix, charged 1 each.
    Matrix,
}

/// Whether an evaluation counts against the bounds or only as an audit probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    Charged,
    Audit,
}

/// Gatekeeper to a hidden graph. Algorithms see the vertex count and the
/// weight bound; everything else flows through counted queries.
#[derive(Clone, Debug)]
pub struct OracleHandle {
    hidden: WeightedGraph,
    mode: OracleMode,
    acct: Accounting,
}

impl OracleHandle {
    pub fn new(hidden: WeightedGraph, mode: OracleMode) -> Self {
        Self::with_accounting(hidden, mode, Accounting::default())
    }

    pub fn with_accounting(hidden: WeightedGraph, mode: OracleMode, acct: Accounting) -> Self {
        OracleHandle { hidden, mode, acct }
    }

    pub fn n(&self) -> usize {
        self.hidden.n()
    }

    /// The public weight bound `M`.
    pub fn weight_bound(&self) -> u64 {
        self.hidden.weight_bound()
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn ledger(&self) -> QueryLedger {
        self.acct.ledger
    }

    pub fn accounting(&mut self) -> &mut Accounting {
        &mut self.acct
    }

    pub(crate) fn hidden(&self) -> &WeightedGraph {
        &self.hidden
    }

    fn require(&self, mode: OracleMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::Mode(format!("handle is in {:?} mode, need {:?}", self.mode, mode)));
        }
        Ok(())
    }

    fn count(&mut self, probe: Probe, cost: QueryCost) {
        match probe {
            Probe::Charged => self.acct.ledger.add_charged(cost),
            Probe::Audit => self.acct.ledger.audit += cost.units,
        }
    }

    fn mask(&self, s: &[usize]) -> Result<VertexMask> {
        if let Some(&v) = s.iter().find(|&&v| v >= self.n()) {
            return Err(Error::Parameter(format!("vertex {v} out of range")));
        }
        Ok(VertexMask::from_indices(self.n(), s))
    }

    pub(crate) fn raw_cut(&mut self, s: &VertexMask, probe: Probe) -> Result<u64> {
        self.require(OracleMode::Cut)?;
        self.count(probe, QueryCost { kind: crate::ledger::ChargeKind::Cut, units: 1 });
        Ok(self.hidden.cut_value_mask(s))
    }

    pub(crate) fn raw_additive(&mut self, s: &VertexMask, probe: Probe) -> Result<u64> {
        self.require(OracleMode::Additive)?;
        self.count(probe, QueryCost { kind: crate::ledger::ChargeKind::Additive, units: 1 });
        Ok(self.hidden.additive_value_mask(s))
    }

    /// `c(S)`; one cut query.
    pub fn cut_query(&mut self, s: &[usize]) -> Result<u64> {
        let m = self.mask(s)?;
        self.raw_cut(&m, Probe::Charged)
    }

    /// `c(S)` as an uncharged audit probe.
    pub fn audit_cut(&mut self, s: &[usize]) -> Result<u64> {
        let m = self.mask(s)?;
        self.raw_cut(&m, Probe::Audit)
    }

    /// `a(S)`; one additive query.
    pub fn additive_query(&mut self, s: &[usize]) -> Result<u64> {
        let m = self.mask(s)?;
        self.raw_additive(&m, Probe::Charged)
    }

    /// `χ_Xᵀ A χ_Y`; one direct matrix cut query.
    pub fn matrix_cut(&mut self, x: &[usize], y: &[usize]) -> Result<u64> {
        self.require(OracleMode::Matrix)?;
        let (xm, ym) = (self.mask(x)?, self.mask(y)?);
        self.acct.ledger.add_charged(QueryCost::DIRECT_MATRIX);
        Ok(self.hidden.weight_between(&xm, &ym))
    }

    pub(crate) fn disjoint_matrix_cut_mask(
        &mut self,
        x: &VertexMask,
        y: &VertexMask,
        probe: Probe,
    ) -> Result<u64> {
        self.require(OracleMode::Cut)?;
        if x.intersects(y) {
            return Err(Error::Disjointness);
        }
        let cx = self.raw_cut(x, probe)?;
        let cy = self.raw_cut(y, probe)?;
        let cxy = self.raw_cut(&x.union(y), probe)?;
        if probe == Probe::Charged {
            self.acct.ledger.disjoint_matrix_cut += 1;
        }
        Ok((cx + cy - cxy) / 2)
    }

    /// `w(X, Y)` for disjoint `X, Y` from `½(c(X) + c(Y) − c(X∪Y))`; three cut queries.
    pub fn disjoint_matrix_cut_via_cut(&mut self, x: &[usize], y: &[usize]) -> Result<u64> {
        let (xm, ym) = (self.mask(x)?, self.mask(y)?);
        self.disjoint_matrix_cut_mask(&xm, &ym, Probe::Charged)
    }

    pub(crate) fn matrix_cut_via_additive_mask(
        &mut self,
        x: &VertexMask,
        y: &VertexMask,
        probe: Probe,
    ) -> Result<u64> {
        self.require(OracleMode::Additive)?;
        let x_only = x.difference(y);
        let y_only = y.difference(x);
        let sym = self.raw_additive(&x_only.union(&y_only), probe)?;
        let ax = self.raw_additive(x, probe)?;
        let ay = self.raw_additive(y, probe)?;
        let ax_only = self.raw_additive(&x_only, probe)?;
        let ay_only = self.raw_additive(&y_only, probe)?;
        // uᵀAu = 2a(U) turns ½(A(x₋+y₋) + A(x) + A(y)) − A(x₋) − A(y₋) into this.
        Ok(sym + ax + ay - 2 * ax_only - 2 * ay_only)
    }

    /// `χ_Xᵀ A χ_Y` for arbitrary `X, Y`; five additive queries.
    pub fn matrix_cut_via_additive(&mut self, x: &[usize], y: &[usize]) -> Result<u64> {
        let (xm, ym) = (self.mask(x)?, self.mask(y)?);
        self.matrix_cut_via_additive_mask(&xm, &ym, Probe::Charged)
    }

    /// `c(S) = a(V) − a(S) − a(V∖S)`; three additive queries.
    pub fn cut_via_additive(&mut self, s: &[usize]) -> Result<u64> {
        let sm = self.mask(s)?;
        let all = self.raw_additive(&VertexMask::full(self.n()), Probe::Charged)?;
        let inside = self.raw_additive(&sm, Probe::Charged)?;
        let outside = self.raw_additive(&sm.complement(), Probe::Charged)?;
        Ok(all - inside - outside)
    }

    /// `xᵀBy` for the (super)biadjacency matrix between `left` and `right`
    /// set lists; three cut queries.
    pub fn biadjacency_cut_query(
        &mut self,
        left: &[Vec<usize>],
        right: &[Vec<usize>],
        x: &[bool],
        y: &[bool],
    ) -> Result<u64> {
        let mut b = Biadjacency::new(self, left.to_vec(), right.to_vec())?;
        b.query(x, y, Probe::Charged)
    }
}

/// The biadjacency matrix `B(i,j) = w(S_i, T_j)` between disjoint set lists,
/// served by the three-cut reduction.
pub struct Biadjacency<'h> {
    handle: &'h mut OracleHandle,
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
}

impl<'h> Biadjacency<'h> {
    pub fn new(handle: &'h mut OracleHandle, left: Vec<Vec<usize>>, right: Vec<Vec<usize>>) -> Result<Self> {
        handle.require(OracleMode::Cut)?;
        let n = handle.n();
        let mut owner = vec![0u8; n];
        for (side, sets) in [(1u8, &left), (2u8, &right)] {
            for &v in sets.iter().flatten() {
                if v >= n {
                    return Err(Error::Parameter(format!("vertex {v} out of range")));
                }
                if owner[v] != 0 {
                    return Err(Error::Disjointness);
                }
                owner[v] = side;
            }
        }
        Ok(Biadjacency { handle, left, right })
    }

    fn union(&self, sets: &[Vec<usize>], pick: &[bool]) -> VertexMask {
        let mut m = VertexMask::empty(self.handle.n());
        for (set, _) in sets.iter().zip(pick).filter(|(_, b)| **b) {
            for &v in set {
                m.insert(v);
            }
        }
        m
    }

    pub fn query(&mut self, x: &[bool], y: &[bool], probe: Probe) -> Result<u64> {
        let xm = self.union(&self.left, x);
        let ym = self.union(&self.right, y);
        self.handle.disjoint_matrix_cut_mask(&xm, &ym, probe)
    }
}

impl MatrixOracle for Biadjacency<'_> {
    fn rows(&self) -> usize {
        self.left.len()
    }

    fn cols(&self) -> usize {
        self.right.len()
    }

    fn cost(&self) -> QueryCost {
        QueryCost::CUT_REDUCTION
    }

    fn charge_query(&mut self) {
        let ledger = &mut self.handle.acct.ledger;
        ledger.add_charged(QueryCost::CUT_REDUCTION);
        ledger.disjoint_matrix_cut += 1;
    }

    fn audit_query(&mut self, x: &[bool], y: &[bool]) -> Result<u64> {
        self.query(x, y, Probe::Audit)
    }

    fn privileged_apply(&self, y: &[bool]) -> Vec<u64> {
        let ym = self.union(&self.right, y);
        let g = &self.handle.hidden;
        self.left
            .iter()
            .map(|set| set.iter().map(|&u| g.weight_to(u, &ym)).sum())
            .collect()
    }

    fn privileged_apply_transpose(&self, x: &[bool]) -> Vec<u64> {
        let xm = self.union(&self.left, x);
        let g = &self.handle.hidden;
        self.right
            .iter()
            .map(|set| set.iter().map(|&v| g.weight_to(v, &xm)).sum())
            .collect()
    }

    fn accounting(&mut self) -> &mut Accounting {
        &mut self.handle.acct
    }
}

/// The full adjacency matrix `A_G` under matrix or additive mode.
pub struct AdjacencyOracle<'h> {
    handle: &'h mut OracleHandle,
    cost: QueryCost,
}

impl<'h> AdjacencyOracle<'h> {
    pub fn new(handle: &'h mut OracleHandle) -> Result<Self> {
        let cost = match handle.mode {
            OracleMode::Matrix => QueryCost::DIRECT_MATRIX,
            OracleMode::Additive => QueryCost::ADDITIVE_REDUCTION,
            OracleMode::Cut => {
                return Err(Error::Mode("adjacency queries need matrix or additive mode".into()))
            }
        };
        Ok(AdjacencyOracle { handle, cost })
    }
}

impl MatrixOracle for AdjacencyOracle<'_> {
    fn rows(&self) -> usize {
        self.handle.n()
    }

    fn cols(&self) -> usize {
        self.handle.n()
    }

    fn cost(&self) -> QueryCost {
        self.cost
    }

    fn charge_query(&mut self) {
        self.handle.acct.ledger.add_charged(self.cost);
    }

    fn audit_query(&mut self, x: &[bool], y: &[bool]) -> Result<u64> {
        let (xm, ym) = (VertexMask::from_bools(x), VertexMask::from_bools(y));
        match self.handle.mode {
            OracleMode::Additive => self.handle.matrix_cut_via_additive_mask(&xm, &ym, Probe::Audit),
            _ => {
                self.handle.acct.ledger.audit += 1;
                Ok(self.handle.hidden.weight_between(&xm, &ym))
            }
        }
    }

    fn privileged_apply(&self, y: &[bool]) -> Vec<u64> {
        let ym = VertexMask::from_bools(y);
        (0..self.handle.n()).map(|u| self.handle.hidden.weight_to(u, &ym)).collect()
    }

    fn privileged_apply_transpose(&self, x: &[bool]) -> Vec<u64> {
        self.privileged_apply(x)
    }

    fn accounting(&mut self) -> &mut Accounting {
        &mut self.handle.acct
    }

    fn privileged_row(&self, i: usize) -> Vec<u64> {
        let mut row = vec![0; self.handle.n()];
        for &(v, w) in self.handle.hidden.neighbors(i) {
            row[v] = w;
        }
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    fn handle(family: Family, n: usize, mode: OracleMode) -> OracleHandle {
        OracleHandle::new(generate(family, n, 0).unwrap(), mode)
    }

    #[test]
    fn cut_query_counts() {
        let mut h = handle(Family::Path, 3, OracleMode::Cut);
        assert_eq!(h.cut_query(&[1]).unwrap(), 2);
        assert_eq!(h.ledger().cut, 1);
        assert_eq!(h.cut_query(&[0, 1, 2]).unwrap(), 0);
        assert!(h.additive_query(&[0]).is_err());
        let k3 = WeightedGraph::from_edges(3, 6, [(0, 1, 5), (0, 2, 5), (1, 2, 5)]).unwrap();
        let mut h = OracleHandle::new(k3, OracleMode::Cut);
        assert_eq!(h.cut_query(&[0]).unwrap(), 10);
    }

    #[test]
    fn disjoint_reduction_examples() {
        let mut h = handle(Family::Path, 3, OracleMode::Cut);
        assert_eq!(h.disjoint_matrix_cut_via_cut(&[0], &[2]).unwrap(), 0);
        assert_eq!(h.disjoint_matrix_cut_via_cut(&[0], &[1]).unwrap(), 1);
        assert_eq!(h.disjoint_matrix_cut_via_cut(&[], &[1]).unwrap(), 0);
        assert_eq!(h.ledger().cut, 9);
        assert_eq!(h.ledger().disjoint_matrix_cut, 3);
        assert_eq!(h.disjoint_matrix_cut_via_cut(&[0, 1], &[1]), Err(Error::Disjointness));
    }

    #[test]
    fn additive_reduction_examples() {
        let mut h = handle(Family::Complete, 3, OracleMode::Additive);
        assert_eq!(h.matrix_cut_via_additive(&[0, 1], &[1, 2]).unwrap(), 3);
        assert_eq!(h.ledger().additive, 5);
        assert_eq!(h.matrix_cut_via_additive(&[], &[]).unwrap(), 0);
        assert_eq!(h.cut_via_additive(&[0]).unwrap(), 2);
        assert_eq!(h.ledger().additive, 13);
        let mut p = handle(Family::Path, 3, OracleMode::Additive);
        assert_eq!(p.matrix_cut_via_additive(&[0, 1, 2], &[0, 1, 2]).unwrap(), 4);
        assert_eq!(p.cut_via_additive(&[1]).unwrap(), 2);
        assert_eq!(p.cut_via_additive(&[]).unwrap(), 0);
    }

    #[test]
    fn biadjacency_examples() {
        let mut h = handle(Family::Path, 3, OracleMode::Cut);
        let v = h.biadjacency_cut_query(&[vec![0]], &[vec![1], vec![2]], &[true], &[true, true]);
        assert_eq!(v.unwrap(), 1);
        let v = h.biadjacency_cut_query(&[vec![0]], &[vec![1], vec![2]], &[false], &[true, true]);
        assert_eq!(v.unwrap(), 0);
        assert_eq!(h.ledger().cut, 6);
        let mut p4 = handle(Family::Path, 4, OracleMode::Cut);
        let v = p4.biadjacency_cut_query(&[vec![0, 1]], &[vec![2, 3]], &[true], &[true]);
        assert_eq!(v.unwrap(), 1);
        let bad = p4.biadjacency_cut_query(&[vec![0, 1]], &[vec![1]], &[true], &[true]);
        assert_eq!(bad, Err(Error::Disjointness));
    }

    #[test]
    fn privileged_apply_matches_audit() {
        let g = generate(Family::WeightedRandom { m: 4 }, 9, 3).unwrap();
        let mut h = OracleHandle::new(g, OracleMode::Cut);
        let left = vec![vec![0, 1], vec![2], vec![3, 4]];
        let right = vec![vec![5], vec![6, 7], vec![8]];
        let mut b = Biadjacency::new(&mut h, left, right).unwrap();
        let y = [true, false, true];
        let ay = b.privileged_apply(&y);
        for i in 0..3 {
            let mut x = [false; 3];
            x[i] = true;
            assert_eq!(b.audit_query(&x, &y).unwrap(), ay[i]);
        }
        assert_eq!(h.ledger().cut, 0);
        assert_eq!(h.ledger().audit, 9);
    }
}
