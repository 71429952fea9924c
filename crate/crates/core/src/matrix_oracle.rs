//! Hidden integer matrices behind matrix cut queries `xᵀAy`.
//!
//! Algorithms only ever call `charge_query` (one quantum query) and
//! `audit_query` (uncharged classical probe). The `privileged_*` methods exist
//! for the quantum simulator, which reproduces the exact output a quantum
//! device would return at the charged cost.

use crate::error::{Error, Result};
use crate::ledger::{Accounting, QueryCost};

pub trait MatrixOracle {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Raw queries spent per matrix query.
    fn cost(&self) -> QueryCost;
    /// Records one matrix query issued by a quantum algorithm.
    fn charge_query(&mut self);
    /// Uncharged evaluation of `xᵀAy`, counted under `audit`.
    fn audit_query(&mut self, x: &[bool], y: &[bool]) -> Result<u64>;
    /// `A·y` over the integers.
    fn privileged_apply(&self, y: &[bool]) -> Vec<u64>;
    /// `Aᵀ·x` over the integers.
    fn privileged_apply_transpose(&self, x: &[bool]) -> Vec<u64>;
    fn accounting(&mut self) -> &mut Accounting;

    /// Row `i` of `A`.
    fn privileged_row(&self, i: usize) -> Vec<u64> {
        let mut x = vec![false; self.rows()];
        x[i] = true;
        self.privileged_apply_transpose(&x)
    }
}

/// An explicit matrix with entries in `[modulus]`, answering direct matrix cut queries.
#[derive(Clone, Debug)]
pub struct HiddenMatrix {
    entries: Vec<Vec<u64>>,
    cols: usize,
    acct: Accounting,
}

impl HiddenMatrix {
    pub fn new(entries: Vec<Vec<u64>>, cols: usize, acct: Accounting) -> Result<Self> {
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Parameter("ragged matrix".into()));
        }
        Ok(HiddenMatrix { entries, cols, acct })
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }
}

impl MatrixOracle for HiddenMatrix {
    fn rows(&self) -> usize {
        self.entries.len()
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn cost(&self) -> QueryCost {
        QueryCost::DIRECT_MATRIX
    }

    fn charge_query(&mut self) {
        self.acct.ledger.add_charged(QueryCost::DIRECT_MATRIX);
    }

    fn audit_query(&mut self, x: &[bool], y: &[bool]) -> Result<u64> {
        self.acct.ledger.audit += 1;
        let ay = self.privileged_apply(y);
        Ok(x.iter().zip(ay).filter(|(b, _)| **b).map(|(_, v)| v).sum())
    }

    fn privileged_apply(&self, y: &[bool]) -> Vec<u64> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(y).filter(|(_, b)| **b).map(|(v, _)| *v).sum())
            .collect()
    }

    fn privileged_apply_transpose(&self, x: &[bool]) -> Vec<u64> {
        let mut out = vec![0; self.cols];
        for (row, _) in self.entries.iter().zip(x).filter(|(_, b)| **b) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    fn accounting(&mut self) -> &mut Accounting {
        &mut self.acct
    }

    fn privileged_row(&self, i: usize) -> Vec<u64> {
        self.entries[i].clone()
    }
}

/// `Aᵀ` viewed through the same oracle; `xᵀAᵀy = yᵀAx`.
pub struct Transposed<'a, O: MatrixOracle + ?Sized>(pub &'a mut O);

impl<O: MatrixOracle + ?Sized> MatrixOracle for Transposed<'_, O> {
    fn rows(&self) -> usize {
        self.0.cols()
    }

    fn cols(&self) -> usize {
        self.0.rows()
    }

    fn cost(&self) -> QueryCost {
        self.0.cost()
    }

    fn charge_query(&mut self) {
        self.0.charge_query()
    }

    fn audit_query(&mut self, x: &[bool], y: &[bool]) -> Result<u64> {
        self.0.audit_query(y, x)
    }

    fn privileged_apply(&self, y: &[bool]) -> Vec<u64> {
        self.0.privileged_apply_transpose(y)
    }

    fn privileged_apply_transpose(&self, x: &[bool]) -> Vec<u64> {
        self.0.privileged_apply(x)
    }

    fn accounting(&mut self) -> &mut Accounting {
        self.0.accounting()
    }
}

/// The submatrix of `A` on a chosen list of rows.
pub struct RowSubset<'a, O: MatrixOracle + ?Sized> {
    inner: &'a mut O,
    rows: Vec<usize>,
}

impl<'a, O: MatrixOracle + ?Sized> RowSubset<'a, O> {
    pub fn new(inner: &'a mut O, rows: Vec<usize>) -> Self {
        RowSubset { inner, rows }
    }

    fn expand(&self, x: &[bool]) -> Vec<bool> {
        let mut full = vec![false; self.inner.rows()];
        for (&r, &b) in self.rows.iter().zip(x) {
            full[r] = b;
        }
        full
    }
}

impl<O: MatrixOracle + ?Sized> MatrixOracle for RowSubset<'_, O> {
    fn rows(&self) -> usize {
        self.rows.len()
    }

    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn cost(&self) -> QueryCost {
        self.inner.cost()
    }

    fn charge_query(&mut self) {
        self.inner.charge_query()
    }

    fn audit_query(&mut self, x: &[bool], y: &[bool]) -> Result<u64> {
        let full = self.expand(x);
        self.inner.audit_query(&full, y)
    }

    fn privileged_apply(&self, y: &[bool]) -> Vec<u64> {
        let all = self.inner.privileged_apply(y);
        self.rows.iter().map(|&r| all[r]).collect()
    }

    fn privileged_apply_transpose(&self, x: &[bool]) -> Vec<u64> {
        self.inner.privileged_apply_transpose(&self.expand(x))
    }

    fn accounting(&mut self) -> &mut Accounting {
        self.inner.accounting()
    }

    fn privileged_row(&self, i: usize) -> Vec<u64> {
        self.inner.privileged_row(self.rows[i])
    }
}
