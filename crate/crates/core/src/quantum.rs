//! Learning a vector from modular subset sums at a charge of `⌈log₂ M⌉`
//! quantum queries, and a state-vector check of the underlying protocol.
//!
//! A quantum device running the Fourier-sampling protocol returns the hidden
//! vector with certainty. The simulator therefore reads the vector through
//! privileged access, charges exactly the protocol's query count, and then
//! compares the claimed vector against the oracle on random subsets.

use num_complex::Complex64;
use rand::Rng;

use crate::ceil_log2;
use crate::error::{Error, Result};
use crate::ledger::Accounting;
use crate::matrix_oracle::MatrixOracle;

/// An oracle answering `Σ_{i∈S} x_i mod M` for a hidden `x ∈ [M]^k`.
pub trait SubsetSumOracle {
    fn len(&self) -> usize;
    fn modulus(&self) -> u64;
    /// Records one quantum query on the underlying oracle.
    fn charge_query(&mut self);
    /// Uncharged classical evaluation of the subset sum.
    fn audit_sum(&mut self, subset: &[bool]) -> Result<u64>;
    fn accounting(&mut self) -> &mut Accounting;

    /// The hidden vector. Defaults to singleton audit probes.
    fn hidden_vector(&mut self) -> Result<Vec<u64>> {
        let k = self.len();
        (0..k)
            .map(|i| {
                let mut s = vec![false; k];
                s[i] = true;
                self.audit_sum(&s)
            })
            .collect()
    }
}

/// Returns the hidden vector; charges `⌈log₂ M⌉` quantum queries.
pub fn qft_learn_subset_sums<O: SubsetSumOracle + ?Sized>(oracle: &mut O) -> Result<Vec<u64>> {
    let modulus = oracle.modulus();
    if modulus < 2 {
        return Err(Error::Parameter("modulus must be at least 2".into()));
    }
    let m = ceil_log2(modulus);
    for _ in 0..m {
        oracle.charge_query();
    }
    oracle.accounting().ledger.quantum_charged += m;
    let x = oracle.hidden_vector()?;
    let k = oracle.len();
    if x.len() != k || x.iter().any(|&v| v >= modulus) {
        return Err(Error::Integrity("claimed vector has the wrong shape".into()));
    }
    let checks = oracle.accounting().audit_checks();
    for _ in 0..checks {
        let rng = oracle.accounting().audit_rng();
        let subset: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
        let claimed = x.iter().zip(&subset).filter(|(_, b)| **b).fold(0u64, |acc, (v, _)| (acc + v) % modulus);
        let actual = oracle.audit_sum(&subset)?;
        if claimed != actual {
            return Err(Error::Integrity(format!(
                "subset-sum audit mismatch: claimed {claimed}, oracle {actual}"
            )));
        }
    }
    Ok(x)
}

/// A subset-sum oracle backed by a closure; extraction uses singleton probes.
pub struct FnSubsetSum<F> {
    len: usize,
    modulus: u64,
    answer: F,
    acct: Accounting,
}

impl<F: FnMut(&[bool]) -> u64> FnSubsetSum<F> {
    pub fn new(len: usize, modulus: u64, answer: F, acct: Accounting) -> Self {
        FnSubsetSum { len, modulus, answer, acct }
    }

    pub fn into_accounting(self) -> Accounting {
        self.acct
    }
}

impl<F: FnMut(&[bool]) -> u64> SubsetSumOracle for FnSubsetSum<F> {
    fn len(&self) -> usize {
        self.len
    }

    fn modulus(&self) -> u64 {
        self.modulus
    }

    fn charge_query(&mut self) {}

    fn audit_sum(&mut self, subset: &[bool]) -> Result<u64> {
        self.acct.ledger.audit += 1;
        Ok((self.answer)(subset) % self.modulus)
    }

    fn accounting(&mut self) -> &mut Accounting {
        &mut self.acct
    }
}

/// The subset-sum oracle `S ↦ χ_Sᵀ A y mod M`.
struct ProductSums<'a, O: MatrixOracle + ?Sized> {
    matrix: &'a mut O,
    y: &'a [bool],
    modulus: u64,
}

impl<O: MatrixOracle + ?Sized> SubsetSumOracle for ProductSums<'_, O> {
    fn len(&self) -> usize {
        self.matrix.rows()
    }

    fn modulus(&self) -> u64 {
        self.modulus
    }

    fn charge_query(&mut self) {
        self.matrix.charge_query();
    }

    fn audit_sum(&mut self, subset: &[bool]) -> Result<u64> {
        Ok(self.matrix.audit_query(subset, self.y)? % self.modulus)
    }

    fn accounting(&mut self) -> &mut Accounting {
        self.matrix.accounting()
    }

    fn hidden_vector(&mut self) -> Result<Vec<u64>> {
        Ok(self.matrix.privileged_apply(self.y).into_iter().map(|v| v % self.modulus).collect())
    }
}

/// `(A y) mod M` for the hidden matrix behind `matrix`; `⌈log₂ M⌉` matrix queries.
pub fn compute_ay_mod<O: MatrixOracle + ?Sized>(matrix: &mut O, y: &[bool], modulus: u64) -> Result<Vec<u64>> {
    if y.len() != matrix.cols() {
        return Err(Error::Parameter("vector length differs from column count".into()));
    }
    qft_learn_subset_sums(&mut ProductSums { matrix, y, modulus })
}

/// Largest `k` accepted by [`statevector_validate`].
pub const STATEVECTOR_MAX_LEN: usize = 6;
/// Largest modulus accepted by [`statevector_validate`].
pub const STATEVECTOR_MAX_MODULUS: u64 = 4;

/// Runs the two-register Fourier-sampling protocol on a full state vector and
/// reports whether the first register measures `x` with probability one.
pub fn statevector_validate(x: &[u64], modulus: u64, k: usize) -> Result<bool> {
    if k > STATEVECTOR_MAX_LEN || modulus > STATEVECTOR_MAX_MODULUS {
        return Err(Error::Capacity(format!(
            "state vector limited to k <= {STATEVECTOR_MAX_LEN}, M <= {STATEVECTOR_MAX_MODULUS}"
        )));
    }
    if modulus < 2 || x.len() != k || x.iter().any(|&v| v >= modulus) {
        return Err(Error::Parameter("x must lie in [M]^k with M >= 2".into()));
    }
    let m = modulus as usize;
    let dim = m.pow(k as u32);
    let omega = |e: usize| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (e % m) as f64 / m as f64);
    let digits = |t: usize| -> Vec<usize> {
        let mut t = t;
        (0..k)
            .map(|_| {
                let d = t % m;
                t /= m;
                d
            })
            .collect()
    };

    // |t⟩ ⊗ |ξ_M⟩ with ξ_M = M^{-1/2} Σ_j ω^j |j⟩, uniform over t; index t·m + j.
    let norm = 1.0 / ((dim * m) as f64).sqrt();
    let mut psi: Vec<Complex64> = (0..dim * m).map(|idx| omega(idx % m) * norm).collect();

    // Add t·x to the second register, one bit-plane subset sum per query.
    let queries = ceil_log2(modulus) as usize;
    for b in 0..queries {
        let mut next = vec![Complex64::new(0.0, 0.0); dim * m];
        for t in 0..dim {
            let s: usize = digits(t)
                .iter()
                .zip(x)
                .filter(|(d, _)| (*d >> b) & 1 == 1)
                .map(|(_, &xi)| xi as usize)
                .sum();
            let shift = ((1usize << b) * s) % m;
            for j in 0..m {
                next[t * m + (j + shift) % m] = psi[t * m + j];
            }
        }
        psi = next;
    }

    // Fourier transform over each Z_M digit of the first register.
    let scale = 1.0 / (m as f64).sqrt();
    let mut stride = 1;
    for _ in 0..k {
        let mut next = vec![Complex64::new(0.0, 0.0); dim * m];
        for t in 0..dim {
            let digit = (t / stride) % m;
            let base = t - digit * stride;
            for c in 0..m {
                let target = base + c * stride;
                let phase = omega(digit * c) * scale;
                for j in 0..m {
                    next[target * m + j] += psi[t * m + j] * phase;
                }
            }
        }
        psi = next;
        stride *= m;
    }

    let target: usize = x.iter().rev().fold(0, |acc, &v| acc * m + v as usize);
    let mass: f64 = (0..m).map(|j| psi[target * m + j].norm_sqr()).sum();
    Ok(mass >= 1.0 - 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use crate::matrix_oracle::HiddenMatrix;
    use crate::oracle::{AdjacencyOracle, OracleHandle, OracleMode};

    fn fixed(x: Vec<u64>, modulus: u64) -> FnSubsetSum<impl FnMut(&[bool]) -> u64> {
        let hidden = x.clone();
        FnSubsetSum::new(
            x.len(),
            modulus,
            move |s: &[bool]| hidden.iter().zip(s).filter(|(_, b)| **b).map(|(v, _)| v).sum(),
            Accounting::default(),
        )
    }

    #[test]
    fn learns_by_singleton_probes() {
        let mut o = fixed(vec![1, 2, 0], 3);
        assert_eq!(qft_learn_subset_sums(&mut o).unwrap(), vec![1, 2, 0]);
        let ledger = o.into_accounting().ledger;
        assert_eq!(ledger.quantum_charged, 2);
        assert_eq!(ledger.audit, 3 + 2);
    }

    #[test]
    fn charge_is_ceil_log_modulus() {
        let mut o = fixed(vec![0; 5], 8);
        assert_eq!(qft_learn_subset_sums(&mut o).unwrap(), vec![0; 5]);
        assert_eq!(o.into_accounting().ledger.quantum_charged, 3);
    }

    #[test]
    fn inconsistent_oracle_is_caught() {
        let mut calls = 0;
        let mut o = FnSubsetSum::new(
            3,
            5,
            move |s: &[bool]| {
                calls += 1;
                // Singletons answer 1; larger subsets answer 0.
                if s.iter().filter(|b| **b).count() == 1 && calls <= 3 {
                    1
                } else {
                    0
                }
            },
            Accounting::new(16, 1),
        );
        assert!(matches!(qft_learn_subset_sums(&mut o), Err(Error::Integrity(_))));
    }

    #[test]
    fn ay_mod_examples() {
        let mut h = OracleHandle::new(generate(Family::Path, 3, 0).unwrap(), OracleMode::Matrix);
        let mut a = AdjacencyOracle::new(&mut h).unwrap();
        assert_eq!(compute_ay_mod(&mut a, &[false, true, false], 4).unwrap(), vec![1, 0, 1]);
        assert_eq!(compute_ay_mod(&mut a, &[false; 3], 4).unwrap(), vec![0; 3]);
        assert_eq!(h.ledger().matrix_cut, 4);
        assert_eq!(h.ledger().quantum_charged, 4);

        let mut h = OracleHandle::new(generate(Family::Complete, 3, 0).unwrap(), OracleMode::Matrix);
        let mut a = AdjacencyOracle::new(&mut h).unwrap();
        assert_eq!(compute_ay_mod(&mut a, &[true; 3], 8).unwrap(), vec![2, 2, 2]);
        assert_eq!(h.ledger().matrix_cut, 3);
    }

    #[test]
    fn ay_mod_column_of_path() {
        // Column 1 of the P3 adjacency matrix is (1, 0, 1)ᵀ; column 0 is (0, 1, 0)ᵀ.
        let mut m = HiddenMatrix::new(vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]], 3, Accounting::default())
            .unwrap();
        assert_eq!(compute_ay_mod(&mut m, &[true, false, false], 4).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn statevector_examples() {
        assert!(statevector_validate(&[1], 2, 1).unwrap());
        assert!(statevector_validate(&[1, 0, 1], 2, 3).unwrap());
        assert!(statevector_validate(&[2, 1], 3, 2).unwrap());
        assert!(statevector_validate(&[3, 0, 2, 1], 4, 4).unwrap());
        assert!(matches!(statevector_validate(&[0; 7], 2, 7), Err(Error::Capacity(_))));
        assert!(matches!(statevector_validate(&[0], 5, 1), Err(Error::Capacity(_))));
    }
}
