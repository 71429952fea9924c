//! Learning hidden integer matrices through matrix cut queries.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ledger::ChargeForm;
use crate::matrix_oracle::{MatrixOracle, RowSubset, Transposed};
use crate::quantum::compute_ay_mod;
use crate::sketch::{
    approximate_count, candidate_count, decode_trusted, Decoded, ExhaustiveDecoder, Sketch, SketchSpec,
    EXHAUSTIVE_CAPACITY,
};
use crate::{ceil_log2, ceil_log2_real};

pub type Matrix = Vec<Vec<u64>>;

/// How sketch signatures are inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderChoice {
    /// Exhaustive when the candidate space fits, trusted otherwise.
    Auto,
    Exhaustive,
    Trusted,
}

fn unit(len: usize, i: usize) -> Vec<bool> {
    let mut e = vec![false; len];
    e[i] = true;
    e
}

/// Learns `A` column by column, transposing first when it is wider than tall;
/// `min(k,ℓ)·⌈log₂ M⌉` matrix queries.
pub fn learn_dense<O: MatrixOracle + ?Sized>(oracle: &mut O, modulus: u64) -> Result<Matrix> {
    let (k, l) = (oracle.rows(), oracle.cols());
    let before = oracle.accounting().ledger;
    let form = ChargeForm::Dense { rows: k, cols: l, modulus, cost: oracle.cost() };
    let mut a = vec![vec![0; l]; k];
    if k > 0 && l > 0 {
        if l <= k {
            for j in 0..l {
                let col = compute_ay_mod(oracle, &unit(l, j), modulus)?;
                for (row, v) in a.iter_mut().zip(col) {
                    row[j] = v;
                }
            }
        } else {
            let mut t = Transposed(&mut *oracle);
            for (i, row) in a.iter_mut().enumerate() {
                *row = compute_ay_mod(&mut t, &unit(k, i), modulus)?;
            }
        }
    }
    oracle.accounting().log("learn_dense", form, before);
    Ok(a)
}

/// Sketch width for sparse-row learning: `4d⌈log₂(Mℓ/d)⌉ + ⌈log₂(1/δ)⌉`.
pub fn sparse_learning_columns(len: usize, modulus: u64, d: usize, delta: f64) -> usize {
    let width = ceil_log2_real(modulus as f64 * len as f64 / d as f64).max(0) as usize;
    4 * d * width + ceil_log2_real(1.0 / delta).max(0) as usize
}

/// Learns a matrix whose rows have at most `d` nonzeros; exact with
/// probability `1−δ`. Falls back to [`learn_dense`] when `d ≥ ℓ/2`.
pub fn learn_sparse_rows<O, R>(
    oracle: &mut O,
    modulus: u64,
    d: usize,
    delta: f64,
    decoder: DecoderChoice,
    rng: &mut R,
) -> Result<Matrix>
where
    O: MatrixOracle + ?Sized,
    R: Rng + ?Sized,
{
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("failure budget {delta} outside (0,1)")));
    }
    let (k, l) = (oracle.rows(), oracle.cols());
    if 2 * d >= l {
        return learn_dense(oracle, modulus);
    }
    let before = oracle.accounting().ledger;
    let form = ChargeForm::Sketch { rows: k, cols: l, sparsity: d, modulus, delta, cost: oracle.cost() };
    if k == 0 || d == 0 {
        oracle.accounting().log("learn_sparse_rows", form, before);
        return Ok(vec![vec![0; l]; k]);
    }
    let q = sparse_learning_columns(l, modulus, d, delta);
    let sketch = Sketch::draw(SketchSpec::with_columns(l, modulus, d, delta, q), rng);
    let mut sigs = vec![vec![0; q]; k];
    for c in 0..q {
        let col = compute_ay_mod(oracle, &sketch.column(c), modulus)?;
        for (sig, v) in sigs.iter_mut().zip(col) {
            sig[c] = v;
        }
    }
    oracle.accounting().log("learn_sparse_rows", form, before);

    let exhaustive = match decoder {
        DecoderChoice::Exhaustive => true,
        DecoderChoice::Trusted => false,
        DecoderChoice::Auto => candidate_count(l, modulus, d) <= EXHAUSTIVE_CAPACITY,
    };
    let table = if exhaustive { Some(ExhaustiveDecoder::new(&sketch)?) } else { None };
    let mut out = Vec::with_capacity(k);
    for (i, sig) in sigs.iter().enumerate() {
        let decoded = match &table {
            Some(t) => t.decode(sig),
            None => decode_trusted(sig, &sketch, &oracle.privileged_row(i).iter().map(|v| v % modulus).collect::<Vec<_>>())?,
        };
        match decoded {
            Decoded::Unique(x) => out.push(x),
            Decoded::Ambiguous(c) => {
                return Err(Error::FailureEvent(format!("row {i}: {} sparse preimages", c.len())))
            }
            Decoded::NoPreimage => {
                return Err(Error::FailureEvent(format!("row {i}: no {d}-sparse preimage")))
            }
        }
    }
    Ok(out)
}

/// Row sums of `A`: exact for `M = 2` with `⌈log₂(ℓ+1)⌉` queries, otherwise a
/// good estimate with probability `1−δ` from approximate counting on the
/// supports of the rows.
pub fn degree_sequence<O, R>(oracle: &mut O, modulus: u64, delta: f64, repetition: u64, rng: &mut R) -> Result<Vec<f64>>
where
    O: MatrixOracle + ?Sized,
    R: Rng + ?Sized,
{
    let (k, l) = (oracle.rows(), oracle.cols());
    let before = oracle.accounting().ledger;
    if modulus == 2 {
        let form = ChargeForm::ExactDegree { rows: k, cols: l, cost: oracle.cost() };
        let g = if k == 0 || l == 0 {
            vec![0.0; k]
        } else {
            compute_ay_mod(oracle, &vec![true; l], l as u64 + 1)?.into_iter().map(|v| v as f64).collect()
        };
        oracle.accounting().log("degree_exact", form, before);
        return Ok(g);
    }
    let wide = l as u64 * (modulus - 1) + 1;
    let form = ChargeForm::ApproxCount { strings: k, length: l, delta, repetition, modulus: wide, cost: oracle.cost() };
    let mut or_query = |s: &[bool]| -> Result<Vec<bool>> {
        Ok(compute_ay_mod(&mut *oracle, s, wide)?.into_iter().map(|v| v >= 1).collect())
    };
    let est = approximate_count(&mut or_query, k, l, delta, repetition, rng)?;
    oracle.accounting().log("degree_approx", form, before);
    Ok(est.estimate)
}

/// Output of [`learn_m_nonzeros`] with the row partition it used.
#[derive(Clone, Debug, PartialEq)]
pub struct NonzeroLearning {
    pub matrix: Matrix,
    pub degrees: Vec<f64>,
    pub threshold: f64,
    pub low_rows: Vec<usize>,
    pub high_rows: Vec<usize>,
}

/// Learns `A` with a budget driven by its number of nonzeros: rows whose
/// estimated degree is at most `d = max(1, √(m̂/log₂(Mℓ)))` are learned as
/// sparse rows, the rest densely; rows estimated at zero are zero.
/// `m̂ = Σ min(2g(i), ℓ)` stands in for `m`.
pub fn learn_m_nonzeros<O, R>(
    oracle: &mut O,
    modulus: u64,
    delta: f64,
    repetition: u64,
    decoder: DecoderChoice,
    rng: &mut R,
) -> Result<NonzeroLearning>
where
    O: MatrixOracle + ?Sized,
    R: Rng + ?Sized,
{
    let (k, l) = (oracle.rows(), oracle.cols());
    let degrees = degree_sequence(oracle, modulus, delta / 2.0, repetition, rng)?;
    let m_hat: f64 = degrees.iter().map(|&g| (2.0 * g).min(l as f64)).sum();
    let scale = (modulus as f64 * l.max(1) as f64).log2().max(1.0);
    let threshold = (m_hat / scale).sqrt().max(1.0);
    // A zero estimate certifies a zero row, so those rows cost nothing.
    let low_rows: Vec<usize> = (0..k).filter(|&i| degrees[i] > 0.0 && degrees[i] <= threshold).collect();
    let high_rows: Vec<usize> = (0..k).filter(|&i| degrees[i] > threshold).collect();

    let mut matrix = vec![vec![0; l]; k];
    let sparsity = (2.0 * threshold).floor() as usize;
    let low = learn_sparse_rows(&mut RowSubset::new(&mut *oracle, low_rows.clone()), modulus, sparsity, delta / 2.0, decoder, rng)?;
    for (&i, row) in low_rows.iter().zip(low) {
        matrix[i] = row;
    }
    let high = learn_dense(&mut RowSubset::new(&mut *oracle, high_rows.clone()), modulus)?;
    for (&i, row) in high_rows.iter().zip(high) {
        matrix[i] = row;
    }
    Ok(NonzeroLearning { matrix, degrees, threshold, low_rows, high_rows })
}

/// Number of quantum queries of [`learn_dense`] on a `k × ℓ` matrix.
pub fn dense_queries(k: usize, l: usize, modulus: u64) -> u64 {
    k.min(l) as u64 * ceil_log2(modulus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::Accounting;
    use crate::matrix_oracle::HiddenMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hidden(a: Vec<Vec<u64>>) -> HiddenMatrix {
        let cols = a.first().map_or(0, |r| r.len());
        HiddenMatrix::new(a, cols, Accounting::default()).unwrap()
    }

    fn p3() -> Vec<Vec<u64>> {
        vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]]
    }

    #[test]
    fn dense_examples() {
        let mut z = hidden(vec![vec![0; 3]; 3]);
        assert_eq!(learn_dense(&mut z, 2).unwrap(), vec![vec![0; 3]; 3]);
        assert_eq!(z.accounting().ledger.matrix_cut, 3);

        let mut p = hidden(p3());
        assert_eq!(learn_dense(&mut p, 2).unwrap(), p3());
        assert_eq!(p.accounting().ledger.matrix_cut, 3);

        let wide: Vec<Vec<u64>> = (0..4).map(|i| (0..7).map(|j| (i * 7 + j) % 4).collect()).collect();
        let mut w = hidden(wide.clone());
        assert_eq!(learn_dense(&mut w, 4).unwrap(), wide);
        assert_eq!(w.accounting().ledger.matrix_cut, 8);
        assert_eq!(dense_queries(4, 7, 4), 8);
    }

    #[test]
    fn sparse_permutation_recovery() {
        let mut failures = 0;
        for seed in 0..400u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..8).collect();
            rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
            let a: Vec<Vec<u64>> = perm.iter().map(|&p| (0..8).map(|j| (j == p) as u64).collect()).collect();
            let mut o = hidden(a.clone());
            match learn_sparse_rows(&mut o, 2, 1, 0.25, DecoderChoice::Exhaustive, &mut rng) {
                Ok(b) => assert_eq!(b, a),
                Err(Error::FailureEvent(_)) => failures += 1,
                Err(e) => panic!("{e}"),
            }
            assert_eq!(o.accounting().ledger.matrix_cut, sparse_learning_columns(8, 2, 1, 0.25) as u64);
        }
        assert!(failures as f64 / 400.0 <= 0.25);
    }

    #[test]
    fn sparse_falls_back_to_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = hidden(p3());
        let mut b = hidden(p3());
        assert_eq!(learn_sparse_rows(&mut a, 2, 2, 0.1, DecoderChoice::Auto, &mut rng).unwrap(), learn_dense(&mut b, 2).unwrap());
        assert_eq!(a.accounting().ledger, b.accounting().ledger);
    }

    #[test]
    fn sparse_column_formula() {
        // 4·1·⌈log₂(2·8/1)⌉ + ⌈log₂ 4⌉ = 16 + 2.
        assert_eq!(sparse_learning_columns(8, 2, 1, 0.25), 18);
        assert_eq!(sparse_learning_columns(128, 2, 2, 0.1), 8 * 7 + 4);
    }

    #[test]
    fn exact_degrees_of_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut k3 = hidden(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        assert_eq!(degree_sequence(&mut k3, 2, 0.1, 200, &mut rng).unwrap(), vec![2.0; 3]);
        assert_eq!(k3.accounting().ledger.matrix_cut, 2);
        let mut z = hidden(vec![vec![0; 5]; 4]);
        assert_eq!(degree_sequence(&mut z, 3, 0.1, 20, &mut rng).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn nonzero_learning_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = vec![vec![0u64; 8]; 8];
        a[2][5] = 1;
        let mut o = hidden(a.clone());
        let r = learn_m_nonzeros(&mut o, 2, 0.1, 200, DecoderChoice::Auto, &mut rng).unwrap();
        assert_eq!(r.matrix, a);
        assert!(r.high_rows.is_empty());

        let mut z = hidden(vec![vec![0; 8]; 8]);
        let r = learn_m_nonzeros(&mut z, 2, 0.1, 200, DecoderChoice::Auto, &mut rng).unwrap();
        assert_eq!(r.matrix, vec![vec![0; 8]; 8]);
        assert_eq!(z.accounting().ledger.matrix_cut, ceil_log2(9));
    }
}
