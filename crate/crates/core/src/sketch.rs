//! Random Boolean sketches for sparse recovery, approximate counting with
//! OR queries, and the hitting-set sampler.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::{ceil_log2, ceil_log2_real};

/// Largest number of sparse candidates the exhaustive decoder will consider.
pub const EXHAUSTIVE_CAPACITY: u128 = 10_000_000;

/// Shape of a sparse-recovery sketch: ambient length `r`, modulus, sparsity
/// bound `d`, failure budget, and column count `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchSpec {
    pub r: usize,
    pub modulus: u64,
    pub d: usize,
    pub delta: f64,
    pub q: usize,
}

impl SketchSpec {
    /// Column count `⌈2d·log₂(eMr/d) + 2log₂d + log₂(1/δ)⌉`, enough for all
    /// `d`-sparse vectors to have distinct signatures with probability `1−δ`.
    pub fn distinct_rows(r: usize, modulus: u64, d: usize, delta: f64) -> Result<Self> {
        check_budget(delta)?;
        if d == 0 || r == 0 {
            return Err(Error::Parameter("need r >= 1 and d >= 1".into()));
        }
        let (df, mf, rf) = (d as f64, modulus as f64, r as f64);
        let raw = 2.0 * df * (std::f64::consts::E * mf * rf / df).log2() + 2.0 * df.log2() + (1.0 / delta).log2();
        Ok(SketchSpec { r, modulus, d, delta, q: raw.ceil() as usize })
    }

    /// A spec with an explicit column count.
    pub fn with_columns(r: usize, modulus: u64, d: usize, delta: f64, q: usize) -> Self {
        SketchSpec { r, modulus, d, delta, q }
    }
}

fn check_budget(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("failure budget {delta} outside (0,1)")))
    }
}

/// A drawn sketch: an `r × q` matrix with i.i.d. uniform Boolean entries.
#[derive(Clone, Debug)]
pub struct Sketch {
    pub spec: SketchSpec,
    /// `rows[i][c] = R(i, c)`.
    rows: Vec<Vec<u64>>,
}

impl Sketch {
    pub fn draw<R: Rng + ?Sized>(spec: SketchSpec, rng: &mut R) -> Self {
        let rows = (0..spec.r).map(|_| (0..spec.q).map(|_| rng.gen_range(0..2u64)).collect()).collect();
        Sketch { spec, rows }
    }

    /// Column `c` as a Boolean vector of length `r`.
    pub fn column(&self, c: usize) -> Vec<bool> {
        self.rows.iter().map(|row| row[c] == 1).collect()
    }

    pub fn entry(&self, i: usize, c: usize) -> bool {
        self.rows[i][c] == 1
    }

    /// Replaces column `c`, used to build adversarial sketches in tests.
    pub fn set_column(&mut self, c: usize, col: &[bool]) {
        for (row, &b) in self.rows.iter_mut().zip(col) {
            row[c] = b as u64;
        }
    }

    /// `xᵀR mod M`.
    pub fn signature(&self, x: &[u64]) -> Vec<u64> {
        let m = self.spec.modulus;
        let mut sig = vec![0u64; self.spec.q];
        for (row, &xi) in self.rows.iter().zip(x) {
            if xi % m == 0 {
                continue;
            }
            for (s, &z) in sig.iter_mut().zip(row) {
                *s = (*s + xi * z) % m;
            }
        }
        sig
    }

    /// Whether two distinct `d`-sparse vectors share a signature.
    pub fn has_collision(&self) -> Result<bool> {
        check_capacity(&self.spec)?;
        let mut seen = HashSet::new();
        let mut collision = false;
        enumerate_sparse(self, self.spec.d, &mut |_, sig| {
            if !seen.insert(sig.to_vec()) {
                collision = true;
            }
        });
        Ok(collision)
    }
}

/// `Σ_{j≤d} C(r,j)(M−1)^j`, saturating.
pub fn candidate_count(r: usize, modulus: u64, d: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    let mut power: u128 = 1;
    for j in 0..=d.min(r) {
        if j > 0 {
            binom = binom.saturating_mul((r - j + 1) as u128) / j as u128;
            power = power.saturating_mul(modulus as u128 - 1);
        }
        total = total.saturating_add(binom.saturating_mul(power));
    }
    total
}

fn check_capacity(spec: &SketchSpec) -> Result<()> {
    let count = candidate_count(spec.r, spec.modulus, spec.d);
    if count > EXHAUSTIVE_CAPACITY {
        return Err(Error::Capacity(format!("{count} sparse candidates exceed {EXHAUSTIVE_CAPACITY}")));
    }
    Ok(())
}

type Sparse = Vec<(usize, u64)>;

/// Visits every vector with at most `max_support` nonzeros, with its signature.
fn enumerate_sparse(sk: &Sketch, max_support: usize, visit: &mut dyn FnMut(&Sparse, &[u64])) {
    fn walk(
        sk: &Sketch,
        start: usize,
        left: usize,
        cur: &mut Sparse,
        sig: &mut Vec<u64>,
        visit: &mut dyn FnMut(&Sparse, &[u64]),
    ) {
        visit(cur, sig);
        if left == 0 {
            return;
        }
        let m = sk.spec.modulus;
        for i in start..sk.spec.r {
            for v in 1..m {
                let saved = sig.clone();
                for (s, &z) in sig.iter_mut().zip(&sk.rows[i]) {
                    *s = (*s + v * z) % m;
                }
                cur.push((i, v));
                walk(sk, i + 1, left - 1, cur, sig, visit);
                cur.pop();
                *sig = saved;
            }
        }
    }
    let mut cur = Vec::new();
    let mut sig = vec![0; sk.spec.q];
    walk(sk, 0, max_support, &mut cur, &mut sig, visit);
}

/// Outcome of decoding one signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Unique(Vec<u64>),
    /// Two or more `d`-sparse preimages: the sketch failed for this row.
    Ambiguous(Vec<Vec<u64>>),
    /// No `d`-sparse preimage: the row violates the sparsity promise.
    NoPreimage,
}

/// How a signature is inverted.
#[derive(Clone, Copy, Debug)]
pub enum DecodeMode<'a> {
    /// Search all `d`-sparse candidates.
    Exhaustive,
    /// Check the signature of a row read through privileged access.
    Trusted(&'a [u64]),
}

/// Meet-in-the-middle decoder: every `d`-sparse vector splits into a front of
/// at most `⌊d/2⌋` nonzeros and a back of at most `⌈d/2⌉` nonzeros whose
/// supports are ordered; backs are tabulated by signature once per sketch.
pub struct ExhaustiveDecoder<'s> {
    sketch: &'s Sketch,
    backs: HashMap<Vec<u64>, Vec<Sparse>>,
    fronts: Vec<(Sparse, Vec<u64>)>,
}

impl<'s> ExhaustiveDecoder<'s> {
    pub fn new(sketch: &'s Sketch) -> Result<Self> {
        check_capacity(&sketch.spec)?;
        let d = sketch.spec.d;
        let mut backs: HashMap<Vec<u64>, Vec<Sparse>> = HashMap::new();
        enumerate_sparse(sketch, d - d / 2, &mut |v, sig| {
            backs.entry(sig.to_vec()).or_default().push(v.clone());
        });
        let mut fronts = Vec::new();
        enumerate_sparse(sketch, d / 2, &mut |v, sig| fronts.push((v.clone(), sig.to_vec())));
        Ok(ExhaustiveDecoder { sketch, backs, fronts })
    }

    pub fn decode(&self, sig: &[u64]) -> Decoded {
        let m = self.sketch.spec.modulus;
        let mut found: BTreeSet<Sparse> = BTreeSet::new();
        for (front, fsig) in &self.fronts {
            let want: Vec<u64> = sig.iter().zip(fsig).map(|(&s, &f)| (s + m - f) % m).collect();
            let Some(bucket) = self.backs.get(&want) else { continue };
            let front_max = front.last().map(|e| e.0);
            for back in bucket {
                let ordered = match (front_max, back.first()) {
                    (Some(fm), Some(&(bm, _))) => fm < bm,
                    _ => true,
                };
                if ordered {
                    let mut y = front.clone();
                    y.extend_from_slice(back);
                    found.insert(y);
                }
            }
        }
        let dense = |s: &Sparse| {
            let mut x = vec![0; self.sketch.spec.r];
            for &(i, v) in s {
                x[i] = v;
            }
            x
        };
        match found.len() {
            0 => Decoded::NoPreimage,
            1 => Decoded::Unique(dense(found.iter().next().unwrap())),
            _ => Decoded::Ambiguous(found.iter().map(dense).collect()),
        }
    }
}

/// Inverts `sig` under `sk` in the requested mode.
pub fn decode(sig: &[u64], sk: &Sketch, mode: DecodeMode<'_>) -> Result<Decoded> {
    match mode {
        DecodeMode::Exhaustive => Ok(ExhaustiveDecoder::new(sk)?.decode(sig)),
        DecodeMode::Trusted(row) => decode_trusted(sig, sk, row),
    }
}

pub(crate) fn decode_trusted(sig: &[u64], sk: &Sketch, row: &[u64]) -> Result<Decoded> {
    if sk.signature(row) != sig {
        return Err(Error::Integrity("trusted row does not reproduce the signature".into()));
    }
    if row.iter().filter(|&&v| v != 0).count() > sk.spec.d {
        return Ok(Decoded::NoPreimage);
    }
    Ok(Decoded::Unique(row.to_vec()))
}

/// Probability that a uniform `r`-test hits a string of weight `t` and length `ℓ`.
pub fn r_test_success_prob(t: usize, len: usize, r: u32) -> f64 {
    assert!(t <= len && len > 0, "need 0 <= t <= len");
    1.0 - (1.0 - t as f64 / len as f64).powi(r as i32)
}

/// Majority tests per round: `C·⌈log₂(k(⌈log₂ℓ⌉+1)/δ)⌉`.
pub fn approx_count_repetitions(k: usize, len: usize, delta: f64, repetition: u64) -> u64 {
    let rounds = ceil_log2(len as u64) + 1;
    let arg = k as f64 * rounds as f64 / delta;
    repetition * ceil_log2_real(arg).max(1) as u64
}

/// Estimates and the number of k-OR queries spent.
#[derive(Clone, Debug, PartialEq)]
pub struct CountEstimate {
    pub estimate: Vec<f64>,
    pub or_queries: u64,
}

/// Approximate Hamming weights of `k` hidden strings of length `len`.
///
/// `or_query` receives a membership vector over `0..len` and answers, for
/// every string, whether it has a one inside the set. With probability at
/// least `1−δ` the result `b` satisfies `b/4 ≤ weight ≤ 2b` componentwise.
/// Strings with no successful round get estimate 0.
pub fn approximate_count<R, F>(
    or_query: &mut F,
    k: usize,
    len: usize,
    delta: f64,
    repetition: u64,
    rng: &mut R,
) -> Result<CountEstimate>
where
    R: Rng + ?Sized,
    F: FnMut(&[bool]) -> Result<Vec<bool>>,
{
    check_budget(delta)?;
    if k == 0 || len == 0 {
        return Ok(CountEstimate { estimate: vec![0.0; k], or_queries: 0 });
    }
    let a = approx_count_repetitions(k, len, delta, repetition);
    let rounds = ceil_log2(len as u64) + 1;
    let need = a.div_ceil(2);
    let mut first_success: Vec<Option<u64>> = vec![None; k];
    let mut queries = 0;
    let mut member = vec![false; len];
    let mut drawn = Vec::new();
    for j in 0..rounds {
        let size = (1usize << j).min(len);
        let mut hits = vec![0u64; k];
        for _ in 0..a {
            for _ in 0..size {
                let i = rng.gen_range(0..len);
                if !member[i] {
                    member[i] = true;
                    drawn.push(i);
                }
            }
            let answer = or_query(&member)?;
            queries += 1;
            if answer.len() != k {
                return Err(Error::Integrity("OR oracle answered the wrong number of strings".into()));
            }
            for (h, &b) in hits.iter_mut().zip(&answer) {
                *h += b as u64;
            }
            for i in drawn.drain(..) {
                member[i] = false;
            }
        }
        for (slot, &h) in first_success.iter_mut().zip(&hits) {
            if slot.is_none() && h >= need {
                *slot = Some(j);
            }
        }
    }
    let estimate = first_success
        .iter()
        .map(|s| match s {
            Some(j) => len as f64 / (1u64 << j) as f64,
            None => 0.0,
        })
        .collect();
    Ok(CountEstimate { estimate, or_queries: queries })
}

/// Whether `b/4 ≤ c ≤ 2b` holds for every component.
pub fn is_good_estimate(estimate: &[f64], weights: &[usize]) -> bool {
    estimate.iter().zip(weights).all(|(&b, &c)| b / 4.0 <= c as f64 && c as f64 <= 2.0 * b)
}

/// With-replacement sample of `⌈8ℓ·ln(k/δ)/t⌉` indices from `0..len`.
pub fn sample_hitting_set<R: Rng + ?Sized>(len: usize, t: usize, k: usize, delta: f64, rng: &mut R) -> Result<Vec<usize>> {
    check_budget(delta)?;
    if t == 0 || len == 0 || k == 0 {
        return Err(Error::Parameter("hitting-set sample needs t, len, k >= 1".into()));
    }
    let size = hitting_set_size(len, t, k, delta);
    Ok((0..size).map(|_| rng.gen_range(0..len)).collect())
}

pub fn hitting_set_size(len: usize, t: usize, k: usize, delta: f64) -> usize {
    (8.0 * len as f64 * (k as f64 / delta).ln() / t as f64).ceil() as usize
}
