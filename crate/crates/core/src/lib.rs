//! Classical simulation of quantum cut-query graph algorithms.
//!
//! Every algorithm talks to a hidden graph through an [`oracle::OracleHandle`]
//! whose [`ledger::QueryLedger`] counts charged queries by kind. Quantum
//! subroutines are simulated at their exact charged cost; their outputs are
//! computed from privileged access and cross-checked by uncharged audit probes.

pub mod adversary;
pub mod connectivity;
pub mod error;
pub mod experiment;
pub mod forest;
pub mod graph;
pub mod graph_learn;
pub mod ledger;
pub mod mask;
pub mod matrix_learn;
pub mod matrix_oracle;
pub mod oracle;
pub mod profile;
pub mod quantum;
pub mod sketch;
pub mod union_find;

pub use error::{Error, Result};

/// Smallest `m` with `2^m ≥ x`; zero for `x ≤ 1`.
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

/// Smallest integer `m` with `2^m ≥ x` for real `x > 0`, robust to rounding
/// when `x` is an exact power of two.
pub fn ceil_log2_real(x: f64) -> i64 {
    assert!(x > 0.0 && x.is_finite(), "ceil_log2_real needs a positive finite argument");
    let mut c = x.log2().ceil() as i64;
    while 2f64.powi((c - 1) as i32) >= x {
        c -= 1;
    }
    while 2f64.powi(c as i32) < x {
        c += 1;
    }
    c
}
