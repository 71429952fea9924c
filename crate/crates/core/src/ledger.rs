//! Query counters, per-subroutine charge traces, and the audit policy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Per-run query counts. `audit` never enters a bound comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub cut: u64,
    pub additive: u64,
    pub matrix_cut: u64,
    /// Logical disjoint matrix cut queries served by the 3-cut reduction.
    pub disjoint_matrix_cut: u64,
    /// Quantum queries issued to subset-sum oracles.
    pub quantum_charged: u64,
    pub audit: u64,
}

impl QueryLedger {
    /// Componentwise `self - before`.
    pub fn since(&self, before: &QueryLedger) -> QueryLedger {
        QueryLedger {
            cut: self.cut - before.cut,
            additive: self.additive - before.additive,
            matrix_cut: self.matrix_cut - before.matrix_cut,
            disjoint_matrix_cut: self.disjoint_matrix_cut - before.disjoint_matrix_cut,
            quantum_charged: self.quantum_charged - before.quantum_charged,
            audit: self.audit - before.audit,
        }
    }

    pub fn charged(&self, kind: ChargeKind) -> u64 {
        match kind {
            ChargeKind::Cut => self.cut,
            ChargeKind::Additive => self.additive,
            ChargeKind::MatrixCut => self.matrix_cut,
        }
    }

    fn charged_mut(&mut self, kind: ChargeKind) -> &mut u64 {
        match kind {
            ChargeKind::Cut => &mut self.cut,
            ChargeKind::Additive => &mut self.additive,
            ChargeKind::MatrixCut => &mut self.matrix_cut,
        }
    }

    pub fn add_charged(&mut self, cost: QueryCost) {
        *self.charged_mut(cost.kind) += cost.units;
    }
}

/// The raw oracle kinds that carry charges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeKind {
    Cut,
    Additive,
    MatrixCut,
}

/// Raw queries spent per matrix query: 3 cut, 5 additive, or 1 direct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCost {
    pub kind: ChargeKind,
    pub units: u64,
}

impl QueryCost {
    pub const CUT_REDUCTION: QueryCost = QueryCost { kind: ChargeKind::Cut, units: 3 };
    pub const ADDITIVE_REDUCTION: QueryCost = QueryCost { kind: ChargeKind::Additive, units: 5 };
    pub const DIRECT_MATRIX: QueryCost = QueryCost { kind: ChargeKind::MatrixCut, units: 1 };
}

/// Parameters from which a subroutine's charge is recomputed independently.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ChargeForm {
    /// Column-by-column learning of a `rows × cols` matrix.
    Dense { rows: usize, cols: usize, modulus: u64, cost: QueryCost },
    /// Sketch-based learning of a matrix with `sparsity`-sparse rows.
    Sketch { rows: usize, cols: usize, sparsity: usize, modulus: u64, delta: f64, cost: QueryCost },
    /// Exact row sums of a Boolean matrix with `cols` columns.
    ExactDegree { rows: usize, cols: usize, cost: QueryCost },
    /// Approximate counting over `strings` strings of length `length`.
    ApproxCount {
        strings: usize,
        length: usize,
        delta: f64,
        repetition: u64,
        modulus: u64,
        cost: QueryCost,
    },
    /// Plain classical queries.
    Direct { kind: ChargeKind, count: u64 },
}

/// One traced subroutine call and the counters it moved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub label: String,
    pub form: ChargeForm,
    pub observed: QueryLedger,
}

/// Ledger, optional trace, and the audit stream for one run.
#[derive(Clone, Debug)]
pub struct Accounting {
    pub ledger: QueryLedger,
    trace: Option<Vec<TraceEvent>>,
    audit_checks: usize,
    audit_rng: ChaCha8Rng,
}

/// Default number of random-subset consistency probes per quantum call.
pub const DEFAULT_AUDIT_CHECKS: usize = 2;

impl Default for Accounting {
    fn default() -> Self {
        Accounting::new(DEFAULT_AUDIT_CHECKS, 0)
    }
}

impl Accounting {
    /// `audit_seed` feeds a stream separate from the algorithm's, so the audit
    /// setting never perturbs charged behaviour.
    pub fn new(audit_checks: usize, audit_seed: u64) -> Self {
        Accounting {
            ledger: QueryLedger::default(),
            trace: None,
            audit_checks,
            audit_rng: ChaCha8Rng::seed_from_u64(audit_seed ^ 0xa0d1_7000_0000_0001),
        }
    }

    pub fn enable_trace(&mut self) {
        if self.trace.is_none() {
            self.trace = Some(Vec::new());
        }
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.take().unwrap_or_default()
    }

    pub fn audit_checks(&self) -> usize {
        self.audit_checks
    }

    pub fn set_audit_checks(&mut self, checks: usize) {
        self.audit_checks = checks;
    }

    pub fn audit_rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.audit_rng
    }

    /// Appends a trace event covering everything charged since `before`.
    pub fn log(&mut self, label: &str, form: ChargeForm, before: QueryLedger) {
        let observed = self.ledger.since(&before);
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent { label: label.to_string(), form, observed });
        }
    }
}
