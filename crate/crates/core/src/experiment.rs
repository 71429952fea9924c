//! Seeded trial runner, ledger verification against closed-form charges, and
//! CSV scaling reports.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::connected_components;
use crate::error::{Error, Result};
use crate::forest::{spanning_forest, test_acyclic, test_bipartite};
use crate::graph::{generate, Family, SpanningForest, WeightedGraph};
use crate::graph_learn::{learn_graph_cut_full, LearnOptions};
use crate::ledger::{Accounting, ChargeForm, ChargeKind, QueryCost, QueryLedger, TraceEvent, DEFAULT_AUDIT_CHECKS};
use crate::oracle::{OracleHandle, OracleMode};
use crate::profile::Profile;
use crate::{ceil_log2, ceil_log2_real};

/// Algorithms the trial runner knows how to score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Components,
    Forest,
    Bipartite,
    Acyclic,
    LearnCutFull,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Components => "components",
            Algorithm::Forest => "forest",
            Algorithm::Bipartite => "bipartite",
            Algorithm::Acyclic => "acyclic",
            Algorithm::LearnCutFull => "learn_cut_full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Algorithm::Components, Algorithm::Forest, Algorithm::Bipartite, Algorithm::Acyclic, Algorithm::LearnCutFull]
            .into_iter()
            .find(|a| a.name() == s)
    }
}

/// Everything that identifies one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialConfig {
    pub algorithm: Algorithm,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub profile: Profile,
    pub audit: bool,
}

/// One row of a scaling report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub seed: u64,
    pub algorithm: String,
    pub family: String,
    pub profile: String,
    pub cut_queries: u64,
    pub additive_queries: u64,
    pub matrix_cut_queries: u64,
    pub quantum_charged: u64,
    pub audit_queries: u64,
    pub correct: bool,
    pub rounds: usize,
}

/// Algorithm-specific result of a trial.
#[derive(Clone, Debug, PartialEq)]
pub enum TrialOutput {
    Components(Vec<Vec<usize>>),
    Forest(SpanningForest),
    Answer { answer: bool, bipartite: bool, forest: SpanningForest },
    Graph(WeightedGraph),
    Failure(String),
}

/// A finished trial: its record, the charge trace, and the ledger check.
#[derive(Clone, Debug)]
pub struct Trial {
    pub record: RunRecord,
    pub ledger: QueryLedger,
    pub trace: Vec<TraceEvent>,
    pub verification: LedgerReport,
    pub output: TrialOutput,
    /// The bipartiteness answer matched the reference (forest-based tests only).
    pub bipartite_correct: Option<bool>,
}

/// RNG stream for the algorithm; the graph generator uses `seed` itself.
pub fn algorithm_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_a190_0000)
}

/// Runs one trial on a freshly generated graph with tracing enabled.
pub fn run_trial(cfg: &TrialConfig) -> Result<Trial> {
    let g = generate(cfg.family, cfg.n, cfg.seed)?;
    run_on_graph(cfg, cfg.family.name(), g)
}

/// Runs one trial on a given graph, recorded under `family`; statistical
/// failures become incorrect rows.
pub fn run_on_graph(cfg: &TrialConfig, family: &str, g: WeightedGraph) -> Result<Trial> {
    let checks = if cfg.audit { DEFAULT_AUDIT_CHECKS } else { 0 };
    let mut acct = Accounting::new(checks, cfg.seed);
    acct.enable_trace();
    let mut h = OracleHandle::with_accounting(g.clone(), OracleMode::Cut, acct);
    let mut rng = algorithm_rng(cfg.seed);
    let opts = LearnOptions { profile: cfg.profile, ..LearnOptions::default() };
    let mut bipartite_correct = None;
    let outcome: Result<(TrialOutput, bool, usize)> = match cfg.algorithm {
        Algorithm::Components => connected_components(&mut h, &opts, &mut rng).map(|run| {
            let ok = run.components == g.reference_components();
            (TrialOutput::Components(run.components), ok, run.rounds)
        }),
        Algorithm::Forest => spanning_forest(&mut h, &opts, &mut rng).map(|run| {
            let ok = run.forest.validate(&g).is_ok();
            (TrialOutput::Forest(run.forest), ok, run.rounds)
        }),
        Algorithm::Bipartite | Algorithm::Acyclic => {
            let run = if cfg.algorithm == Algorithm::Bipartite {
                test_bipartite(&mut h, &opts, &mut rng)
            } else {
                test_acyclic(&mut h, &opts, &mut rng)
            };
            run.map(|t| {
                let reference =
                    if cfg.algorithm == Algorithm::Bipartite { g.reference_is_bipartite() } else { g.reference_is_acyclic() };
                bipartite_correct = Some(t.bipartite == g.reference_is_bipartite());
                let out = TrialOutput::Answer { answer: t.answer, bipartite: t.bipartite, forest: t.forest };
                (out, t.answer == reference, t.rounds)
            })
        }
        Algorithm::LearnCutFull => learn_graph_cut_full(&mut h).map(|learned| {
            let ok = learned == g;
            (TrialOutput::Graph(learned), ok, 1)
        }),
    };
    let (output, correct, rounds) = match outcome {
        Ok(v) => v,
        Err(Error::FailureEvent(msg)) => (TrialOutput::Failure(msg), false, 0),
        Err(e) => return Err(e),
    };
    let ledger = h.ledger();
    let trace = h.accounting().take_trace();
    let verification = verify_ledger(&ledger, &trace);
    let record = RunRecord {
        n: g.n(),
        seed: cfg.seed,
        algorithm: cfg.algorithm.name().to_string(),
        family: family.to_string(),
        profile: cfg.profile.name().to_string(),
        cut_queries: ledger.cut,
        additive_queries: ledger.additive,
        matrix_cut_queries: ledger.matrix_cut,
        quantum_charged: ledger.quantum_charged,
        audit_queries: ledger.audit,
        correct,
        rounds,
    };
    Ok(Trial { record, ledger, trace, verification, output, bipartite_correct })
}

/// Result of checking a trace against closed-form charges.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub events: usize,
    pub mismatches: Vec<String>,
}

impl LedgerReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Quantum queries a traced subroutine must have issued, from its parameters alone.
pub fn expected_quantum_queries(form: &ChargeForm) -> u64 {
    match *form {
        ChargeForm::Dense { rows, cols, modulus, .. } => rows.min(cols) as u64 * ceil_log2(modulus),
        ChargeForm::Sketch { rows, cols, sparsity, modulus, delta, .. } => {
            if rows == 0 || sparsity == 0 {
                return 0;
            }
            let spread = ceil_log2_real(modulus as f64 * cols as f64 / sparsity as f64).max(0) as u64;
            let columns = 4 * sparsity as u64 * spread + ceil_log2_real(1.0 / delta).max(0) as u64;
            columns * ceil_log2(modulus)
        }
        ChargeForm::ExactDegree { rows, cols, .. } => {
            if rows == 0 || cols == 0 {
                0
            } else {
                ceil_log2(cols as u64 + 1)
            }
        }
        ChargeForm::ApproxCount { strings, length, delta, repetition, modulus, .. } => {
            if strings == 0 || length == 0 {
                return 0;
            }
            let rounds = ceil_log2(length as u64) + 1;
            let majority = repetition * ceil_log2_real(strings as f64 * rounds as f64 / delta).max(1) as u64;
            majority * rounds * ceil_log2(modulus)
        }
        ChargeForm::Direct { .. } => 0,
    }
}

/// Raw charged queries of a traced subroutine, by kind.
pub fn expected_charge(form: &ChargeForm) -> (ChargeKind, u64) {
    let scaled = |cost: QueryCost| (cost.kind, expected_quantum_queries(form) * cost.units);
    match *form {
        ChargeForm::Dense { cost, .. }
        | ChargeForm::Sketch { cost, .. }
        | ChargeForm::ExactDegree { cost, .. }
        | ChargeForm::ApproxCount { cost, .. } => scaled(cost),
        ChargeForm::Direct { kind, count } => (kind, count),
    }
}

/// Recomputes every traced charge and checks that the events account for the
/// whole ledger, audit probes excepted.
pub fn verify_ledger(ledger: &QueryLedger, trace: &[TraceEvent]) -> LedgerReport {
    let mut report = LedgerReport { events: trace.len(), mismatches: Vec::new() };
    let mut total = QueryLedger::default();
    for (i, ev) in trace.iter().enumerate() {
        let (kind, units) = expected_charge(&ev.form);
        let quantum = expected_quantum_queries(&ev.form);
        let mut expected = QueryLedger { quantum_charged: quantum, ..QueryLedger::default() };
        expected.add_charged(QueryCost { kind, units });
        for (name, want, got) in [
            ("cut", expected.cut, ev.observed.cut),
            ("additive", expected.additive, ev.observed.additive),
            ("matrix_cut", expected.matrix_cut, ev.observed.matrix_cut),
            ("quantum_charged", expected.quantum_charged, ev.observed.quantum_charged),
        ] {
            if want != got {
                report.mismatches.push(format!("event {i} ({}): {name} expected {want}, observed {got}", ev.label));
            }
        }
        total.cut += ev.observed.cut;
        total.additive += ev.observed.additive;
        total.matrix_cut += ev.observed.matrix_cut;
        total.quantum_charged += ev.observed.quantum_charged;
    }
    for (name, traced, actual) in [
        ("cut", total.cut, ledger.cut),
        ("additive", total.additive, ledger.additive),
        ("matrix_cut", total.matrix_cut, ledger.matrix_cut),
        ("quantum_charged", total.quantum_charged, ledger.quantum_charged),
    ] {
        if traced != actual {
            report.mismatches.push(format!("{name}: traced events sum to {traced}, ledger holds {actual}"));
        }
    }
    report
}

/// Runs `trials` seeds per size, concurrently, ordered by `(n, seed)`.
pub fn scale(
    algorithm: Algorithm,
    family_for: impl Fn(usize) -> Family + Sync,
    sizes: &[usize],
    trials: u64,
    base_seed: u64,
    profile: Profile,
    audit: bool,
) -> Result<Vec<Trial>> {
    let configs: Vec<TrialConfig> = sizes
        .iter()
        .flat_map(|&n| {
            let family = family_for(n);
            (0..trials).map(move |t| TrialConfig { algorithm, family, n, seed: base_seed + t, profile, audit })
        })
        .collect();
    let mut out: Vec<Trial> = configs.par_iter().map(run_trial).collect::<Result<_>>()?;
    out.sort_by_key(|t| (t.record.n, t.record.seed));
    Ok(out)
}

/// The fixed CSV header.
pub const CSV_HEADER: &str =
    "n,seed,algorithm,family,profile,cut_queries,additive_queries,matrix_cut_queries,quantum_charged,audit_queries,correct,rounds";

/// Writes records as CSV with the fixed header.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Integrity(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Integrity(format!("csv: {e}")))?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fitted_exponent(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
