//! `cutq`: generate graphs, run the cut-query algorithms against a hidden
//! graph, build adversary pairs, and write scaling reports.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when an algorithm
//! hits a statistical failure event (a JSON failure report is printed).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use cutquery::adversary::build_adversary_pair;
use cutquery::experiment::{self, Algorithm, Trial, TrialConfig, TrialOutput};
use cutquery::forest::test_empty_subgraph;
use cutquery::graph::{generate, Family, WeightedGraph};
use cutquery::graph_learn::{learn_graph_additive, learn_graph_cut, learn_graph_cut_full, Budget, LearnOptions};
use cutquery::ledger::{Accounting, DEFAULT_AUDIT_CHECKS};
use cutquery::oracle::{OracleHandle, OracleMode};
use cutquery::profile::Profile;
use cutquery::Error;

#[derive(Parser)]
#[command(name = "cutq", version, about = "Cut-query graph algorithms on a simulated hidden graph")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ProfileArg::Paper)]
    profile: ProfileArg,
    #[arg(long, global = true, value_enum, default_value_t = OracleArg::Cut)]
    oracle: OracleArg,
    /// Output file (or directory for `adversary`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    audit: Switch,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Paper,
    Desk,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OracleArg {
    Cut,
    Additive,
    Matrix,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum LearnMethod {
    /// One dense row per vertex: exactly 3n⌈log₂ M⌉ cut queries.
    Full,
    /// Union of label-bit bipartite subgraphs.
    Split,
}

/// Where the hidden graph comes from.
#[derive(Args, Clone)]
struct GraphSource {
    /// Graph file in the edge-list text format.
    #[arg(long, conflicts_with_all = ["family", "n"])]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "erdos_renyi")]
    family: String,
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Edge probability for erdos_renyi (default 2 ln n / n).
    #[arg(long)]
    p: Option<f64>,
    /// Degree for d_regular.
    #[arg(long)]
    d: Option<usize>,
    /// Weight bound for weighted_random.
    #[arg(long)]
    m: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and print it in the edge-list format.
    Gen(GraphSource),
    /// Reconstruct the hidden graph.
    Learn {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_enum, default_value_t = LearnMethod::Full)]
        method: LearnMethod,
        /// Maximum degree promise; omit to learn with an unknown edge count.
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
    /// Connected components.
    Components(GraphSource),
    /// Spanning forest.
    Forest(GraphSource),
    /// Bipartiteness test.
    Bipartite(GraphSource),
    /// Acyclicity test.
    Acyclic(GraphSource),
    /// One-sided emptiness test of an induced subgraph.
    EmptyTest {
        #[command(flatten)]
        source: GraphSource,
        /// Comma-separated vertex set; all vertices when absent.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
    /// Two graphs that agree on the given cut queries but differ in total weight.
    Adversary {
        #[arg(long)]
        n: usize,
        /// Query sets separated by `;`, vertices by `,` (e.g. "0;1,2").
        #[arg(long, default_value = "")]
        queries: String,
    },
    /// Seeded trials over several sizes.
    Scale {
        #[arg(long, default_value = "components")]
        algo: String,
        #[arg(long, default_value = "erdos_renyi")]
        family: String,
        /// Comma-separated sizes.
        #[arg(long, default_value = "16,32,64,128")]
        n: String,
        #[arg(long, default_value_t = 10)]
        trials: u64,
    },
}

/// Errors sorted by exit code.
enum Failure {
    Usage(String),
    Statistical(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::FailureEvent(msg) => Failure::Statistical(json!({ "failure": msg })),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Statistical(report)) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::from(2)
        }
    }
}

impl Cli {
    fn profile(&self) -> Profile {
        match self.profile {
            ProfileArg::Paper => Profile::Paper,
            ProfileArg::Desk => Profile::Desk,
        }
    }

    fn mode(&self) -> OracleMode {
        match self.oracle {
            OracleArg::Cut => OracleMode::Cut,
            OracleArg::Additive => OracleMode::Additive,
            OracleArg::Matrix => OracleMode::Matrix,
        }
    }

    fn accounting(&self) -> Accounting {
        let checks = if self.audit == Switch::On { DEFAULT_AUDIT_CHECKS } else { 0 };
        Accounting::new(checks, self.seed)
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json(&self, value: &Value) -> CliResult<()> {
        self.emit(&(serde_json::to_string_pretty(value).expect("value serializes") + "\n"))
    }

    fn require_cut(&self) -> CliResult<()> {
        if self.oracle != OracleArg::Cut {
            return Err(Failure::Usage("this subcommand runs on a cut oracle only".into()));
        }
        Ok(())
    }
}

impl GraphSource {
    fn load(&self, seed: u64) -> CliResult<(String, WeightedGraph)> {
        match &self.graph {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                Ok(("file".into(), WeightedGraph::parse_text(&text)?))
            }
            None => {
                let family = Family::parse(&self.family, self.n, self.p, self.d, self.m)?;
                Ok((family.name().into(), generate(family, self.n, seed)?))
            }
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gen(source) => {
            let (_, g) = source.load(cli.seed)?;
            cli.emit(&g.to_text())
        }
        Command::Learn { source, method, max_degree, delta } => learn(cli, source, *method, *max_degree, *delta),
        Command::Components(source) => trial(cli, source, Algorithm::Components),
        Command::Forest(source) => trial(cli, source, Algorithm::Forest),
        Command::Bipartite(source) => trial(cli, source, Algorithm::Bipartite),
        Command::Acyclic(source) => trial(cli, source, Algorithm::Acyclic),
        Command::EmptyTest { source, set, epsilon } => {
            cli.require_cut()?;
            let (_, g) = source.load(cli.seed)?;
            let s: Vec<usize> = match set {
                Some(text) => parse_set(text)?,
                None => (0..g.n()).collect(),
            };
            let mut h = OracleHandle::with_accounting(g, OracleMode::Cut, cli.accounting());
            let empty = test_empty_subgraph(&mut h, &s, *epsilon, &mut experiment::algorithm_rng(cli.seed))?;
            cli.emit_json(&json!({ "empty": empty, "queries": h.ledger() }))
        }
        Command::Adversary { n, queries } => adversary(cli, *n, queries),
        Command::Scale { algo, family, n, trials } => scale(cli, algo, family, n, *trials),
    }
}

fn parse_set(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::Usage(format!("bad vertex `{s}`"))))
        .collect()
}

fn learn(cli: &Cli, source: &GraphSource, method: LearnMethod, max_degree: Option<usize>, delta: f64) -> CliResult<()> {
    let (_, g) = source.load(cli.seed)?;
    let mut h = OracleHandle::with_accounting(g.clone(), cli.mode(), cli.accounting());
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let opts = LearnOptions { profile: cli.profile(), ..LearnOptions::default() };
    let budget = max_degree.map_or(Budget::Edges, Budget::Degree);
    let learned = match (cli.oracle, method) {
        (OracleArg::Cut, LearnMethod::Full) => learn_graph_cut_full(&mut h),
        (OracleArg::Cut, LearnMethod::Split) => learn_graph_cut(&mut h, budget, delta, &opts, &mut rng),
        _ => learn_graph_additive(&mut h, budget, delta, &opts, &mut rng),
    };
    let learned = learned.map_err(|e| with_queries(e, &h))?;
    cli.emit_json(&json!({
        "graph": learned.to_text(),
        "correct": learned == g,
        "queries": h.ledger(),
    }))
}

fn with_queries(e: Error, h: &OracleHandle) -> Failure {
    match Failure::from(e) {
        Failure::Statistical(mut v) => {
            v["queries"] = json!(h.ledger());
            Failure::Statistical(v)
        }
        other => other,
    }
}

fn trial(cli: &Cli, source: &GraphSource, algorithm: Algorithm) -> CliResult<()> {
    cli.require_cut()?;
    let (family, g) = source.load(cli.seed)?;
    let cfg = TrialConfig {
        algorithm,
        family: Family::Empty,
        n: g.n(),
        seed: cli.seed,
        profile: cli.profile(),
        audit: cli.audit == Switch::On,
    };
    let t = experiment::run_on_graph(&cfg, &family, g)?;
    let common = json!({
        "correct": t.record.correct,
        "rounds": t.record.rounds,
        "queries": t.ledger,
        "ledger_verified": t.verification.passed(),
    });
    let mut body = match &t.output {
        TrialOutput::Failure(msg) => {
            let mut v = common;
            v["failure"] = json!(msg);
            return Err(Failure::Statistical(v));
        }
        TrialOutput::Components(c) => json!({ "components": c }),
        TrialOutput::Forest(f) => trees_json(f),
        TrialOutput::Answer { answer, forest, .. } => {
            let mut v = trees_json(forest);
            v["answer"] = json!(answer);
            v
        }
        TrialOutput::Graph(g) => json!({ "graph": g.to_text() }),
    };
    merge(&mut body, common);
    cli.emit_json(&body)
}

fn trees_json(f: &cutquery::graph::SpanningForest) -> Value {
    let trees: Vec<Vec<[usize; 2]>> = f.trees.iter().map(|t| t.edges.iter().map(|&(u, v)| [u, v]).collect()).collect();
    let vertices: Vec<&Vec<usize>> = f.trees.iter().map(|t| &t.vertices).collect();
    json!({ "trees": trees, "tree_vertices": vertices })
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn adversary(cli: &Cli, n: usize, text: &str) -> CliResult<()> {
    let queries: Vec<Vec<usize>> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_set)
        .collect::<CliResult<_>>()?;
    let pair = build_adversary_pair(n, &queries)?;
    let report = pair.report(&queries);
    let certificate = json!({
        "n": n,
        "queries": queries,
        "base_weight": pair.base_weight,
        "query_answers": report.query_answers,
        "totals": report.totals,
        "y_inf_norm": report.y_inf_norm,
        "certificate_bound_holds": report.certificate_bound_holds,
    });
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    write_file(&dir.join("g1.txt"), &pair.g1.to_text())?;
    write_file(&dir.join("g2.txt"), &pair.g2.to_text())?;
    let text = serde_json::to_string_pretty(&certificate).expect("certificate serializes") + "\n";
    write_file(&dir.join("certificate.json"), &text)?;
    print!("{text}");
    Ok(())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn scale(cli: &Cli, algo: &str, family: &str, sizes: &str, trials: u64) -> CliResult<()> {
    cli.require_cut()?;
    let algorithm = Algorithm::parse(algo).ok_or_else(|| Failure::Usage(format!("unknown algorithm `{algo}`")))?;
    let sizes: Vec<usize> = parse_set(sizes)?;
    for &n in &sizes {
        Family::parse(family, n, None, None, None)?;
    }
    let family_for = |n: usize| Family::parse(family, n, None, None, None).expect("validated above");
    let runs = experiment::scale(algorithm, family_for, &sizes, trials, cli.seed, cli.profile(), cli.audit == Switch::On)?;
    match cli.format {
        FormatArg::Csv => {
            let records: Vec<_> = runs.iter().map(|t: &Trial| t.record.clone()).collect();
            let mut buf = Vec::new();
            experiment::write_csv(&mut buf, &records)?;
            cli.emit(&String::from_utf8(buf).expect("csv is utf-8"))
        }
        FormatArg::Json => {
            let rows: Vec<Value> = runs
                .iter()
                .map(|t| {
                    let mut v = json!(t.record);
                    v["ledger_verified"] = json!(t.verification.passed());
                    v
                })
                .collect();
            cli.emit_json(&Value::Array(rows))
        }
    }
}
