use std::fmt::Display;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kbroadcast::bounds::{audit_chain, audit_tree_bound, BoundError, ChainReport};
use kbroadcast::sat_reduction::{parse_dimacs_cnf, reduce, SatError};
use kbroadcast::solver::{gamma_bk_oracle, gamma_bk_with, SolveError, SolverConfig};
use kbroadcast::spanning::{
    extract_broadcast_tree, spanning_report, SpanningError, DEFAULT_TREE_LIMIT,
};
use kbroadcast::tree_tools::{gen_family, TreeError, TreeFamilySpec};
use kbroadcast::{Graph, GraphError, Power};

#[derive(Parser)]
#[command(name = "kbroadcast", version, about = "Dominating k-broadcasts: solve, generate, reduce, audit")]
struct Cli {
    /// Worker threads (defaults to the available parallelism). `1` gives stable witnesses.
    #[arg(long, global = true, env = "KBROADCAST_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute γ_Bk of a graph.
    Solve(SolveArgs),
    /// Write a graph from a generator family.
    Gen(GenArgs),
    /// Build the 3-SAT reduction graph G(C).
    Reduce(ReduceArgs),
    /// Check bounds over all small trees, or the k-chain of one graph.
    Audit(AuditArgs),
    /// Compare γ_Bk(G) with its minimum over spanning trees.
    Spanning(SpanningArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bnb,
    Oracle,
}

#[derive(Args)]
struct Guards {
    /// Abort the search after this many nodes.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Abort the search after this many seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: Power,
    /// Write the optimal broadcast as JSON.
    #[arg(long)]
    witness: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bnb")]
    method: Method,
    #[command(flatten)]
    guards: Guards,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Tk,
    Path,
    Spider,
    RandomTree,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    k: Option<Power>,
    #[arg(long)]
    n: Option<usize>,
    /// Leg lengths of a spider, comma separated.
    #[arg(long, value_delimiter = ',')]
    legs: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    k: Power,
    /// Graph output file.
    #[arg(long)]
    out: PathBuf,
    /// Role map output (defaults to the graph path with `.roles.json`).
    #[arg(long)]
    roles: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct AuditArgs {
    /// Audit the tree bound over every tree with at most `--max-n` vertices.
    #[arg(long, conflicts_with = "chain", requires_all = ["max_n", "k"])]
    trees: bool,
    /// Audit the chain γ_B1 >= γ_B2 >= ... of `--graph`.
    #[arg(long, requires = "graph")]
    chain: bool,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    k: Option<Power>,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Defaults to a table on a terminal and JSON otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    guards: Guards,
}

#[derive(Args)]
struct SpanningArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: Power,
    /// Write a spanning tree attaining the minimum.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Build a spanning tree from an optimal broadcast of the graph (k >= 3).
    #[arg(long)]
    extract: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TREE_LIMIT as u64)]
    max_trees: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    guards: Guards,
}

/// Exit status plus message.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Display) -> Self {
        Self { code: 2, message: message.to_string() }
    }

    fn guard(message: impl Display) -> Self {
        Self { code: 3, message: message.to_string() }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure::input(e)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Guard { .. }
            | SolveError::OracleTooLarge { .. }
            | SolveError::OracleCostLimit { .. } => Failure::guard(e),
            _ => Failure::input(e),
        }
    }
}

impl From<TreeError> for Failure {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::EnumerationGuard(_) => Failure::guard(e),
            _ => Failure::input(e),
        }
    }
}

impl From<SpanningError> for Failure {
    fn from(e: SpanningError) -> Self {
        match e {
            SpanningError::Solve(e) => e.into(),
            SpanningError::TooManyTrees { .. } => Failure::guard(e),
            _ => Failure::input(e),
        }
    }
}

impl From<BoundError> for Failure {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Solve(e) => e.into(),
            BoundError::Tree(e) => e.into(),
            _ => Failure::input(e),
        }
    }
}

impl From<SatError> for Failure {
    fn from(e: SatError) -> Self {
        match e {
            SatError::Solve(e) => e.into(),
            SatError::TooManyVariables(_) => Failure::guard(e),
            _ => Failure::input(e),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = match cli.command {
        Command::Solve(a) => solve(a, workers),
        Command::Gen(a) => generate(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Audit(a) => audit(a, workers),
        Command::Spanning(a) => spanning(a, workers),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    Graph::from_edge_list(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn config(workers: usize, guards: &Guards) -> Result<SolverConfig, Failure> {
    let time_limit = match guards.time_limit {
        Some(s) if !(s.is_finite() && s >= 0.0) => {
            return Err(Failure::input("--time-limit must be a non-negative number of seconds"))
        }
        s => s.map(Duration::from_secs_f64),
    };
    Ok(SolverConfig {
        max_nodes: guards.max_nodes,
        time_limit,
        ..SolverConfig::default().with_workers(workers)
    })
}

fn format_or_default(format: Option<Format>) -> Format {
    format.unwrap_or(if std::io::stdout().is_terminal() {
        Format::Table
    } else {
        Format::Json
    })
}

fn solve(a: SolveArgs, workers: usize) -> Outcome {
    let g = load_graph(&a.graph)?;
    let result = match a.method {
        Method::Bnb => gamma_bk_with(&g, a.k, &config(workers, &a.guards)?)?,
        Method::Oracle => gamma_bk_oracle(&g, a.k)?,
    };
    println!("{}", result.value);
    if let Some(path) = a.witness {
        write(&path, &(result.witness.to_witness().to_json() + "\n"))?;
    }
    Ok(0)
}

fn generate(a: GenArgs) -> Outcome {
    let missing = |flag: &str| Failure::input(format!("this family needs --{flag}"));
    let spec = match a.family {
        Family::Tk => TreeFamilySpec::ExtremalTk { k: a.k.ok_or_else(|| missing("k"))? },
        Family::Path => TreeFamilySpec::Path { n: a.n.ok_or_else(|| missing("n"))? },
        Family::Spider => TreeFamilySpec::Spider { legs: a.legs },
        Family::RandomTree => TreeFamilySpec::RandomTree {
            n: a.n.ok_or_else(|| missing("n"))?,
            seed: a.seed,
        },
    };
    let text = gen_family(&spec)?.to_edge_list();
    match a.out {
        Some(path) => write(&path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn reduce_cmd(a: ReduceArgs) -> Outcome {
    let formula = parse_dimacs_cnf(&read(&a.cnf)?)?;
    let inst = reduce(&formula, a.k)?;
    write(&a.out, &inst.graph.to_edge_list())?;
    let roles = a.roles.unwrap_or_else(|| a.out.with_extension("roles.json"));
    write(&roles, &(inst.role_map_json() + "\n"))?;
    println!(
        "vertices {}, edges {}, threshold {}",
        inst.graph.order(),
        inst.graph.size(),
        inst.threshold()
    );
    Ok(0)
}

fn audit(a: AuditArgs, workers: usize) -> Outcome {
    let cfg = config(workers, &a.guards)?;
    let format = format_or_default(a.format);
    if a.trees {
        let (max_n, k) = (a.max_n.unwrap(), a.k.unwrap());
        let report = audit_tree_bound(max_n, k, &cfg)?;
        match format {
            Format::Json => print!("{}", report.to_json_lines()),
            Format::Table => print!("{}", report.to_table()),
        }
        return Ok(u8::from(report.summary.violations > 0));
    }
    if a.chain {
        let g = load_graph(a.graph.as_deref().unwrap())?;
        let report = audit_chain(&g, &cfg)?;
        match format {
            Format::Json => println!("{}", serde_json::to_string(&report).expect("serializable")),
            Format::Table => print!("{}", chain_table(&report)),
        }
        return Ok(u8::from(!report.holds()));
    }
    Err(Failure::input("choose --trees or --chain"))
}

fn chain_table(r: &ChainReport) -> String {
    let ks: Vec<String> = (1..=r.chain.len()).map(|k| format!("{k:>4}")).collect();
    let values: Vec<String> = r.chain.iter().map(|v| format!("{v:>4}")).collect();
    let yes_no = |b: bool| if b { "yes" } else { "NO" };
    format!(
        "k     {}\ngamma {}\nmonotone {}, endpoints {} (domination number {}, broadcast number {})\n",
        ks.join(""),
        values.join(""),
        yes_no(r.monotone),
        yes_no(r.endpoints_ok),
        r.domination_number,
        r.broadcast_number
    )
}

fn spanning(a: SpanningArgs, workers: usize) -> Outcome {
    let g = load_graph(&a.graph)?;
    let cfg = config(workers, &a.guards)?;
    if a.extract.is_some() && a.k < 3 {
        return Err(SpanningError::InvalidK(a.k).into());
    }
    let (report, min) = spanning_report(&g, a.k, &cfg, a.max_trees as u128)?;
    match format_or_default(a.format) {
        Format::Json => println!("{}", serde_json::to_string(&report).expect("serializable")),
        Format::Table => println!(
            "graph {}, trees {}, {}",
            report.graph_value,
            report.tree_min,
            if report.equal { "equal" } else { "DIFFERENT" }
        ),
    }
    if let Some(path) = a.tree {
        write(&path, &min.tree.to_edge_list())?;
    }
    if let Some(path) = a.extract {
        let single = SolverConfig { workers: 1, ..cfg };
        let f = gamma_bk_with(&g, a.k, &single)?.witness;
        let ex = extract_broadcast_tree(&g, &f, a.k)?;
        write(&path, &ex.tree.to_edge_list())?;
    }
    Ok(u8::from(!report.equal))
}
