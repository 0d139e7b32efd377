//! Command-line front end.
//!
//! Every subcommand writes its outputs plus a `manifest.json` into `--out`.
//! The manifest holds the fully resolved arguments (input paths made
//! absolute), SHA-256 digests of the inputs, the seeds and the tool
//! version; `drgep replay --manifest M --out DIR` reruns it.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when the error
//! oracle fails or rejects every candidate.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{bench_csv, run_benchmark, sweep_csv, threshold_sweep};
use crate::graph::{build_graph, parse_edge_list, random_graph, write_edge_list, InteractionGraph};
use crate::heaps::QueueKind;
use crate::kinetics::{generate_synthetic_samples, load_rate_samples, write_rate_samples, RateSampleSet};
use crate::mechanism::{emit_mechanism, emit_skeletal_mechanism, parse_mechanism, synthetic_mechanism, Mechanism};
use crate::reduction::{
    check_order_independence, reduce, select_threshold_external, ReductionConfig, ReductionError,
    ReductionReport,
};
use crate::search::{run_search, Algorithm, AlgorithmKind};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "drgep", version, about = "Skeletal mechanism reduction with exact and heuristic graph searches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Reduce a mechanism at a fixed threshold or at the largest threshold
    /// an external error oracle accepts.
    Reduce(ReduceArgs),
    /// Dump overall interaction coefficients for one graph.
    Search(SearchArgs),
    /// Check whether reduction results survive species reordering.
    ShuffleTest(ShuffleArgs),
    /// Time search algorithms on interaction graphs.
    Bench(BenchArgs),
    /// Time threshold-pruned searches across thresholds.
    BenchSweep(SweepArgs),
    /// Write seeded synthetic reaction rates for a mechanism.
    GenSamples(GenSamplesArgs),
    /// Write a seeded random interaction graph.
    GenGraph(GenGraphArgs),
    /// Write a seeded synthetic mechanism.
    GenMech(GenMechArgs),
    /// Rerun a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SearchChoice {
    /// Search algorithm: dfs, modified-dfs, bfs, rbfs or dijkstra
    #[arg(long)]
    algorithm: AlgorithmKind,
    /// Priority queue for Dijkstra: naive, binary-heap or fibonacci-heap
    #[arg(long, default_value = "binary-heap")]
    queue: QueueKind,
    /// Scan a dense weight matrix instead of adjacency lists in Dijkstra
    #[arg(long)]
    dense: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct MechanismInput {
    /// Mechanism file
    #[arg(long)]
    mech: PathBuf,
    /// Rate sample file; repeat for several datasets
    #[arg(long, required = true)]
    rates: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct ReduceArgs {
    #[command(flatten)]
    input: MechanismInput,
    /// Target species, comma separated or repeated
    #[arg(long, required = true, value_delimiter = ',')]
    targets: Vec<String>,
    /// Fixed cutoff threshold in (0, 1]
    #[arg(long, conflicts_with_all = ["error_limit", "oracle"])]
    epsilon: Option<f64>,
    /// Largest acceptable oracle error, in percent
    #[arg(long, requires = "oracle")]
    error_limit: Option<f64>,
    /// Error oracle program, run as `PROGRAM SKELETAL DETAILED`; prints the error in percent
    #[arg(long, requires = "error_limit")]
    oracle: Option<PathBuf>,
    #[command(flatten)]
    search: SearchChoice,
    /// Disable time-dependent target scaling
    #[arg(long)]
    no_scaling: bool,
    /// Worker threads for per-sample searches
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SearchArgs {
    /// Edge-list graph file
    #[arg(long, conflicts_with_all = ["mech", "rates"], required_unless_present = "mech")]
    graph: Option<PathBuf>,
    /// Mechanism file, used with --rates to build the graph of one sample
    #[arg(long, requires = "rates")]
    mech: Option<PathBuf>,
    /// Rate sample file; repeat for several datasets
    #[arg(long, requires = "mech")]
    rates: Vec<PathBuf>,
    /// Index of the sample to build the graph from
    #[arg(long, default_value_t = 0)]
    sample: usize,
    /// Target species, comma separated or repeated
    #[arg(long, required = true, value_delimiter = ',')]
    targets: Vec<String>,
    /// Threshold for RBFS; with dijkstra, prunes relaxations below it
    #[arg(long)]
    epsilon: Option<f64>,
    #[command(flatten)]
    search: SearchChoice,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct ShuffleArgs {
    #[command(flatten)]
    input: MechanismInput,
    /// Target species, comma separated or repeated
    #[arg(long, required = true, value_delimiter = ',')]
    targets: Vec<String>,
    /// Cutoff threshold in (0, 1]
    #[arg(long)]
    epsilon: f64,
    #[command(flatten)]
    search: SearchChoice,
    /// Disable time-dependent target scaling
    #[arg(long)]
    no_scaling: bool,
    /// First shuffle seed
    #[arg(long)]
    seed: u64,
    /// Number of shuffles, using consecutive seeds
    #[arg(long, default_value_t = 5)]
    shuffles: u64,
    /// Worker threads for per-sample searches
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct GraphSource {
    /// Edge-list graph file; repeat for several graphs
    #[arg(long, conflicts_with_all = ["seed", "nodes", "edges", "graphs"], required_unless_present = "seed")]
    graph: Vec<PathBuf>,
    /// Seed of the first generated graph; later graphs use the following seeds
    #[arg(long)]
    seed: Option<u64>,
    /// Nodes per generated graph
    #[arg(long, default_value_t = 2115)]
    nodes: usize,
    /// Edges per generated graph [default: 10 per node]
    #[arg(long)]
    edges: Option<usize>,
    /// Number of generated graphs
    #[arg(long, default_value_t = 1)]
    graphs: usize,
    /// Target node indices, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0")]
    targets: Vec<usize>,
    /// Timed repetitions after one warm-up pass
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct BenchArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Algorithms, comma separated: dfs, modified-dfs, bfs, rbfs, dijkstra-naive,
    /// dijkstra-adj, dijkstra-binary-heap, dijkstra-fibonacci-heap
    #[arg(long, required = true, value_delimiter = ',')]
    algorithms: Vec<String>,
    /// Threshold for rbfs
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SweepArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Thresholds, comma separated, each in (0, 1]
    #[arg(long, required = true, value_delimiter = ',')]
    epsilons: Vec<f64>,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct GenSamplesArgs {
    /// Mechanism file
    #[arg(long)]
    mech: PathBuf,
    /// Random seed
    #[arg(long)]
    seed: u64,
    /// Number of samples
    #[arg(long)]
    count: usize,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct GenGraphArgs {
    /// Random seed
    #[arg(long)]
    seed: u64,
    /// Number of nodes
    #[arg(long, default_value_t = 2115)]
    nodes: usize,
    /// Number of edges [default: 10 per node]
    #[arg(long)]
    edges: Option<usize>,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct GenMechArgs {
    /// Random seed
    #[arg(long)]
    seed: u64,
    /// Number of species
    #[arg(long)]
    species: usize,
    /// Number of reactions
    #[arg(long)]
    reactions: usize,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct ReplayArgs {
    /// Manifest written by an earlier run
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunManifest {
    tool: String,
    version: String,
    command: Command,
    inputs: Vec<InputFile>,
    seeds: Vec<u64>,
    config: Option<ReductionConfig>,
    outputs: Vec<String>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Oracle(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Oracle(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Oracle(m) => m,
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Oracle { .. } | ReductionError::NoCandidate { .. } => CliError::Oracle(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Replay(args) => replay(&args),
        other => execute(other),
    }
}

fn replay(args: &ReplayArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.manifest)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.manifest.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{} is not a valid manifest: {e}", args.manifest.display())))?;
    if manifest.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            manifest.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    for input in &manifest.inputs {
        let digest = sha256_file(&input.path)?;
        if digest != input.sha256 {
            return Err(CliError::Input(format!(
                "input {} changed since the manifest was written",
                input.path.display()
            )));
        }
    }
    let mut command = manifest.command;
    set_out(&mut command, &args.out);
    execute(command)
}

fn set_out(command: &mut Command, out: &Path) {
    let slot = match command {
        Command::Reduce(a) => &mut a.out,
        Command::Search(a) => &mut a.out,
        Command::ShuffleTest(a) => &mut a.out,
        Command::Bench(a) => &mut a.out,
        Command::BenchSweep(a) => &mut a.out,
        Command::GenSamples(a) => &mut a.out,
        Command::GenGraph(a) => &mut a.out,
        Command::GenMech(a) => &mut a.out,
        Command::Replay(a) => &mut a.out,
    };
    *slot = out.to_path_buf();
}

fn absolute(p: &mut PathBuf) -> CliResult<()> {
    *p = std::path::absolute(&*p).map_err(|e| CliError::Input(format!("bad path {}: {e}", p.display())))?;
    Ok(())
}

fn absolute_all(ps: &mut [PathBuf]) -> CliResult<()> {
    ps.iter_mut().try_for_each(absolute)
}

/// Collects output files and writes them with a manifest.
struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            names: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        self.names.push(name.to_string());
        Ok(())
    }

    fn finish(self, command: Command, inputs: Vec<InputFile>, seeds: Vec<u64>, config: Option<ReductionConfig>) -> CliResult<()> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            inputs,
            seeds,
            config,
            outputs: self.names,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
    }
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut hex = String::with_capacity(64);
    for b in Sha256::digest(&bytes).iter() {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(hex)
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn input_files(paths: &[&PathBuf]) -> CliResult<Vec<InputFile>> {
    paths
        .iter()
        .map(|p| {
            Ok(InputFile {
                path: (*p).clone(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

fn load_mechanism(path: &Path) -> CliResult<Mechanism> {
    let mut mech = parse_mechanism(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if let Some(stem) = path.file_stem() {
        mech.name = stem.to_string_lossy().into_owned();
    }
    Ok(mech)
}

fn load_samples(mech: &Mechanism, paths: &[PathBuf]) -> CliResult<RateSampleSet> {
    let sets = paths
        .iter()
        .map(|p| {
            let id = p.file_stem().map_or_else(|| "rates".into(), |s| s.to_string_lossy().into_owned());
            load_rate_samples(&read_text(p)?, mech, &id).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    RateSampleSet::merge(sets, mech.reaction_count()).map_err(input_err)
}

fn reduction_config(
    targets: &[String],
    epsilon: Option<f64>,
    error_limit: Option<f64>,
    search: &SearchChoice,
    no_scaling: bool,
) -> ReductionConfig {
    ReductionConfig {
        targets: targets.to_vec(),
        threshold: epsilon,
        error_limit,
        scaling: !no_scaling,
        algorithm: search.algorithm,
        queue: search.queue,
        adjacency: !search.dense,
    }
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Reduce(a) => cmd_reduce(a),
        Command::Search(a) => cmd_search(a),
        Command::ShuffleTest(a) => cmd_shuffle(a),
        Command::Bench(a) => cmd_bench(a),
        Command::BenchSweep(a) => cmd_sweep(a),
        Command::GenSamples(a) => cmd_gen_samples(a),
        Command::GenGraph(a) => cmd_gen_graph(a),
        Command::GenMech(a) => cmd_gen_mech(a),
        Command::Replay(a) => replay(&a),
    }
}

fn cmd_reduce(mut a: ReduceArgs) -> CliResult<()> {
    absolute(&mut a.input.mech)?;
    absolute_all(&mut a.input.rates)?;
    if let Some(o) = a.oracle.as_mut() {
        absolute(o)?;
    }
    let mech = load_mechanism(&a.input.mech)?;
    let samples = load_samples(&mech, &a.input.rates)?;
    let config = reduction_config(&a.targets, a.epsilon, a.error_limit, &a.search, a.no_scaling);
    let mut out = Outputs::new(&a.out)?;

    let report: ReductionReport = match (a.epsilon, a.error_limit, &a.oracle) {
        (Some(_), _, _) => reduce(&mech, &samples, &config, a.jobs)?,
        (None, Some(limit), Some(oracle)) => {
            let scratch = a.out.join("candidate.mech");
            let result = select_threshold_external(&mech, &samples, &config, oracle, &a.input.mech, &scratch, limit, a.jobs);
            let _ = std::fs::remove_file(&scratch);
            result?
        }
        _ => {
            return Err(CliError::Input(
                "give either --epsilon or both --error-limit and --oracle".into(),
            ))
        }
    };
    let skeletal = emit_skeletal_mechanism(&mech, &report.retained_set()).map_err(input_err)?;
    out.write("report.json", &report.to_json())?;
    out.write("importance.csv", &report.to_csv())?;
    out.write("skeletal.mech", &skeletal)?;
    for (phase, seconds) in &report.timings.0 {
        eprintln!("{phase}: {seconds:.6} s");
    }
    println!(
        "threshold {:e}: {} of {} species, {} of {} reactions",
        report.threshold,
        report.retained.len(),
        mech.species_count(),
        report.retained_reaction_count,
        mech.reaction_count()
    );

    let mut paths: Vec<&PathBuf> = vec![&a.input.mech];
    paths.extend(&a.input.rates);
    paths.extend(a.oracle.as_ref());
    let inputs = input_files(&paths)?;
    let mut config = config;
    config.threshold = Some(report.threshold);
    out.finish(Command::Reduce(a.clone()), inputs, Vec::new(), Some(config))
}

fn resolve_names(names: &[String], wanted: &[String]) -> CliResult<Vec<usize>> {
    wanted
        .iter()
        .map(|w| {
            names
                .iter()
                .position(|n| n.eq_ignore_ascii_case(w))
                .ok_or_else(|| CliError::Input(format!("unknown target species `{w}`")))
        })
        .collect()
}

fn search_algorithm(choice: &SearchChoice, epsilon: Option<f64>) -> CliResult<Algorithm> {
    let adjacency = !choice.dense;
    Ok(match (choice.algorithm, epsilon) {
        (AlgorithmKind::Dfs, _) => Algorithm::Dfs,
        (AlgorithmKind::ModifiedDfs, _) => Algorithm::ModifiedDfs,
        (AlgorithmKind::Bfs, _) => Algorithm::Bfs,
        (AlgorithmKind::Rbfs, Some(epsilon)) => Algorithm::Rbfs { epsilon },
        (AlgorithmKind::Rbfs, None) => return Err(CliError::Input("rbfs needs --epsilon".into())),
        (AlgorithmKind::Dijkstra, None) => Algorithm::Dijkstra {
            queue: choice.queue,
            adjacency,
        },
        (AlgorithmKind::Dijkstra, Some(epsilon)) => Algorithm::PrunedDijkstra {
            queue: choice.queue,
            adjacency,
            epsilon,
        },
    })
}

fn cmd_search(mut a: SearchArgs) -> CliResult<()> {
    if let Some(g) = a.graph.as_mut() {
        absolute(g)?;
    }
    if let Some(m) = a.mech.as_mut() {
        absolute(m)?;
    }
    absolute_all(&mut a.rates)?;
    let (graph, names): (InteractionGraph, Vec<String>) = match (&a.graph, &a.mech) {
        (Some(path), _) => parse_edge_list(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        (None, Some(mech_path)) => {
            let mech = load_mechanism(mech_path)?;
            let samples = load_samples(&mech, &a.rates)?;
            let sample = samples.samples().get(a.sample).ok_or_else(|| {
                CliError::Input(format!("sample {} out of range, {} samples loaded", a.sample, samples.len()))
            })?;
            (build_graph(&mech, sample), mech.species_names())
        }
        (None, None) => return Err(CliError::Input("give --graph or --mech with --rates".into())),
    };
    let targets = resolve_names(&names, &a.targets)?;
    let algorithm = search_algorithm(&a.search, a.epsilon)?;
    let vectors = run_search(&graph, &targets, &algorithm).map_err(input_err)?;

    let mut csv = String::from("species");
    if matches!(algorithm, Algorithm::ModifiedDfs) {
        csv.push_str(",all-targets");
    } else {
        for &t in &targets {
            let _ = write!(csv, ",{}", names[t]);
        }
    }
    csv.push('\n');
    for (s, name) in names.iter().enumerate() {
        csv.push_str(name);
        for v in &vectors {
            let _ = write!(csv, ",{:e}", v.values[s]);
        }
        csv.push('\n');
    }
    let mut out = Outputs::new(&a.out)?;
    out.write("oic.csv", &csv)?;
    println!("{}: {} nodes, {} edges", algorithm.label(), graph.node_count(), graph.edge_count());

    let mut paths: Vec<&PathBuf> = a.graph.iter().chain(a.mech.iter()).collect();
    paths.extend(&a.rates);
    let inputs = input_files(&paths)?;
    out.finish(Command::Search(a.clone()), inputs, Vec::new(), None)
}

fn cmd_shuffle(mut a: ShuffleArgs) -> CliResult<()> {
    absolute(&mut a.input.mech)?;
    absolute_all(&mut a.input.rates)?;
    let mech = load_mechanism(&a.input.mech)?;
    let samples = load_samples(&mech, &a.input.rates)?;
    let config = reduction_config(&a.targets, Some(a.epsilon), None, &a.search, a.no_scaling);
    let seeds: Vec<u64> = (0..a.shuffles).map(|i| a.seed.wrapping_add(i)).collect();
    let report = check_order_independence(&mech, &samples, &config, &seeds, a.jobs)?;
    let mut out = Outputs::new(&a.out)?;
    out.write("order_independence.json", &report.to_json())?;
    println!(
        "{}: {} over {} shuffles",
        report.algorithm,
        if report.independent { "order independent" } else { "order dependent" },
        seeds.len()
    );
    let mut paths: Vec<&PathBuf> = vec![&a.input.mech];
    paths.extend(&a.input.rates);
    let inputs = input_files(&paths)?;
    out.finish(Command::ShuffleTest(a.clone()), inputs, seeds, Some(config))
}

/// Loads or generates the benchmark graphs, returning them with the seeds
/// used.
fn bench_graphs(source: &mut GraphSource) -> CliResult<(Vec<InteractionGraph>, Vec<u64>)> {
    absolute_all(&mut source.graph)?;
    if !source.graph.is_empty() {
        let graphs = source
            .graph
            .iter()
            .map(|p| {
                parse_edge_list(&read_text(p)?)
                    .map(|(g, _)| g)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
            })
            .collect::<CliResult<Vec<_>>>()?;
        return Ok((graphs, Vec::new()));
    }
    let seed = source.seed.ok_or_else(|| CliError::Input("give --graph or --seed".into()))?;
    let edges = source.edges.unwrap_or(10 * source.nodes);
    let seeds: Vec<u64> = (0..source.graphs as u64).map(|i| seed.wrapping_add(i)).collect();
    let graphs = seeds
        .iter()
        .map(|&s| random_graph(s, source.nodes, edges).map_err(input_err))
        .collect::<CliResult<Vec<_>>>()?;
    Ok((graphs, seeds))
}

fn check_targets(graphs: &[InteractionGraph], targets: &[usize]) -> CliResult<()> {
    for g in graphs {
        if let Some(&t) = targets.iter().find(|&&t| t >= g.node_count()) {
            return Err(CliError::Input(format!(
                "target node {t} out of range for a graph with {} nodes",
                g.node_count()
            )));
        }
    }
    Ok(())
}

/// Parses a benchmark algorithm name as printed in benchmark tables.
pub fn parse_bench_algorithm(name: &str, epsilon: Option<f64>) -> std::result::Result<Algorithm, String> {
    let dijkstra = |queue, adjacency| Algorithm::Dijkstra { queue, adjacency };
    Ok(match name {
        "dfs" => Algorithm::Dfs,
        "modified-dfs" => Algorithm::ModifiedDfs,
        "bfs" => Algorithm::Bfs,
        "rbfs" => Algorithm::Rbfs {
            epsilon: epsilon.ok_or("rbfs needs --epsilon")?,
        },
        "dijkstra-naive" => dijkstra(QueueKind::Naive, false),
        "dijkstra-adj" => dijkstra(QueueKind::Naive, true),
        "dijkstra-binary-heap" => dijkstra(QueueKind::BinaryHeap, true),
        "dijkstra-fibonacci-heap" => dijkstra(QueueKind::FibonacciHeap, true),
        "dijkstra-binary-heap-dense" => dijkstra(QueueKind::BinaryHeap, false),
        "dijkstra-fibonacci-heap-dense" => dijkstra(QueueKind::FibonacciHeap, false),
        other => return Err(format!("unknown benchmark algorithm `{other}`")),
    })
}

fn cmd_bench(mut a: BenchArgs) -> CliResult<()> {
    let (graphs, seeds) = bench_graphs(&mut a.source)?;
    check_targets(&graphs, &a.source.targets)?;
    let algorithms = a
        .algorithms
        .iter()
        .map(|n| parse_bench_algorithm(n, a.epsilon).map_err(CliError::Input))
        .collect::<CliResult<Vec<_>>>()?;
    let results = run_benchmark(&graphs, &a.source.targets, &algorithms, a.source.repetitions).map_err(input_err)?;
    let csv = bench_csv(&results);
    let mut out = Outputs::new(&a.out)?;
    out.write("bench.csv", &csv)?;
    print!("{csv}");
    let inputs = input_files(&a.source.graph.iter().collect::<Vec<_>>())?;
    out.finish(Command::Bench(a.clone()), inputs, seeds, None)
}

fn cmd_sweep(mut a: SweepArgs) -> CliResult<()> {
    let (graphs, seeds) = bench_graphs(&mut a.source)?;
    check_targets(&graphs, &a.source.targets)?;
    let results = threshold_sweep(&graphs, &a.source.targets, &a.epsilons, a.source.repetitions).map_err(input_err)?;
    let csv = sweep_csv(&results);
    let mut out = Outputs::new(&a.out)?;
    out.write("sweep.csv", &csv)?;
    print!("{csv}");
    let inputs = input_files(&a.source.graph.iter().collect::<Vec<_>>())?;
    out.finish(Command::BenchSweep(a.clone()), inputs, seeds, None)
}

fn cmd_gen_samples(mut a: GenSamplesArgs) -> CliResult<()> {
    absolute(&mut a.mech)?;
    let mech = load_mechanism(&a.mech)?;
    if a.count == 0 {
        return Err(CliError::Input("--count must be at least 1".into()));
    }
    let set = generate_synthetic_samples(&mech, a.seed, a.count);
    let mut out = Outputs::new(&a.out)?;
    out.write("rates.csv", &write_rate_samples(&set, &format!("synthetic-{}", a.seed)))?;
    let inputs = input_files(&[&a.mech])?;
    out.finish(Command::GenSamples(a.clone()), inputs, vec![a.seed], None)
}

fn cmd_gen_graph(a: GenGraphArgs) -> CliResult<()> {
    let edges = a.edges.unwrap_or(10 * a.nodes);
    let g = random_graph(a.seed, a.nodes, edges).map_err(input_err)?;
    let names: Vec<String> = (0..a.nodes).map(|i| format!("N{i}")).collect();
    let mut out = Outputs::new(&a.out)?;
    out.write("graph.txt", &write_edge_list(&g, &names))?;
    out.finish(Command::GenGraph(a.clone()), Vec::new(), vec![a.seed], None)
}

fn cmd_gen_mech(a: GenMechArgs) -> CliResult<()> {
    if a.species < 2 || a.reactions == 0 {
        return Err(CliError::Input("need at least 2 species and 1 reaction".into()));
    }
    let mech = synthetic_mechanism(a.seed, a.species, a.reactions);
    let mut out = Outputs::new(&a.out)?;
    out.write("mechanism.mech", &emit_mechanism(&mech))?;
    out.finish(Command::GenMech(a.clone()), Vec::new(), vec![a.seed], None)
}

/// Names of every retained species in a report file, for quick checks.
pub fn retained_species_from_report(json: &str) -> Option<BTreeSet<String>> {
    let v: serde_json::Value = serde_json::from_str(json).ok()?;
    v.get("retained_species")?
        .as_array()?
        .iter()
        .map(|s| s.as_str().map(str::to_string))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn every_flag_is_documented() {
        let cmd = Cli::command();
        for sub in cmd.get_subcommands() {
            assert!(sub.get_about().is_some(), "{} has no description", sub.get_name());
            for arg in sub.get_arguments() {
                let id = arg.get_id().as_str();
                if id == "help" || id == "version" {
                    continue;
                }
                assert!(
                    arg.get_help().is_some_and(|h| !h.to_string().is_empty()),
                    "{} --{id} has no help text",
                    sub.get_name()
                );
            }
        }
    }

    #[test]
    fn help_lists_every_flag() {
        let mut cmd = Cli::command();
        cmd.build();
        for sub in cmd.get_subcommands() {
            let help = sub.clone().render_long_help().to_string();
            for arg in sub.get_arguments() {
                if let Some(long) = arg.get_long() {
                    assert!(help.contains(&format!("--{long}")), "{} help misses --{long}", sub.get_name());
                }
            }
        }
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run(["drgep", "--help"]), 0);
        assert_eq!(run(["drgep", "--version"]), 0);
        assert_eq!(run(["drgep", "reduce", "--help"]), 0);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["drgep", "frobnicate"]), 1);
        assert_eq!(run(["drgep", "reduce", "--bogus"]), 1);
        // the algorithm flag has no default
        assert_eq!(
            run(["drgep", "reduce", "--mech", "m", "--rates", "r", "--targets", "A", "--epsilon", "0.5", "--out", "o"]),
            1
        );
    }

    #[test]
    fn bench_algorithm_names_round_trip() {
        for name in [
            "dfs",
            "modified-dfs",
            "bfs",
            "rbfs",
            "dijkstra-naive",
            "dijkstra-adj",
            "dijkstra-binary-heap",
            "dijkstra-fibonacci-heap",
            "dijkstra-binary-heap-dense",
            "dijkstra-fibonacci-heap-dense",
        ] {
            assert_eq!(parse_bench_algorithm(name, Some(0.1)).unwrap().label(), name);
        }
        assert!(parse_bench_algorithm("rbfs", None).is_err());
        assert!(parse_bench_algorithm("astar", None).is_err());
    }
}
