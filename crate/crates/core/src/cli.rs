//! The `dendrograph` command line.
//!
//! Structured results go to standard output (or `--output`) as JSON or edge
//! lists; human-readable diagnostics go to standard error. Exit codes: 0 on
//! success, 2 for usage and validation errors, 3 for graph-structure errors
//! such as a disconnected input.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::clustering::{agglomerate, Algorithm};
use crate::dendrogram::{Dendrogram, DendrogramError, Partition};
use crate::graph::{GraphError, NodePrior, ParseOptions, PriorKind, WeightedGraph};
use crate::metrics::{cost_j, optimal_heights, tree_objective, MetricsError, ScoreReport, IDENTITY_TOL};
use crate::oracle::{greedy_gap, Objective, OracleError};
use crate::reconstruction::{round_significant, ReconstructedGraph};

/// Significant digits of every float written by the CLI.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "dendrograph", version, about = "Hierarchical clustering of weighted graphs by reconstruction-optimal dendrograms")]
pub struct Cli {
    /// Suppress diagnostics on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a dendrogram by greedy agglomeration.
    Cluster {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long, value_enum, default_value_t = AlgorithmArg::NnChain)]
        algorithm: AlgorithmArg,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Score a dendrogram against a graph.
    Score {
        #[command(flatten)]
        graph: GraphInput,
        /// Dendrogram JSON, `-` for standard input.
        #[arg(long, default_value = "-")]
        dendrogram: PathBuf,
        #[command(flatten)]
        prior: PriorArgs,
        /// Replace the heights by their optimal values before scoring.
        #[arg(long)]
        reoptimize_heights: bool,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Cut a dendrogram into a flat partition.
    Cut {
        /// Dendrogram JSON, `-` for standard input.
        #[arg(long, default_value = "-")]
        dendrogram: PathBuf,
        /// Number of clusters.
        #[arg(long, conflicts_with = "height", required_unless_present = "height")]
        k: Option<usize>,
        /// Keep merges at or below this height.
        #[arg(long)]
        height: Option<f64>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Decode a dendrogram into a weighted edge list.
    Reconstruct {
        /// Dendrogram JSON, `-` for standard input.
        #[arg(long, default_value = "-")]
        dendrogram: PathBuf,
        /// Graph edge list; required for the degree prior.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        prior: PriorArgs,
        /// Only emit pairs whose decoded weight reaches this value.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Exhaustive search for the best tree of a small graph.
    Oracle {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Kl)]
        objective: ObjectiveArg,
        #[command(flatten)]
        out: OutputArg,
    },
}

#[derive(Debug, Args)]
struct GraphInput {
    /// Edge list, `-` for standard input.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    /// Skip `u u` lines instead of failing.
    #[arg(long)]
    drop_self_loops: bool,
}

#[derive(Debug, Args)]
struct PriorArgs {
    /// uniform, degree, custom or custom=FILE.
    #[arg(long, default_value = "degree")]
    prior: String,
    /// Per-node prior masses, one `label value` per line.
    #[arg(long)]
    prior_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutputArg {
    /// Write the result here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Naive,
    NnChain,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Kl,
    Dasgupta,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError { code: if e.is_structural() { 3 } else { 2 }, message: e.to_string() }
    }
}

impl From<DendrogramError> for CliError {
    fn from(e: DendrogramError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::usage(e.to_string())
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    quiet: bool,
    stdin_used: bool,
}

impl Io<'_> {
    fn read(&mut self, path: &PathBuf) -> Result<String, CliError> {
        if path.as_os_str() == "-" {
            if std::mem::replace(&mut self.stdin_used, true) {
                return Err(CliError::usage("standard input can feed only one argument"));
            }
            let mut text = String::new();
            self.stdin
                .read_to_string(&mut text)
                .map_err(|e| CliError::usage(format!("reading standard input: {e}")))?;
            Ok(text)
        } else {
            fs::read_to_string(path).map_err(|e| CliError::usage(format!("reading {}: {e}", path.display())))
        }
    }

    fn emit(&mut self, out: &OutputArg, text: &str) -> Result<(), CliError> {
        match &out.output {
            Some(path) => {
                fs::write(path, text).map_err(|e| CliError::usage(format!("writing {}: {e}", path.display())))
            }
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::usage(format!("writing output: {e}"))),
        }
    }

    fn emit_json(&mut self, out: &OutputArg, value: Value) -> Result<(), CliError> {
        let mut text = round_floats(value).to_string();
        text.push('\n');
        self.emit(out, &text)
    }

    fn note(&mut self, message: &str) {
        if !self.quiet {
            let _ = writeln!(self.stderr, "{message}");
        }
    }
}

/// Rounds every float in a JSON value to [`SIGNIFICANT_DIGITS`].
pub fn round_floats(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().unwrap_or(0.0), SIGNIFICANT_DIGITS);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn load_graph(io: &mut Io<'_>, input: &GraphInput) -> Result<WeightedGraph, CliError> {
    let text = io.read(&input.input)?;
    let options = ParseOptions { drop_self_loops: input.drop_self_loops };
    Ok(WeightedGraph::parse_with(text.as_bytes(), options)?)
}

fn load_dendrogram(io: &mut Io<'_>, path: &PathBuf) -> Result<Dendrogram, CliError> {
    let text = io.read(path)?;
    Ok(Dendrogram::from_json(&text)?)
}

/// Reads `label value` lines into masses ordered like `labels`.
pub fn parse_prior_file(text: &str, labels: &[String]) -> Result<Vec<f64>, String> {
    let mut values = vec![None; labels.len()];
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [label, value] = fields[..] else {
            return Err(format!("prior file line {}: expected `label value`", i + 1));
        };
        let value: f64 = value.parse().map_err(|_| format!("prior file line {}: bad value {value:?}", i + 1))?;
        let node = labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| format!("prior file line {}: unknown node {label:?}", i + 1))?;
        values[node] = Some(value);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| format!("prior file has no value for node {:?}", labels[i])))
        .collect()
}

fn resolve_prior(
    io: &mut Io<'_>,
    args: &PriorArgs,
    graph: Option<&WeightedGraph>,
    labels: &[String],
) -> Result<NodePrior, CliError> {
    let (kind, file) = match args.prior.split_once('=') {
        Some(("custom", path)) => (PriorKind::Custom, Some(PathBuf::from(path))),
        None => match args.prior.as_str() {
            "uniform" => (PriorKind::Uniform, None),
            "degree" => (PriorKind::Degree, None),
            "custom" => (PriorKind::Custom, args.prior_file.clone()),
            other => return Err(CliError::usage(format!("unknown prior {other:?}; use uniform, degree or custom"))),
        },
        Some(_) => return Err(CliError::usage(format!("unknown prior {:?}", args.prior))),
    };
    match kind {
        PriorKind::Uniform => Ok(NodePrior::uniform(labels.len())),
        PriorKind::Degree => match graph {
            Some(g) => Ok(NodePrior::degree(g)),
            None => Err(CliError::usage("the degree prior needs the graph (--input)")),
        },
        PriorKind::Custom => {
            let path = file.ok_or_else(|| CliError::usage("custom prior needs --prior-file or --prior custom=FILE"))?;
            let text = io.read(&path)?;
            let values = parse_prior_file(&text, labels).map_err(CliError::usage)?;
            Ok(NodePrior::custom(&values)?)
        }
    }
}

/// Runs the CLI on the given arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { stdin, stdout, stderr, quiet: cli.quiet, stdin_used: false };
    match execute(cli.command, &mut io) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(command: Command, io: &mut Io<'_>) -> Result<(), CliError> {
    match command {
        Command::Cluster { graph, prior, algorithm, out } => {
            let g = load_graph(io, &graph)?;
            let prior = resolve_prior(io, &prior, Some(&g), g.labels())?;
            let algorithm = match algorithm {
                AlgorithmArg::Naive => Algorithm::Naive,
                AlgorithmArg::NnChain => Algorithm::NnChain,
            };
            let d = agglomerate(&g, &prior, algorithm);
            io.emit_json(&out, d.to_json_value())?;
            let j = cost_j(&g, &prior, &d)?;
            let objective = tree_objective(&g, &prior, &d)?;
            io.note(&format!(
                "n={} total_weight={} J={} tree_objective={}",
                g.n(),
                round_significant(g.total_weight(), SIGNIFICANT_DIGITS),
                round_significant(j, SIGNIFICANT_DIGITS),
                round_significant(objective, SIGNIFICANT_DIGITS)
            ));
        }
        Command::Score { graph, dendrogram, prior, reoptimize_heights, out } => {
            let g = load_graph(io, &graph)?;
            let prior = resolve_prior(io, &prior, Some(&g), g.labels())?;
            let mut d = load_dendrogram(io, &dendrogram)?.relabel_to(g.labels())?;
            if reoptimize_heights {
                let opt = optimal_heights(&g, &prior, &d)?;
                if !opt.regular {
                    io.note("warning: optimal heights are not monotone along this tree");
                }
                d = opt.dendrogram;
            }
            let report = ScoreReport::compute(&g, &prior, &d)?;
            let mut value = serde_json::to_value(&report).expect("report serializes");
            value["heights_reoptimized"] = json!(reoptimize_heights);
            if reoptimize_heights {
                let gap = report.optimality_gap();
                if gap.abs() > IDENTITY_TOL {
                    return Err(CliError {
                        code: 1,
                        message: format!("cost J and tree objective disagree at optimal heights (gap {gap})"),
                    });
                }
                value["optimality_gap"] = json!(gap);
            }
            io.emit_json(&out, value)?;
        }
        Command::Cut { dendrogram, k, height, out } => {
            let d = load_dendrogram(io, &dendrogram)?;
            let partition = match (k, height) {
                (Some(k), _) => d.cut_k(k)?,
                (None, Some(h)) if h >= 0.0 => d.cut_height(h),
                (None, Some(h)) => return Err(CliError::usage(format!("height must be non-negative, got {h}"))),
                (None, None) => return Err(CliError::usage("give --k or --height")),
            };
            io.emit_json(&out, labelled_blocks(&partition, d.labels()))?;
        }
        Command::Reconstruct { dendrogram, input, prior, threshold, out } => {
            if !(threshold >= 0.0) {
                return Err(CliError::usage(format!("threshold must be non-negative, got {threshold}")));
            }
            let mut d = load_dendrogram(io, &dendrogram)?;
            let g = match input {
                Some(path) => Some(load_graph(io, &GraphInput { input: path, drop_self_loops: false })?),
                None => None,
            };
            if let Some(g) = &g {
                d = d.relabel_to(g.labels())?;
            }
            let labels = d.labels().to_vec();
            let prior = resolve_prior(io, &prior, g.as_ref(), &labels)?;
            let decoded = ReconstructedGraph::new(&d, &prior)?;
            io.emit(&out, &decoded.export_edge_list(threshold))?;
        }
        Command::Oracle { graph, prior, objective, out } => {
            let g = load_graph(io, &graph)?;
            let prior = resolve_prior(io, &prior, Some(&g), g.labels())?;
            let (objective, name) = match objective {
                ObjectiveArg::Kl => (Objective::TreeObjective, "kl"),
                ObjectiveArg::Dasgupta => (Objective::Dasgupta, "dasgupta"),
            };
            let r = greedy_gap(&g, &prior, objective)?;
            let mut value = r.optimum.to_json(Some(g.labels()));
            value["objective"] = json!(name);
            value["greedy_shape"] = r.greedy_shape.to_json(Some(g.labels()));
            value["greedy_score"] = json!(r.greedy_score);
            value["gap"] = json!(r.gap);
            io.note(&format!(
                "searched {} shapes: optimum {} greedy {} gap {}",
                r.optimum.n_shapes_searched,
                round_significant(r.optimum.score, SIGNIFICANT_DIGITS),
                round_significant(r.greedy_score, SIGNIFICANT_DIGITS),
                round_significant(r.gap, SIGNIFICANT_DIGITS)
            ));
            io.emit_json(&out, value)?;
        }
    }
    Ok(())
}

/// Blocks as label lists, each sorted, ordered by smallest label.
fn labelled_blocks(partition: &Partition, labels: &[String]) -> Value {
    let mut blocks: Vec<Vec<&str>> = partition
        .blocks()
        .iter()
        .map(|b| {
            let mut names: Vec<&str> = b.iter().map(|&u| labels[u].as_str()).collect();
            names.sort_unstable();
            names
        })
        .collect();
    blocks.sort_unstable();
    json!(blocks)
}
