//! The `mdbgp` command line: `partition`, `metrics` and `weights`.
//!
//! Exit status 0 on success, 2 when the requested balance cannot be met and
//! 1 for every other error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph};
use crate::metrics::MetricsReport;
use crate::partition::{hash_partition, recursive_partition, BalanceTier, Partition, PartitionConfig};
use crate::projection::Method;
use crate::solver::{GdConfig, IterationTrace};
use crate::weights::{load_weights, save_weights, WeightSet, WeightSpec};

#[derive(Debug, Parser)]
#[command(name = "mdbgp", version, about = "Multi-dimensional balanced graph partitioning")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition a graph and print its metrics.
    Partition(PartitionArgs),
    /// Recompute the metrics of a partition file.
    Metrics(MetricsArgs),
    /// Write vertex weights as TSV.
    Weights(WeightsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Gd,
    Hash,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProjectionArg {
    Exact,
    Alternating,
    AlternatingOneShot,
    Dykstra,
    Nested,
}

impl From<ProjectionArg> for Method {
    fn from(p: ProjectionArg) -> Method {
        match p {
            ProjectionArg::Exact => Method::Exact,
            ProjectionArg::Alternating => Method::Alternating,
            ProjectionArg::AlternatingOneShot => Method::AlternatingOneShot,
            ProjectionArg::Dykstra => Method::Dykstra,
            ProjectionArg::Nested => Method::Nested,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct WeightArgs {
    /// Weights TSV: `external_id w1 ... wd`.
    #[arg(long, conflicts_with = "weight_spec")]
    pub weights: Option<PathBuf>,
    /// Comma-separated weight functions: unit, degree, nbrdeg, pagerank[:damping[:iters]].
    #[arg(long, default_value = "unit,degree")]
    pub weight_spec: String,
    /// Leave isolated vertices out of the balance constraints.
    #[arg(long)]
    pub drop_isolated: bool,
}

#[derive(Debug, clap::Args)]
pub struct PartitionArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, value_enum, default_value = "alternating-one-shot")]
    pub projection: ProjectionArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Partition TSV destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration CSV of the top-level bisection.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub round_trials: usize,
    #[arg(long, value_enum, default_value = "gd")]
    pub algorithm: Algorithm,
}

#[derive(Debug, clap::Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub partition: PathBuf,
    #[command(flatten)]
    pub weights: WeightArgs,
}

#[derive(Debug, clap::Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "unit")]
    pub spec: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let outcome = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, stdout, stderr)),
            Err(e) => Err(Error::Invalid(format!("cannot start {t} threads: {e}"))),
        },
        None => dispatch(&cli.command, stdout, stderr),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_infeasible() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cmd: &Command, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    match cmd {
        Command::Partition(a) => cmd_partition(a, stdout, stderr),
        Command::Metrics(a) => cmd_metrics(a, stdout),
        Command::Weights(a) => cmd_weights(a, stdout),
    }
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| with_path(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| with_path(path, e))
}

fn read_graph(path: &Path) -> Result<Graph> {
    Ok(load_edge_list(open(path)?, &path.display().to_string())?.0)
}

/// The graph the balance constraints cover and its vertices in `g`.
struct Balanced {
    graph: Graph,
    members: Vec<usize>,
    weights: WeightSet,
}

fn balanced_view(g: &Graph, args: &WeightArgs) -> Result<Balanced> {
    let (graph, members) = if args.drop_isolated {
        let members: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > 0).collect();
        (g.induced_subgraph(&members).graph, members)
    } else {
        (g.clone(), (0..g.n()).collect())
    };
    let weights = match &args.weights {
        Some(path) => {
            let ws = load_weights(open(path)?, g, &path.display().to_string())?;
            if args.drop_isolated {
                ws.restrict(&members)
            } else {
                ws
            }
        }
        None => args.weight_spec.parse::<WeightSpec>()?.build(&graph)?,
    };
    Ok(Balanced {
        graph,
        members,
        weights,
    })
}

fn report(g: &Graph, view: &Balanced, p: &Partition, dropped: bool) -> MetricsReport {
    MetricsReport::compute_on(g, &view.weights, p, dropped.then_some(&view.members[..]))
}

pub fn cmd_partition(a: &PartitionArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    let g = read_graph(&a.graph)?;
    if a.k == 0 {
        return Err(Error::Invalid("--k must be at least 1".into()));
    }
    let view = balanced_view(&g, &a.weights)?;
    let (partition, trace, unmet) = match a.algorithm {
        Algorithm::Hash => (hash_partition(&g, a.k, a.seed)?, None, Vec::new()),
        Algorithm::Gd => {
            let cfg = PartitionConfig {
                k: a.k,
                gd: GdConfig {
                    iterations: a.iters,
                    epsilon: a.epsilon,
                    projection: a.projection.into(),
                    seed: a.seed,
                    ..GdConfig::default()
                },
                round_trials: a.round_trials,
            };
            let out = recursive_partition(&view.graph, &view.weights, &cfg)?;
            let unmet: Vec<String> = out
                .bisections
                .iter()
                .filter(|b| b.tier != BalanceTier::Strict)
                .map(|b| if b.path.is_empty() { "root".to_owned() } else { b.path.clone() })
                .collect();
            let trace = out.bisections.first().map(|b| b.trace.clone());
            // Dropped vertices are dealt out round-robin in id order.
            let mut assignment = vec![u32::MAX; g.n()];
            for (&v, &p) in view.members.iter().zip(out.partition.assignment()) {
                assignment[v] = p;
            }
            let mut next = 0u32;
            for p in assignment.iter_mut().filter(|p| **p == u32::MAX) {
                *p = next;
                next = (next + 1) % a.k as u32;
            }
            let partition = Partition::new(a.k, assignment)?.with_provenance(out.partition.provenance().clone());
            (partition, trace, unmet)
        }
    };

    let metrics = report(&g, &view, &partition, a.weights.drop_isolated);
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            partition.write_tsv(&g, &mut w)?;
            w.flush().map_err(|e| with_path(path, e))?;
            writeln!(stdout, "{}", metrics.to_json())?;
        }
        None => {
            partition.write_tsv(&g, &mut *stdout)?;
            writeln!(stderr, "{}", metrics.to_json())?;
        }
    }
    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        trace.unwrap_or_else(IterationTrace::default).write_csv(&mut w)?;
        w.flush().map_err(|e| with_path(path, e))?;
    }
    if !unmet.is_empty() {
        return Err(Error::Infeasible(format!(
            "no {}-balanced rounding found at bisection(s) {}; the partition written is the best found",
            a.epsilon,
            unmet.join(", ")
        )));
    }
    Ok(())
}

pub fn cmd_metrics(a: &MetricsArgs, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let p = Partition::read_tsv(open(&a.partition)?, &g, &a.partition.display().to_string())?;
    let view = balanced_view(&g, &a.weights)?;
    let metrics = report(&g, &view, &p, a.weights.drop_isolated);
    writeln!(stdout, "{}", metrics.to_json())?;
    Ok(())
}

pub fn cmd_weights(a: &WeightsArgs, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let ws = a.spec.parse::<WeightSpec>()?.build(&g)?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            save_weights(&ws, &g, &mut w)?;
            w.flush().map_err(|e| with_path(path, e))?;
        }
        None => save_weights(&ws, &g, &mut *stdout)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("mdbgp").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn missing_graph_is_usage_error() {
        let (code, _, err) = run_args(&["partition"]);
        assert_eq!(code, 1);
        assert!(err.contains("--graph"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("partition"));
    }

    #[test]
    fn unknown_weight_token() {
        let dir = tempfile::tempdir().unwrap();
        let g = dir.path().join("g.txt");
        std::fs::write(&g, "0 1\n").unwrap();
        let (code, _, err) = run_args(&["weights", "--graph", g.to_str().unwrap(), "--spec", "mass"]);
        assert_eq!(code, 1);
        assert!(err.contains("mass"));
    }
}
