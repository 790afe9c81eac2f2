//! Command line surface: model, correlate, detect, sweep, plot.
//!
//! Flag values with domain-specific grammars (modes, k lists, epsilon)
//! are kept as strings by clap and parsed here so every bad value
//! reports through the same error path and exit code.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::community::{graph_from_correlation, louvain, WeightMode};
use crate::error::{Error, Result};
use crate::model::{Mode, NkModel, TableMode, MAX_MATERIALIZED_ENTRIES};
use crate::pajek::{write_clu, write_net};
use crate::plot::{svg_plot, Metric};
use crate::stats::{correlation, enumerate_moments, sample_moments, CorrelationMatrix};
use crate::sweep::{records_from_csv, records_to_csv, run_sweep, SweepConfig};

#[derive(Parser, Debug)]
#[command(
    name = "nkcomm",
    version,
    about = "NK fitness landscapes, trait correlation networks, and their communities"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a model and write its descriptor as JSON
    Model(ModelArgs),
    /// Enumerate the genotype space and write the trait correlation matrix
    Correlate(CorrelateArgs),
    /// Build the correlation graph and detect communities
    Detect(DetectArgs),
    /// Run a (mode, k, replicate) grid and record network metrics
    Sweep(SweepArgs),
    /// Render a sweep CSV as an SVG chart
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct ModelSpec {
    /// Number of genes (1..=63)
    #[arg(long)]
    n: usize,
    /// Epistatic links per gene (0..=n-1)
    #[arg(long)]
    k: usize,
    /// Epistasis mode: adjacent or random
    #[arg(long)]
    mode: String,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelSpec {
    fn build(&self, table_mode: TableMode) -> Result<NkModel> {
        let mode: Mode = self.mode.parse()?;
        NkModel::new(self.n, self.k, mode, self.seed, table_mode)
    }

    /// Materialized when the tables fit the cap, on-the-fly otherwise.
    fn auto_table_mode(&self) -> TableMode {
        let entries = (self.n as u64).saturating_mul(1u64 << (self.k + 1).min(63));
        if entries <= MAX_MATERIALIZED_ENTRIES {
            TableMode::Materialized
        } else {
            TableMode::OnTheFly
        }
    }
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[command(flatten)]
    spec: ModelSpec,
    /// Table storage: materialized or on-the-fly
    #[arg(long, default_value = "materialized")]
    table_mode: String,
    /// Descriptor JSON path
    #[arg(long)]
    out: PathBuf,
    /// Optional dump of all lookup tables as a JSON array
    #[arg(long)]
    out_tables: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    #[command(flatten)]
    spec: ModelSpec,
    /// Correlation matrix CSV path
    #[arg(long)]
    out_csv: PathBuf,
    /// Optional JSON copy of the matrix
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Estimate from this many distinct genotypes instead of all 2^n
    #[arg(long)]
    sample: Option<u64>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Correlation matrix CSV, as written by correlate
    #[arg(long)]
    in_csv: PathBuf,
    /// Edge weight transform: abs, squared, or clip-positive
    #[arg(long, default_value = "abs")]
    weight: String,
    /// Minimum transformed weight for an edge
    #[arg(long, default_value_t = 1e-12)]
    epsilon: f64,
    /// Louvain shuffle seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional Pajek .net dump of the thresholded graph
    #[arg(long)]
    out_net: Option<PathBuf>,
    /// Optional Pajek .clu dump of the partition
    #[arg(long)]
    out_clu: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep config JSON; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of genes
    #[arg(long)]
    n: Option<usize>,
    /// k values, e.g. "0..9" or "0,1,2,5"
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated modes, or "both"
    #[arg(long)]
    modes: Option<String>,
    /// Replicates per (mode, k) cell
    #[arg(long)]
    replicates: Option<usize>,
    /// Base seed for per-cell seed derivation
    #[arg(long)]
    base_seed: Option<u64>,
    /// Edge weight transform: abs, squared, or clip-positive
    #[arg(long)]
    weight: Option<String>,
    /// Edge threshold: a number, or "auto" for the n-dependent default
    #[arg(long)]
    epsilon: Option<String>,
    /// Per-replicate records CSV path
    #[arg(long)]
    out_csv: PathBuf,
    /// Optional per-cell summary JSON path
    #[arg(long)]
    out_summary: Option<PathBuf>,
    /// Omit the wall_ms column so reruns are byte-identical
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Sweep records CSV, as written by sweep
    #[arg(long)]
    in_csv: PathBuf,
    /// Metric to chart: nc, q, or msc
    #[arg(long)]
    metric: String,
    /// Output SVG path
    #[arg(long)]
    out_svg: PathBuf,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("serializing JSON: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// "0..9", "1,2,3", or a mix of both; sorted and deduplicated.
fn parse_k_spec(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            return Err(Error::Parameter(format!("empty k entry in '{s}'")));
        }
        if let Some((lo, hi)) = tok.split_once("..") {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("invalid k range '{tok}'")))?;
            let hi: usize = hi
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("invalid k range '{tok}'")))?;
            if hi < lo {
                return Err(Error::Parameter(format!("invalid k range '{tok}'")));
            }
            out.extend(lo..=hi);
        } else {
            let k: usize = tok
                .parse()
                .map_err(|_| Error::Parameter(format!("invalid k value '{tok}'")))?;
            out.push(k);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_modes(s: &str) -> Result<Vec<Mode>> {
    if s == "both" {
        return Ok(vec![Mode::Adjacent, Mode::Random]);
    }
    let mut out = Vec::new();
    for tok in s.split(',') {
        let mode: Mode = tok.trim().parse()?;
        if !out.contains(&mode) {
            out.push(mode);
        }
    }
    if out.is_empty() {
        return Err(Error::Parameter("no modes given".into()));
    }
    Ok(out)
}

fn cmd_model(args: &ModelArgs) -> Result<()> {
    let table_mode: TableMode = args.table_mode.parse()?;
    let model = args.spec.build(table_mode)?;
    write_text(&args.out, &to_pretty_json(&model.descriptor())?)?;
    if let Some(path) = &args.out_tables {
        let tables = model.dump_tables()?;
        let mut text = serde_json::to_string(&tables)
            .map_err(|e| Error::Internal(format!("serializing tables: {e}")))?;
        text.push('\n');
        write_text(path, &text)?;
    }
    Ok(())
}

fn cmd_correlate(args: &CorrelateArgs) -> Result<()> {
    let model = args.spec.build(args.spec.auto_table_mode())?;
    let moments = match args.sample {
        None => enumerate_moments(&model)?,
        Some(samples) => {
            eprintln!(
                "note: estimating from {samples} sampled genotypes of 2^{}; \
                 correlations are approximate",
                args.spec.n
            );
            sample_moments(&model, samples, args.spec.seed)?
        }
    };
    let corr = correlation(&moments)?;
    write_text(&args.out_csv, &corr.to_csv())?;
    if let Some(path) = &args.out_json {
        let mut text = corr.to_json();
        text.push('\n');
        write_text(path, &text)?;
    }
    Ok(())
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let weight_mode: WeightMode = args.weight.parse()?;
    if !args.epsilon.is_finite() || args.epsilon < 0.0 {
        return Err(Error::Parameter(format!(
            "epsilon must be a finite value >= 0 (got {})",
            args.epsilon
        )));
    }
    let text = read_text(&args.in_csv)?;
    let corr = CorrelationMatrix::from_csv(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", args.in_csv.display())))?;
    let graph = graph_from_correlation(&corr, weight_mode, args.epsilon);
    let partition = louvain(&graph, args.seed);
    println!("nc={} q={:.6}", partition.nc, partition.q);
    if let Some(path) = &args.out_net {
        write_net(path, &graph)?;
    }
    if let Some(path) = &args.out_clu {
        write_clu(path, &partition)?;
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = read_text(path)?;
            serde_json::from_str::<SweepConfig>(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => {
            let n = args
                .n
                .ok_or_else(|| Error::Parameter("either --config or --n is required".into()))?;
            SweepConfig::new(n)
        }
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(spec) = &args.k {
        cfg.k_values = parse_k_spec(spec)?;
    }
    if let Some(modes) = &args.modes {
        cfg.modes = parse_modes(modes)?;
    }
    if let Some(replicates) = args.replicates {
        cfg.replicates = replicates;
    }
    if let Some(base_seed) = args.base_seed {
        cfg.base_seed = base_seed;
    }
    if let Some(weight) = &args.weight {
        cfg.weight_mode = weight.parse()?;
    }
    if let Some(eps) = &args.epsilon {
        cfg.epsilon = if eps == "auto" {
            None
        } else {
            let v: f64 = eps
                .parse()
                .map_err(|_| Error::Parameter(format!("invalid epsilon '{eps}'")))?;
            Some(v)
        };
    }

    let outcome = run_sweep(&cfg)?;
    write_text(
        &args.out_csv,
        &records_to_csv(&outcome.records, !args.no_timing),
    )?;
    if let Some(path) = &args.out_summary {
        write_text(path, &outcome.summary.to_json())?;
    }
    if !outcome.failures.is_empty() {
        for f in &outcome.failures {
            eprintln!(
                "cell mode={} k={} replicate={}: {}",
                f.mode.as_str(),
                f.k,
                f.replicate,
                f.message
            );
        }
        let first = &outcome.failures[0];
        let message = format!(
            "{} of {} cells failed; first: {}",
            outcome.failures.len(),
            outcome.failures.len() + outcome.records.len(),
            first.message
        );
        return Err(match first.exit_code {
            3 => Error::Capacity(message),
            4 => Error::Internal(message),
            _ => Error::Parameter(message),
        });
    }
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let metric: Metric = args.metric.parse()?;
    let text = read_text(&args.in_csv)?;
    let records = records_from_csv(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", args.in_csv.display())))?;
    let svg = svg_plot(&records, metric)?;
    write_text(&args.out_svg, &svg)
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Model(args) => cmd_model(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Plot(args) => cmd_plot(args),
    }
}
