//! The `bigen` command line.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on I/O
//! failures.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Instant;

use bigen_core::{GeneratorParams, Modality, RunState};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::edgelist::{self, Delimiter, EdgeListFormat};
use crate::error::Result;
use crate::report::{self, AnalyzeOptions, Counts};
use crate::service::{self, ServiceConfig};
use crate::sweep::{self, AxisSpec, Measure, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "bigen", version, about = "Random bipartite graph generator and analysis toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow a graph and write its edge list.
    Generate(GenerateArgs),
    /// Analyze an edge list and print a JSON report.
    Analyze(AnalyzeArgs),
    /// Run a parameter sweep and write CSV.
    Sweep(SweepArgs),
    /// Serve live steering sessions over HTTP and websockets.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Initial user-item pairs.
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    /// Iterations.
    #[arg(long, default_value_t = 10_000)]
    pub iters: u64,
    /// Probability that a new node is a user.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Edges per new user.
    #[arg(long, default_value_t = 7)]
    pub u: usize,
    /// Edges per new item.
    #[arg(long, default_value_t = 7)]
    pub v: usize,
    /// Probability that a user's edge attaches preferentially.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Probability that an item's edge attaches preferentially.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Probability that a preferential edge comes from bouncing.
    #[arg(long = "bounce", default_value_t = 0.0)]
    pub b: f64,
}

impl ParamArgs {
    pub fn params(&self) -> GeneratorParams {
        GeneratorParams {
            m: self.m,
            iterations: self.iters,
            p: self.p,
            u: self.u,
            v: self.v,
            alpha: self.alpha,
            beta: self.beta,
            b: self.b,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FormatArgs {
    /// Edge-list delimiter: tab, comma or whitespace.
    #[arg(long, default_value = "tab")]
    pub format: Delimiter,
    /// The edge list has a header line.
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value_t = 0)]
    pub user_column: usize,
    #[arg(long, default_value_t = 1)]
    pub item_column: usize,
}

impl FormatArgs {
    fn format(&self) -> EdgeListFormat {
        EdgeListFormat {
            delimiter: self.format,
            header: self.header,
            user_column: self.user_column,
            item_column: self.item_column,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge-list destination.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Edge list to read.
    pub input: PathBuf,
    #[command(flatten)]
    pub format: FormatArgs,
    /// Modality for second-neighbor statistics.
    #[arg(long, default_value = "user", value_parser = parse_modality)]
    pub modality: Modality,
    /// Include per-node BLCC and neighborhood sizes.
    #[arg(long)]
    pub per_node: bool,
    /// Dataset name in the statistics row.
    #[arg(long)]
    pub name: Option<String>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the second-neighbor row as CSV.
    #[arg(long)]
    pub stats_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Axis as `name=v1,v2,...` (alpha, beta, b, u, v, u=v, p, T); one or two.
    #[arg(long = "axis", required = true)]
    pub axes: Vec<AxisSpec>,
    #[arg(long, default_value_t = 10)]
    pub seeds_per_cell: usize,
    /// Measures, comma separated: degree_fit, blcc_mean, similar_users, neighbor_items.
    #[arg(long, value_delimiter = ',', default_value = "blcc_mean")]
    pub measure: Vec<Measure>,
    /// Record neighborhood sizes every T/20 iterations.
    #[arg(long)]
    pub growth: bool,
    /// Master seed for the per-run seeds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Port; 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value_t = 16)]
    pub max_sessions: usize,
    /// Default snapshot cadence in iterations.
    #[arg(long, default_value_t = 100)]
    pub snapshot_every: u64,
}

fn parse_modality(s: &str) -> std::result::Result<Modality, String> {
    match s {
        "user" | "users" => Ok(Modality::User),
        "item" | "items" => Ok(Modality::Item),
        other => Err(format!("unknown modality '{other}' (expected user or item)")),
    }
}

#[derive(Debug, Serialize)]
struct GenerateSummary {
    params: GeneratorParams,
    seed: u64,
    t: u64,
    counts: Counts,
    shortfall: usize,
    runtime_ms: f64,
    out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let params = args.params.params();
    let fmt = args.format.format();
    fmt.validate()?;
    let start = Instant::now();
    let mut state = RunState::new(params, args.seed)?;
    let mut shortfall = 0;
    while !state.is_finished() {
        let out = state.step();
        shortfall += out.requested - out.realized;
    }
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let g = state.graph();
    edgelist::save_edge_list(g, None, create(&args.out)?, &fmt)?;
    let summary = GenerateSummary {
        params,
        seed: args.seed,
        t: state.t(),
        counts: Counts::of(g),
        shortfall,
        runtime_ms,
        out: args.out.clone(),
    };
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let fmt = args.format.format();
    let loaded = edgelist::load_edge_list(BufReader::new(File::open(&args.input)?), &fmt)?;
    if loaded.duplicates > 0 {
        eprintln!("warning: collapsed {} duplicate edges", loaded.duplicates);
    }
    let name = args.name.clone().unwrap_or_else(|| {
        args.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "graph".into())
    });
    let opts = AnalyzeOptions { name, modality: args.modality, per_node: args.per_node };
    let rep = report::analyze(&loaded.graph, None, None, &opts)?;
    if let Some(path) = &args.stats_csv {
        report::write_stats_csv(std::slice::from_ref(&rep.second_neighbors), create(path)?)?;
    }
    let mut sink = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut sink, &rep)?;
    writeln!(sink)?;
    sink.flush()?;
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let spec = SweepSpec {
        base: args.params.params(),
        axes: args.axes.clone(),
        seeds_per_cell: args.seeds_per_cell,
        measures: args.measure.clone(),
        master_seed: args.seed,
        growth: args.growth,
    };
    let result = sweep::run_sweep(&spec)?;
    result.write_csv(output(args.out.as_deref())?)
}

pub fn serve(args: &ServeArgs) -> Result<()> {
    let config = ServiceConfig { max_sessions: args.max_sessions, snapshot_every: args.snapshot_every };
    if config.snapshot_every == 0 {
        return Err(bigen_core::Error::InvalidParam { field: "snapshot_every", reason: "must be positive" }.into());
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let (addr, server) = service::bind(SocketAddr::new(args.host, args.port), config).await?;
        println!("listening on http://{addr}");
        io::stdout().flush()?;
        server.await
    })?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(a),
        Command::Serve(a) => serve(a),
    }
}
