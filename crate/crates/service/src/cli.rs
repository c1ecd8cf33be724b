//! Command line front end: `ingest`, `analyze` and `serve`.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use timelighting_core::analytics::{
    default_locked, interaction_intervals, mean_mobility, rank_mobility, timeline_series, GuidanceInterval,
    MobilityScore,
};
use timelighting_core::ingest::{
    equivalent_timeslices, fallback_layout, import_layout, ingest_events, parse_graph, read_events_csv,
    serialize_graph, FallbackParams, IngestConfig, DAY,
};
use timelighting_core::{Interval, TemporalGraph};

use crate::api::{router, AppState};

#[derive(Debug, Parser)]
#[command(name = "timelighting", version, about = "Time-colored 2D projections of temporal graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a canonical graph file from an event CSV or an existing graph.
    Ingest(IngestArgs),
    /// Print mobility, guidance and timeline figures as JSON.
    Analyze(AnalyzeArgs),
    /// Serve the HTTP API for a graph file.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV with columns timestamp,source,target.
    #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
    pub events: Option<PathBuf>,
    /// Graph JSON to validate and re-emit.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Layout JSON with trajectories for the nodes.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed of the fallback layout used for events without `--layout`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seconds an interaction stays visible.
    #[arg(long, default_value_t = DAY)]
    pub edge_duration: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Time window as `from:to`; defaults to the whole extent.
    #[arg(long)]
    pub window: Option<String>,
    /// Comma-separated node ids; defaults to the three most mobile nodes.
    #[arg(long, value_delimiter = ',')]
    pub locked: Option<Vec<String>>,
    /// Seconds added on both sides of every edge interval for guidance.
    #[arg(long, default_value_t = 0.0)]
    pub padding: f64,
    /// Slice width for the equivalent timeslice count.
    #[arg(long, default_value_t = DAY)]
    pub resolution: f64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Directory of frontend assets served for non-API paths.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

pub fn parse_window(raw: &str) -> Result<Interval, String> {
    let (a, b) = raw
        .split_once(':')
        .ok_or_else(|| format!("expected from:to, got {raw:?}"))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("{s:?} is not a number"))
    };
    Interval::new(num(a)?, num(b)?).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_graph(path: &Path) -> Result<TemporalGraph> {
    let text = read(path)?;
    parse_graph(&text).with_context(|| format!("invalid graph in {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub nodes: usize,
    pub edges: usize,
    pub edge_intervals: usize,
    pub extent: Option<Interval>,
    pub equivalent_timeslices: Option<u64>,
    pub stationary: Vec<String>,
    pub clipped: Vec<String>,
}

impl std::fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "nodes: {}", self.nodes)?;
        writeln!(f, "edges: {}", self.edges)?;
        writeln!(f, "edge intervals: {}", self.edge_intervals)?;
        if let (Some(e), Some(n)) = (self.extent, self.equivalent_timeslices) {
            writeln!(f, "extent: {e}")?;
            writeln!(f, "equivalent timeslices: {n}")?;
        }
        if !self.stationary.is_empty() {
            writeln!(f, "without layout (held at origin): {}", self.stationary.join(", "))?;
        }
        if !self.clipped.is_empty() {
            writeln!(f, "clipped to appearance: {}", self.clipped.join(", "))?;
        }
        Ok(())
    }
}

pub fn ingest(args: &IngestArgs) -> Result<IngestSummary> {
    let cfg = IngestConfig::with_edge_duration(args.edge_duration)?;
    let (graph, from_events) = match (&args.events, &args.graph) {
        (Some(path), _) => {
            let file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
            let events = read_events_csv(file).with_context(|| format!("invalid events in {}", path.display()))?;
            let graph = ingest_events(&events, &cfg).with_context(|| format!("cannot ingest {}", path.display()))?;
            (graph, true)
        }
        (None, Some(path)) => (load_graph(path)?, false),
        (None, None) => bail!("one of --events or --graph is required"),
    };

    let (mut stationary, mut clipped) = (Vec::new(), Vec::new());
    let graph = match &args.layout {
        Some(path) => {
            let (graph, diag) = import_layout(&graph, &read(path)?)
                .with_context(|| format!("invalid layout in {}", path.display()))?;
            stationary = diag.stationary;
            clipped = diag.clipped;
            graph
        }
        None if from_events => fallback_layout(&graph, &FallbackParams::for_graph(&graph, args.seed)),
        None => graph,
    };

    fs::write(&args.out, serialize_graph(&graph))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    let extent = graph.extent();
    Ok(IngestSummary {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        edge_intervals: graph.edges().map(|e| e.appearance.len()).sum(),
        extent,
        equivalent_timeslices: extent.map(|e| equivalent_timeslices(&e, args.edge_duration)),
        stationary,
        clipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub window: Interval,
    pub ranking: Vec<MobilityScore>,
    pub mean_mobility: f64,
    pub default_locked: Vec<String>,
    pub locked: Vec<String>,
    pub padding: f64,
    pub guidance: Vec<GuidanceInterval>,
    pub timeline_breakpoints: usize,
    pub equivalent_timeslices: u64,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<AnalyzeReport> {
    let graph = load_graph(&args.graph)?;
    let extent = graph.extent().ok_or_else(|| anyhow!("{} has no nodes or edges", args.graph.display()))?;
    let window = match &args.window {
        Some(raw) => parse_window(raw).map_err(|e| anyhow!("invalid window: {e}"))?,
        None => extent,
    };
    if !extent.contains_interval(&window) {
        bail!("window {window} is not inside the extent {extent}");
    }
    if !(args.resolution > 0.0 && args.resolution.is_finite()) {
        bail!("resolution must be positive");
    }
    let ranking = rank_mobility(&graph, &window);
    let defaults = default_locked(&ranking);
    let mut locked = args.locked.clone().unwrap_or_else(|| defaults.clone());
    locked.sort();
    locked.dedup();
    let guidance = interaction_intervals(&graph, &locked, args.padding)?;
    Ok(AnalyzeReport {
        window,
        mean_mobility: mean_mobility(&ranking),
        ranking,
        default_locked: defaults,
        locked,
        padding: args.padding,
        guidance,
        timeline_breakpoints: timeline_series(&graph).breakpoints.len(),
        equivalent_timeslices: equivalent_timeslices(&window, args.resolution),
    })
}

pub async fn serve(args: &ServeArgs) -> Result<()> {
    let graph = load_graph(&args.graph)?;
    tracing::info!(
        nodes = graph.node_count(),
        edges = graph.edge_count(),
        "loaded {}",
        args.graph.display()
    );
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            bail!("static directory {} does not exist", dir.display());
        }
    }
    let app = router(AppState::new(graph), args.static_dir.clone());
    let addr = SocketAddr::new(args.host, args.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("cannot listen on {addr}"))?;
    tracing::info!("listening on http://{addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => {
            let summary = ingest(&args)?;
            print!("{summary}");
        }
        Command::Analyze(args) => {
            let report = analyze(&args)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Serve(args) => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve(&args))?;
        }
    }
    Ok(())
}
