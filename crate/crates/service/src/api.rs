//! Router and request handlers. Every computation endpoint depends only on
//! the loaded graph and its query string; only `/api/session` holds state.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, PoisonError, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use timelighting_core::analytics::{
    default_locked, interaction_intervals, mean_mobility, rank_mobility, resample_timeline, timeline_series,
    Breakpoint, GuidanceInterval, MobilityScore, TimelineBin,
};
use timelighting_core::density::{density_grid, weighted_points, Bounds, DEFAULT_GRID, DEFAULT_WEIGHT_FLOOR};
use timelighting_core::sampling::{edges_for_node, sample_graph, AgingScale, EdgeDrawing, SampledTrajectory};
use timelighting_core::{Interval, TemporalGraph};
use tower_http::services::ServeDir;

use crate::schemas;
use crate::session::{Session, SessionUpdate, ViewParams, MAX_BINS, MAX_GRID, MAX_SAMPLES};

pub const DEFAULT_SAMPLES: usize = 3;
pub const DEFAULT_BINS: usize = 200;
/// Auto bandwidth as a fraction of the larger side of the layout's bounding box.
pub const AUTO_BANDWIDTH_FRACTION: f64 = 0.025;

#[derive(Clone)]
pub struct AppState {
    graph: Arc<TemporalGraph>,
    auto_bandwidth: f64,
    default_locked: Arc<Vec<String>>,
    session: Arc<RwLock<Session>>,
}

impl AppState {
    pub fn new(graph: TemporalGraph) -> Self {
        let auto_bandwidth = auto_bandwidth(&graph);
        let extent = graph.extent();
        let locked = extent
            .map(|e| default_locked(&rank_mobility(&graph, &e)))
            .unwrap_or_default();
        let session = Session {
            version: 0,
            window: extent,
            locked: locked.iter().cloned().collect(),
            view: ViewParams {
                samples_per_segment: DEFAULT_SAMPLES,
                bandwidth: auto_bandwidth,
                width: DEFAULT_GRID,
                height: DEFAULT_GRID,
                timeline_bins: DEFAULT_BINS,
            },
        };
        AppState {
            graph: Arc::new(graph),
            auto_bandwidth,
            default_locked: Arc::new(locked),
            session: Arc::new(RwLock::new(session)),
        }
    }

    pub fn graph(&self) -> &TemporalGraph {
        &self.graph
    }

    /// Bandwidth used when a density request does not name one.
    pub fn auto_bandwidth(&self) -> f64 {
        self.auto_bandwidth
    }
}

/// A fixed fraction of the larger side of the bounding box of all trajectory
/// endpoints; 1 when the layout is a single point or absent.
pub fn auto_bandwidth(graph: &TemporalGraph) -> f64 {
    let points = graph
        .nodes()
        .flat_map(|n| n.trajectory.iter().flat_map(|s| [s.from, s.to]));
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        lo = [lo[0].min(p.x), lo[1].min(p.y)];
        hi = [hi[0].max(p.x), hi[1].max(p.y)];
    }
    let side = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if side.is_finite() && side > 0.0 {
        side * AUTO_BANDWIDTH_FRACTION
    } else {
        1.0
    }
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/meta", get(meta))
        .route("/api/timeline", get(timeline))
        .route("/api/trajectories", get(trajectories))
        .route("/api/edges", get(edges))
        .route("/api/density", get(density))
        .route("/api/mobility", get(mobility))
        .route("/api/guidance", get(guidance))
        .route("/api/session", get(get_session).put(put_session))
        .route("/api/schemas/{name}", get(schema))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "no such resource") }),
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body {
            error: String,
        }
        (self.status, Json(Body { error: self.message })).into_response()
    }
}

type Params = Query<BTreeMap<String, String>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn float(params: &BTreeMap<String, String>, name: &str) -> Result<Option<f64>, ApiError> {
    params
        .get(name)
        .map(|raw| match raw.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ApiError::bad_request(format!("{name} must be a finite number, got {raw:?}"))),
        })
        .transpose()
}

fn count(
    params: &BTreeMap<String, String>,
    name: &str,
    default: usize,
    range: std::ops::RangeInclusive<usize>,
) -> Result<usize, ApiError> {
    let Some(raw) = params.get(name) else {
        return Ok(default);
    };
    match raw.trim().parse::<usize>() {
        Ok(v) if range.contains(&v) => Ok(v),
        _ => Err(ApiError::bad_request(format!(
            "{name} must be an integer in {}..={}, got {raw:?}",
            range.start(),
            range.end()
        ))),
    }
}

/// `from`/`to` default to the extent bounds.
fn window(graph: &TemporalGraph, params: &BTreeMap<String, String>) -> Result<Interval, ApiError> {
    let (from, to) = (float(params, "from")?, float(params, "to")?);
    let extent = graph.extent();
    let from = from
        .or(extent.map(|e| e.start()))
        .ok_or_else(|| ApiError::bad_request("the graph is empty; from and to are required"))?;
    let to = to
        .or(extent.map(|e| e.end()))
        .ok_or_else(|| ApiError::bad_request("the graph is empty; from and to are required"))?;
    Interval::new(from, to).map_err(|e| ApiError::bad_request(format!("invalid window: {e}")))
}

fn id_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

#[derive(Serialize)]
struct NodeInfo<'a> {
    id: &'a str,
    label: &'a str,
}

#[derive(Serialize)]
struct Meta<'a> {
    extent: Option<Interval>,
    node_count: usize,
    edge_count: usize,
    nodes: Vec<NodeInfo<'a>>,
}

async fn meta(State(state): State<AppState>) -> Response {
    let g = state.graph();
    Json(Meta {
        extent: g.extent(),
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        nodes: g
            .nodes()
            .map(|n| NodeInfo {
                id: &n.id,
                label: &n.label,
            })
            .collect(),
    })
    .into_response()
}

#[derive(Serialize)]
struct Timeline {
    breakpoints: Vec<Breakpoint>,
    bins: Vec<TimelineBin>,
}

async fn timeline(State(state): State<AppState>, Query(params): Params) -> ApiResult<Timeline> {
    let bins = count(&params, "bins", DEFAULT_BINS, 1..=MAX_BINS)?;
    let series = timeline_series(state.graph());
    let bins = resample_timeline(&series, bins);
    Ok(Json(Timeline {
        breakpoints: series.breakpoints,
        bins,
    }))
}

#[derive(Serialize)]
struct Trajectories {
    window: Interval,
    k: usize,
    trajectories: Vec<SampledTrajectory>,
}

async fn trajectories(State(state): State<AppState>, Query(params): Params) -> ApiResult<Trajectories> {
    let window = window(state.graph(), &params)?;
    let k = count(&params, "k", DEFAULT_SAMPLES, 0..=MAX_SAMPLES)?;
    let trajectories = sample_graph(state.graph(), &window, k, &AgingScale::default());
    Ok(Json(Trajectories { window, k, trajectories }))
}

#[derive(Serialize)]
struct Edges {
    window: Interval,
    k: usize,
    node: String,
    edges: Vec<EdgeDrawing>,
}

async fn edges(State(state): State<AppState>, Query(params): Params) -> ApiResult<Edges> {
    let node = params
        .get("node")
        .ok_or_else(|| ApiError::bad_request("node is required"))?
        .clone();
    let window = window(state.graph(), &params)?;
    let k = count(&params, "k", DEFAULT_SAMPLES, 0..=MAX_SAMPLES)?;
    let aging = AgingScale::default();
    let sampled = sample_graph(state.graph(), &window, k, &aging);
    let edges = edges_for_node(state.graph(), &node, &window, &sampled, &aging)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(Edges { window, k, node, edges }))
}

#[derive(Serialize)]
struct Density {
    window: Interval,
    k: usize,
    bandwidth: f64,
    width: usize,
    height: usize,
    point_count: usize,
    /// `None` when no point is visible in the window.
    bounds: Option<Bounds>,
    max: f64,
    encoding: &'static str,
    values: Option<String>,
}

async fn density(State(state): State<AppState>, Query(params): Params) -> ApiResult<Density> {
    let window = window(state.graph(), &params)?;
    let k = count(&params, "k", DEFAULT_SAMPLES, 0..=MAX_SAMPLES)?;
    let width = count(&params, "w", DEFAULT_GRID, 2..=MAX_GRID)?;
    let height = count(&params, "h", DEFAULT_GRID, 2..=MAX_GRID)?;
    let bandwidth = float(&params, "bandwidth")?.unwrap_or(state.auto_bandwidth);
    if bandwidth <= 0.0 {
        return Err(ApiError::bad_request("bandwidth must be positive"));
    }
    let points = weighted_points(state.graph(), &window, k, DEFAULT_WEIGHT_FLOOR);
    let mut body = Density {
        window,
        k,
        bandwidth,
        width,
        height,
        point_count: points.len(),
        bounds: None,
        max: 0.0,
        encoding: "base64-f32le-rows",
        values: None,
    };
    if !points.is_empty() {
        let grid = density_grid(&points, bandwidth, width, height)
            .map_err(|e| ApiError::bad_request(e.to_string()))?;
        body.bounds = Some(grid.bounds);
        body.max = grid.max();
        body.values = Some(grid.values_base64());
    }
    Ok(Json(body))
}

#[derive(Serialize)]
struct Mobility {
    window: Interval,
    ranking: Vec<MobilityScore>,
    mean: f64,
    default_locked: Vec<String>,
}

async fn mobility(State(state): State<AppState>, Query(params): Params) -> ApiResult<Mobility> {
    let window = window(state.graph(), &params)?;
    let ranking = rank_mobility(state.graph(), &window);
    Ok(Json(Mobility {
        window,
        mean: mean_mobility(&ranking),
        default_locked: default_locked(&ranking),
        ranking,
    }))
}

#[derive(Serialize)]
struct Guidance {
    locked: Vec<String>,
    padding: f64,
    intervals: Vec<GuidanceInterval>,
}

async fn guidance(State(state): State<AppState>, Query(params): Params) -> ApiResult<Guidance> {
    let mut locked = match params.get("locked") {
        Some(raw) => id_list(raw),
        None => state.default_locked.to_vec(),
    };
    locked.sort();
    locked.dedup();
    let padding = float(&params, "padding")?.unwrap_or(0.0);
    let intervals = interaction_intervals(state.graph(), &locked, padding)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(Guidance {
        locked,
        padding,
        intervals,
    }))
}

async fn get_session(State(state): State<AppState>) -> Json<Session> {
    Json(state.session.read().unwrap_or_else(PoisonError::into_inner).clone())
}

async fn put_session(State(state): State<AppState>, body: Bytes) -> ApiResult<Session> {
    let update: SessionUpdate = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(format!("invalid session update: {e}")))?;
    let mut session = state.session.write().unwrap_or_else(PoisonError::into_inner);
    session.apply(state.graph(), update).map_err(ApiError::bad_request)?;
    tracing::debug!(version = session.version, "session updated");
    Ok(Json(session.clone()))
}

async fn schema(Path(name): Path<String>) -> Response {
    let name = name.strip_suffix(".json").unwrap_or(&name);
    match schemas::schema(name) {
        Some(body) => ([(header::CONTENT_TYPE, "application/schema+json")], body).into_response(),
        None => ApiError::new(StatusCode::NOT_FOUND, format!("no schema named {name}")).into_response(),
    }
}
