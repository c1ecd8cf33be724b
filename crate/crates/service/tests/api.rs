use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use base64::Engine;
use http_body_util::BodyExt;
use serde_json::Value;
use timelighting::schemas::schema;
use timelighting::{router, AppState};
use timelighting_core::density::{density_grid, weighted_points, DEFAULT_WEIGHT_FLOOR};
use timelighting_core::ingest::{fallback_layout, ingest_events, FallbackParams, IngestConfig};
use timelighting_core::sampling::{sample_graph, AgingScale};
use timelighting_core::synthetic::season_events;
use timelighting_core::{Interval, TemporalGraph};
use tower::ServiceExt;

fn season() -> TemporalGraph {
    let g = ingest_events(&season_events(1), &IngestConfig::default()).unwrap();
    fallback_layout(&g, &FallbackParams::for_graph(&g, 1))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_owned())).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, bytes) = call(app, Method::GET, uri, None).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn validate(name: &str, value: &Value) {
    let schema: Value = serde_json::from_str(schema(name).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

#[tokio::test]
async fn every_endpoint_matches_its_schema() {
    let app = router(AppState::new(season()), None);
    let (_, meta) = get(&app, "/api/meta").await;
    let extent = meta["extent"].as_array().unwrap();
    let (a, b) = (extent[0].as_f64().unwrap(), extent[1].as_f64().unwrap());
    let mid = 0.5 * (a + b);
    let cases = [
        ("meta", "/api/meta".to_string()),
        ("timeline", "/api/timeline?bins=50".into()),
        ("trajectories", format!("/api/trajectories?from={a}&to={mid}&k=3")),
        ("edges", format!("/api/edges?node=Munster%20Rugby&from={a}&to={mid}&k=2")),
        ("density", format!("/api/density?from={mid}&to={b}&k=3&w=64&h=48")),
        ("mobility", format!("/api/mobility?from={a}&to={mid}")),
        ("guidance", "/api/guidance?locked=Munster%20Rugby,Leinster%20Rugby&padding=3600".into()),
        ("guidance", "/api/guidance".into()),
        ("session", "/api/session".into()),
    ];
    for (name, uri) in cases {
        let (status, body) = get(&app, &uri).await;
        assert_eq!(status, StatusCode::OK, "{uri}: {body}");
        validate(name, &body);
    }
}

#[tokio::test]
async fn repeated_requests_are_byte_identical() {
    let app = router(AppState::new(season()), None);
    for uri in [
        "/api/meta",
        "/api/timeline",
        "/api/trajectories?k=4",
        "/api/edges?node=Ulster%20Rugby",
        "/api/density?w=128&h=128",
        "/api/mobility",
        "/api/guidance",
    ] {
        let first = call(&app, Method::GET, uri, None).await;
        assert_eq!(first.0, StatusCode::OK);
        // a session change must not leak into computation endpoints
        call(&app, Method::PUT, "/api/session", Some(r#"{"locked": ["Zebre"]}"#)).await;
        assert_eq!(call(&app, Method::GET, uri, None).await, first, "{uri}");
    }
}

#[tokio::test]
async fn trajectories_match_the_engine() {
    let graph = season();
    let app = router(AppState::new(graph.clone()), None);
    let window = Interval::new(1_410_000_000.0, 1_420_000_000.0).unwrap();
    let (_, body) = get(&app, "/api/trajectories?from=1410000000&to=1420000000&k=3").await;
    let engine = serde_json::to_value(sample_graph(&graph, &window, 3, &AgingScale::default())).unwrap();
    assert_eq!(body["trajectories"], engine);
}

#[tokio::test]
async fn density_decodes_to_the_engine_grid() {
    let graph = season();
    let state = AppState::new(graph.clone());
    let bw = state.auto_bandwidth();
    let app = router(state, None);
    let (_, body) = get(&app, "/api/density?w=40&h=30").await;
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(body["values"].as_str().unwrap())
        .unwrap();
    let cells: Vec<f32> = bytes.chunks(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    let points = weighted_points(&graph, &graph.extent().unwrap(), 3, DEFAULT_WEIGHT_FLOOR);
    let grid = density_grid(&points, bw, 40, 30).unwrap();
    assert_eq!(cells.len(), 40 * 30);
    assert_eq!(body["point_count"], points.len());
    for (got, want) in cells.iter().zip(&grid.values) {
        assert_eq!(*got, *want as f32);
    }
}

#[tokio::test]
async fn invalid_requests_get_json_errors() {
    let app = router(AppState::new(season()), None);
    for uri in [
        "/api/guidance?locked=Munster%20Rugby,Nobody",
        "/api/guidance?padding=-1",
        "/api/edges?node=Nobody",
        "/api/edges",
        "/api/trajectories?from=10&to=5",
        "/api/trajectories?k=abc",
        "/api/density?w=1",
        "/api/density?bandwidth=0",
        "/api/timeline?bins=0",
    ] {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        validate("error", &body);
    }
    let (status, body) = get(&app, "/api/nothing").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    validate("error", &body);
    let (status, _) = get(&app, "/api/schemas/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn session_round_trips_and_validates() {
    let graph = season();
    let extent = graph.extent().unwrap();
    let app = router(AppState::new(graph), None);
    let (_, initial) = get(&app, "/api/session").await;
    assert_eq!(initial["version"], 0);
    assert_eq!(initial["locked"].as_array().unwrap().len(), 3);

    let inside = format!(
        r#"{{"window": [{}, {}], "locked": ["Zebre", "Benetton Treviso"],
            "view": {{"samples_per_segment": 5, "bandwidth": 0.5, "width": 128, "height": 64, "timeline_bins": 90}}}}"#,
        extent.start() + 10.0,
        extent.end() - 10.0
    );
    let (status, bytes) = call(&app, Method::PUT, "/api/session", Some(&inside)).await;
    assert_eq!(status, StatusCode::OK);
    let updated: Value = serde_json::from_slice(&bytes).unwrap();
    validate("session", &updated);
    assert_eq!(updated["version"], 1);
    assert_eq!(updated["locked"], serde_json::json!(["Benetton Treviso", "Zebre"]));
    assert_eq!(updated["view"]["timeline_bins"], 90);
    assert_eq!(get(&app, "/api/session").await.1, updated);

    let outside = format!(r#"{{"window": [{}, {}]}}"#, extent.start() - 1.0, extent.end());
    for bad in [
        outside.as_str(),
        r#"{"locked": ["Nobody"]}"#,
        r#"{"colour": "red"}"#,
        r#"{"view": {"samples_per_segment": 1, "bandwidth": -1, "width": 8, "height": 8, "timeline_bins": 1}}"#,
        "not json",
    ] {
        let (status, bytes) = call(&app, Method::PUT, "/api/session", Some(bad)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
        validate("error", &serde_json::from_slice(&bytes).unwrap());
    }
    // rejected updates change nothing
    assert_eq!(get(&app, "/api/session").await.1, updated);
}

#[tokio::test]
async fn schemas_are_published() {
    let app = router(AppState::new(season()), None);
    for (name, text) in timelighting::schemas::SCHEMAS {
        let (status, body) = get(&app, &format!("/api/schemas/{name}")).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body, serde_json::from_str::<Value>(text).unwrap());
        jsonschema::validator_for(&body).unwrap();
    }
}

#[tokio::test]
async fn static_files_are_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>hi</p>").unwrap();
    let app = router(AppState::new(season()), Some(dir.path().to_owned()));
    let (status, body) = call(&app, Method::GET, "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<p>hi</p>");
    assert_eq!(get(&app, "/api/meta").await.0, StatusCode::OK);
}

#[tokio::test]
async fn empty_graph_is_served() {
    let app = router(AppState::new(TemporalGraph::new(Vec::new(), Vec::new()).unwrap()), None);
    let (status, meta) = get(&app, "/api/meta").await;
    assert_eq!(status, StatusCode::OK);
    validate("meta", &meta);
    assert_eq!(meta["extent"], Value::Null);
    let (status, body) = get(&app, "/api/timeline").await;
    assert_eq!(status, StatusCode::OK);
    validate("timeline", &body);
    assert_eq!(get(&app, "/api/trajectories").await.0, StatusCode::BAD_REQUEST);
    let (_, body) = get(&app, "/api/density?from=0&to=1").await;
    validate("density", &body);
    assert_eq!(body["values"], Value::Null);
}
