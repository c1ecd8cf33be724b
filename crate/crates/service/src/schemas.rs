//! JSON schemas of every response body, as published under `/api/schemas/{name}`.

pub const SCHEMAS: [(&str, &str); 10] = [
    ("meta", include_str!("../schemas/meta.json")),
    ("timeline", include_str!("../schemas/timeline.json")),
    ("trajectories", include_str!("../schemas/trajectories.json")),
    ("edges", include_str!("../schemas/edges.json")),
    ("density", include_str!("../schemas/density.json")),
    ("mobility", include_str!("../schemas/mobility.json")),
    ("guidance", include_str!("../schemas/guidance.json")),
    ("session", include_str!("../schemas/session.json")),
    ("analyze", include_str!("../schemas/analyze.json")),
    ("error", include_str!("../schemas/error.json")),
];

pub fn schema(name: &str) -> Option<&'static str> {
    SCHEMAS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
