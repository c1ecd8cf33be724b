//! Canonical JSON graph and layout documents.
//!
//! Graph file:
//! `{"nodes":[{"id","label","appearance":[[s,e],..],"trajectory":[{"interval":[s,e],"from":[x,y],"to":[x,y]},..]}],
//!   "edges":[{"id","source","target","appearance":[[s,e],..]}]}`
//!
//! Layout file: `{"trajectories":[{"id","segments":[{"interval":[s,e],"from":[x,y],"to":[x,y]}]}]}`

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::model::{ModelError, PositionSegment, TemporalEdge, TemporalGraph, TemporalNode};

/// Document errors, each pinned to a byte offset into the input.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON at byte {offset} (line {line}, column {column}): {message}")]
    Json {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{element} at byte {offset}: {message}")]
    Malformed {
        element: String,
        offset: usize,
        message: String,
    },
    #[error("{element} at byte {offset}: {source}")]
    Invalid {
        element: String,
        offset: usize,
        #[source]
        source: ModelError,
    },
    #[error("layout names unknown node {element} at byte {offset}")]
    UnknownNode { element: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Json { offset, .. }
            | ParseError::Malformed { offset, .. }
            | ParseError::Invalid { offset, .. }
            | ParseError::UnknownNode { offset, .. } => *offset,
        }
    }

    /// Id of the offending element, when the failure is tied to one.
    pub fn element(&self) -> Option<&str> {
        match self {
            ParseError::Json { .. } => None,
            ParseError::Malformed { element, .. }
            | ParseError::Invalid { element, .. }
            | ParseError::UnknownNode { element, .. } => Some(element),
        }
    }
}

#[derive(Deserialize)]
struct RawGraph<'a> {
    #[serde(borrow)]
    nodes: Vec<&'a RawValue>,
    #[serde(borrow, default)]
    edges: Vec<&'a RawValue>,
}

#[derive(Serialize)]
struct GraphOut<'a> {
    nodes: Vec<&'a TemporalNode>,
    edges: Vec<&'a TemporalEdge>,
}

#[derive(Deserialize)]
struct RawLayout<'a> {
    #[serde(borrow)]
    trajectories: Vec<&'a RawValue>,
}

#[derive(Deserialize)]
struct TrajectoryDoc {
    id: String,
    segments: Vec<PositionSegment>,
}

#[derive(Serialize)]
struct TrajectoryOut<'a> {
    id: &'a str,
    segments: &'a [PositionSegment],
}

#[derive(Serialize)]
struct LayoutOut<'a> {
    trajectories: Vec<TrajectoryOut<'a>>,
}

#[derive(Deserialize)]
struct Ident {
    id: String,
}

/// Parses and validates a graph document.
pub fn parse_graph(document: &str) -> Result<TemporalGraph, ParseError> {
    let raw: RawGraph = serde_json::from_str(document).map_err(|e| json_error(document, 0, &e))?;

    let mut nodes: BTreeMap<String, (TemporalNode, usize)> = BTreeMap::new();
    for (i, value) in raw.nodes.iter().enumerate() {
        let offset = offset_of(document, value);
        let node: TemporalNode = element(document, value, || format!("nodes[{i}]"))?;
        node.validate().map_err(|source| ParseError::Invalid {
            element: node.id.clone(),
            offset,
            source,
        })?;
        if nodes.contains_key(&node.id) {
            return Err(ParseError::Invalid {
                element: node.id.clone(),
                offset,
                source: ModelError::DuplicateId(node.id),
            });
        }
        nodes.insert(node.id.clone(), (node, offset));
    }

    let mut edges: BTreeMap<String, TemporalEdge> = BTreeMap::new();
    for (i, value) in raw.edges.iter().enumerate() {
        let offset = offset_of(document, value);
        let edge: TemporalEdge = element(document, value, || format!("edges[{i}]"))?;
        let invalid = |source| ParseError::Invalid {
            element: edge.id.clone(),
            offset,
            source,
        };
        edge.validate().map_err(invalid)?;
        for endpoint in [&edge.source, &edge.target] {
            if !nodes.contains_key(endpoint) {
                return Err(invalid(ModelError::DanglingEndpoint {
                    edge: edge.id.clone(),
                    endpoint: endpoint.clone(),
                }));
            }
        }
        if edges.contains_key(&edge.id) || nodes.contains_key(&edge.id) {
            return Err(invalid(ModelError::DuplicateId(edge.id.clone())));
        }
        edges.insert(edge.id.clone(), edge);
    }

    // Everything was checked above with positions attached.
    TemporalGraph::new(nodes.into_values().map(|(n, _)| n), edges.into_values()).map_err(
        |source| ParseError::Invalid {
            element: "graph".into(),
            offset: 0,
            source,
        },
    )
}

/// Canonical graph document. Nodes and edges are written in id order.
pub fn serialize_graph(graph: &TemporalGraph) -> String {
    let doc = GraphOut {
        nodes: graph.nodes().collect(),
        edges: graph.edges().collect(),
    };
    serde_json::to_string_pretty(&doc).expect("graph documents always serialize")
}

/// A parsed layout: segments per node id, with the byte offset of each entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LayoutDocument {
    pub trajectories: BTreeMap<String, (Vec<PositionSegment>, usize)>,
}

/// Parses a layout document. Segments are sorted by start time; overlapping
/// or degenerate segments are rejected.
pub fn parse_layout(document: &str) -> Result<LayoutDocument, ParseError> {
    let raw: RawLayout = serde_json::from_str(document).map_err(|e| json_error(document, 0, &e))?;
    let mut trajectories = BTreeMap::new();
    for (i, value) in raw.trajectories.iter().enumerate() {
        let offset = offset_of(document, value);
        let TrajectoryDoc { id, mut segments } =
            element(document, value, || format!("trajectories[{i}]"))?;
        segments.sort_by(|a, b| a.interval.start().total_cmp(&b.interval.start()));
        let malformed = |message: String| ParseError::Malformed {
            element: id.clone(),
            offset,
            message,
        };
        for (k, seg) in segments.iter().enumerate() {
            if !seg.from.is_finite() || !seg.to.is_finite() {
                return Err(malformed(format!("segment {k} has a non-finite coordinate")));
            }
            if seg.interval.length() == 0.0 && seg.from != seg.to {
                return Err(malformed(format!("zero-length segment {k} moves")));
            }
        }
        if let Some(k) = segments
            .windows(2)
            .position(|w| w[1].interval.start() < w[0].interval.end())
        {
            return Err(malformed(format!("segments {k} and {} overlap", k + 1)));
        }
        if trajectories.contains_key(&id) {
            return Err(malformed("duplicate trajectory".into()));
        }
        trajectories.insert(id, (segments, offset));
    }
    Ok(LayoutDocument { trajectories })
}

/// Layout document holding the trajectories of every node in `graph`.
pub fn serialize_layout(graph: &TemporalGraph) -> String {
    let doc = LayoutOut {
        trajectories: graph
            .nodes()
            .map(|n| TrajectoryOut {
                id: &n.id,
                segments: &n.trajectory,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("layout documents always serialize")
}

fn element<T: DeserializeOwned>(
    document: &str,
    value: &RawValue,
    fallback_name: impl FnOnce() -> String,
) -> Result<T, ParseError> {
    serde_json::from_str(value.get()).map_err(|e| {
        let name = serde_json::from_str::<Ident>(value.get())
            .map(|i| i.id)
            .unwrap_or_else(|_| fallback_name());
        let base = offset_of(document, value);
        ParseError::Malformed {
            element: name,
            offset: base + line_col_to_offset(value.get(), e.line(), e.column()),
            message: e.to_string(),
        }
    })
}

/// Byte offset of a borrowed sub-slice within its document.
fn offset_of(document: &str, value: &RawValue) -> usize {
    value.get().as_ptr() as usize - document.as_ptr() as usize
}

fn json_error(document: &str, base: usize, e: &serde_json::Error) -> ParseError {
    ParseError::Json {
        offset: base + line_col_to_offset(document, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// serde_json reports 1-based lines and columns; column 0 means "before the line".
fn line_col_to_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}
