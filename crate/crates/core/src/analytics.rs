//! Mobility ranking, guidance intervals for locked nodes, and the timeline
//! of alive node/edge counts.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::intervals;
use crate::model::{Interval, TemporalGraph, TemporalNode, Time};

/// Number of top-ranked nodes locked when a graph is loaded.
pub const DEFAULT_LOCKED: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("padding must be a non-negative finite number, got {0}")]
    InvalidPadding(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MobilityScore {
    pub node_id: String,
    /// Euclidean length travelled within the window, in layout units.
    pub length: f64,
}

/// Length of the node's trajectory clipped to `window`. Holds contribute nothing.
pub fn mobility(node: &TemporalNode, window: &Interval) -> f64 {
    node.trajectory
        .iter()
        .filter_map(|s| s.clip(window))
        .map(|s| s.length())
        .fold(0.0, |acc, l| acc + l)
}

/// Nodes visible in `window`, by descending mobility; ties in id order.
pub fn rank_mobility(graph: &TemporalGraph, window: &Interval) -> Vec<MobilityScore> {
    let mut scores: Vec<MobilityScore> = graph
        .nodes()
        .filter(|n| n.appearance.iter().any(|a| a.overlaps(window)))
        .map(|n| MobilityScore {
            node_id: n.id.clone(),
            length: mobility(n, window),
        })
        .collect();
    scores.sort_by(|a, b| {
        b.length
            .total_cmp(&a.length)
            .then_with(|| a.node_id.cmp(&b.node_id))
    });
    scores
}

/// The nodes locked by default: the top of the ranking.
pub fn default_locked(ranking: &[MobilityScore]) -> Vec<String> {
    ranking
        .iter()
        .take(DEFAULT_LOCKED)
        .map(|s| s.node_id.clone())
        .collect()
}

/// Mean mobility over a ranking; 0 when empty.
pub fn mean_mobility(ranking: &[MobilityScore]) -> f64 {
    if ranking.is_empty() {
        0.0
    } else {
        ranking.iter().map(|s| s.length).sum::<f64>() / ranking.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuidanceInterval {
    pub interval: Interval,
    pub locked: BTreeSet<String>,
}

/// Times at which every pair of locked nodes interacts.
///
/// For each pair the appearances of all edges between them, each padded by
/// `padding` on both sides, are united; the result is the intersection over
/// all pairs, clipped to the graph's extent. Instants where pair sets merely
/// touch are dropped. Fewer than two locked nodes, or a pair that never
/// interacts, gives an empty list.
pub fn interaction_intervals<S: AsRef<str>>(
    graph: &TemporalGraph,
    locked: &[S],
    padding: f64,
) -> Result<Vec<GuidanceInterval>, AnalyticsError> {
    if !(padding >= 0.0 && padding.is_finite()) {
        return Err(AnalyticsError::InvalidPadding(padding));
    }
    let mut ids = BTreeSet::new();
    for id in locked {
        let id = id.as_ref();
        if graph.node(id).is_none() {
            return Err(AnalyticsError::UnknownNode(id.to_owned()));
        }
        ids.insert(id.to_owned());
    }
    let Some(extent) = graph.extent() else {
        return Ok(Vec::new());
    };
    if ids.len() < 2 {
        return Ok(Vec::new());
    }

    let members: Vec<&String> = ids.iter().collect();
    let mut common = vec![extent];
    'pairs: for (i, u) in members.iter().enumerate() {
        for v in &members[i + 1..] {
            let pair = intervals::union(
                graph
                    .edges_between(u, v)
                    .flat_map(|e| e.appearance.iter().map(|a| a.pad(padding))),
            );
            common = intervals::intersect(&common, &pair);
            if common.is_empty() {
                break 'pairs;
            }
        }
    }

    Ok(common
        .into_iter()
        .filter(|i| i.length() > 0.0)
        .map(|interval| GuidanceInterval {
            interval,
            locked: ids.clone(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoint {
    pub t: Time,
    /// Alive immediately after `t`.
    pub nodes_alive: usize,
    pub edges_alive: usize,
    /// Alive at the instant `t` itself (closed intervals ending or
    /// instantaneous at `t` included).
    pub nodes_at: usize,
    pub edges_at: usize,
}

/// Step function of alive node and edge counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineSeries {
    pub breakpoints: Vec<Breakpoint>,
}

impl TimelineSeries {
    /// `(nodes, edges)` alive at `t` under closed-interval semantics.
    pub fn counts_at(&self, t: Time) -> (usize, usize) {
        let idx = self.breakpoints.partition_point(|b| b.t <= t);
        match idx.checked_sub(1).map(|i| &self.breakpoints[i]) {
            Some(b) if b.t == t => (b.nodes_at, b.edges_at),
            Some(b) => (b.nodes_alive, b.edges_alive),
            None => (0, 0),
        }
    }

    pub fn span(&self) -> Option<Interval> {
        let first = self.breakpoints.first()?.t;
        let last = self.breakpoints.last()?.t;
        Interval::new(first, last).ok()
    }
}

/// Sweeps all appearance boundaries. One breakpoint per distinct time; an
/// empty graph gives a single all-zero breakpoint at 0.
pub fn timeline_series(graph: &TemporalGraph) -> TimelineSeries {
    // (time, is_end, is_node)
    let mut events: Vec<(Time, bool, bool)> = Vec::new();
    for n in graph.nodes() {
        for a in &n.appearance {
            events.push((a.start(), false, true));
            events.push((a.end(), true, true));
        }
    }
    for e in graph.edges() {
        for a in &e.appearance {
            events.push((a.start(), false, false));
            events.push((a.end(), true, false));
        }
    }
    if events.is_empty() {
        return TimelineSeries {
            breakpoints: vec![Breakpoint {
                t: 0.0,
                nodes_alive: 0,
                edges_alive: 0,
                nodes_at: 0,
                edges_at: 0,
            }],
        };
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut breakpoints = Vec::new();
    let (mut nodes, mut edges) = (0usize, 0usize);
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        let group_end = i + events[i..].partition_point(|e| e.0 == t);
        let group = &events[i..group_end];
        let count = |is_end: bool, is_node: bool| {
            group
                .iter()
                .filter(|e| e.1 == is_end && e.2 == is_node)
                .count()
        };
        let nodes_at = nodes + count(false, true);
        let edges_at = edges + count(false, false);
        nodes = nodes_at - count(true, true);
        edges = edges_at - count(true, false);
        breakpoints.push(Breakpoint {
            t,
            nodes_alive: nodes,
            edges_alive: edges,
            nodes_at,
            edges_at,
        });
        i = group_end;
    }
    TimelineSeries { breakpoints }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimelineBin {
    pub start: Time,
    pub end: Time,
    /// Peak counts anywhere in the closed bin.
    pub nodes_max: usize,
    pub edges_max: usize,
}

/// Peak-preserving resampling into `bins` uniform bins over the series span.
pub fn resample_timeline(series: &TimelineSeries, bins: usize) -> Vec<TimelineBin> {
    let bins = bins.max(1);
    let Some(span) = series.span() else {
        return Vec::new();
    };
    let width = span.length() / bins as f64;
    (0..bins)
        .map(|j| {
            let start = span.start() + j as f64 * width;
            let end = if j + 1 == bins {
                span.end()
            } else {
                span.start() + (j + 1) as f64 * width
            };
            let (mut nodes_max, mut edges_max) = series.counts_at(start);
            let first = series.breakpoints.partition_point(|b| b.t <= start);
            for b in series.breakpoints[first..].iter().take_while(|b| b.t <= end) {
                nodes_max = nodes_max.max(b.nodes_at);
                edges_max = edges_max.max(b.edges_at);
                if b.t < end {
                    nodes_max = nodes_max.max(b.nodes_alive);
                    edges_max = edges_max.max(b.edges_alive);
                }
            }
            TimelineBin {
                start,
                end,
                nodes_max,
                edges_max,
            }
        })
        .collect()
}
