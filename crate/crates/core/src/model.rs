//! Temporal graphs embedded in the space-time cube.
//!
//! Time is a continuous real axis. Nodes and edges carry closed appearance
//! intervals; node positions are piecewise-linear trajectories made of
//! [`PositionSegment`]s. Nothing here discretizes time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Seconds since the dataset epoch. Unitless reals are accepted as well.
pub type Time = f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("time value {0} is not finite")]
    NonFiniteTime(f64),
    #[error("interval start {start} is after its end {end}")]
    ReversedInterval { start: f64, end: f64 },
    #[error("{element}: appearance intervals overlap or are out of order at index {index}")]
    OverlappingAppearance { element: String, index: usize },
    #[error("{element}: trajectory segments overlap or are out of order at index {index}")]
    OverlappingSegments { element: String, index: usize },
    #[error("{element}: trajectory segment {index} lies outside the node's appearance")]
    SegmentOutsideAppearance { element: String, index: usize },
    #[error("{element}: zero-length segment {index} must not move")]
    MovingInstant { element: String, index: usize },
    #[error("{element}: non-finite coordinate in segment {index}")]
    NonFinitePosition { element: String, index: usize },
    #[error("edge {edge}: endpoint {endpoint} is not a node of this graph")]
    DanglingEndpoint { edge: String, endpoint: String },
    #[error("edge {0} connects a node to itself")]
    SelfLoop(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
}

/// A point in layout units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Point at fraction `f` of the way from `self` to `other`.
    ///
    /// Exact at both ends, and along any axis where the two points agree.
    pub fn lerp(self, other: Point, f: f64) -> Point {
        if f == 1.0 {
            return other;
        }
        Point {
            x: self.x + f * (other.x - self.x),
            y: self.y + f * (other.y - self.y),
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Closed time interval `[start, end]`. Zero length marks an instantaneous event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    start: Time,
    end: Time,
}

impl Interval {
    pub fn new(start: Time, end: Time) -> Result<Self, ModelError> {
        if !start.is_finite() {
            return Err(ModelError::NonFiniteTime(start));
        }
        if !end.is_finite() {
            return Err(ModelError::NonFiniteTime(end));
        }
        if start > end {
            return Err(ModelError::ReversedInterval { start, end });
        }
        Ok(Interval { start, end })
    }

    pub fn instant(t: Time) -> Result<Self, ModelError> {
        Interval::new(t, t)
    }

    pub fn start(&self) -> Time {
        self.start
    }

    pub fn end(&self) -> Time {
        self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn midpoint(&self) -> Time {
        self.start + 0.5 * (self.end - self.start)
    }

    pub fn contains(&self, t: Time) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Closed intersection; touching intervals intersect in a single instant.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start <= end).then_some(Interval { start, end })
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Grows the interval by `amount` on both sides.
    pub fn pad(&self, amount: f64) -> Interval {
        Interval {
            start: self.start - amount,
            end: self.end + amount,
        }
    }

    /// Smallest interval covering both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = ModelError;

    fn try_from([start, end]: [f64; 2]) -> Result<Self, Self::Error> {
        Interval::new(start, end)
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.start, i.end]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Linear movement from `from` to `to` over `interval`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionSegment {
    pub interval: Interval,
    pub from: Point,
    pub to: Point,
}

impl PositionSegment {
    pub fn new(interval: Interval, from: Point, to: Point) -> Self {
        PositionSegment { interval, from, to }
    }

    pub fn stationary(interval: Interval, at: Point) -> Self {
        PositionSegment {
            interval,
            from: at,
            to: at,
        }
    }

    /// Position at `t`, which is clamped into the segment's interval.
    pub fn position_at(&self, t: Time) -> Point {
        let Interval { start, end } = self.interval;
        if t <= start {
            return self.from;
        }
        if t >= end {
            return self.to;
        }
        self.from.lerp(self.to, (t - start) / (end - start))
    }

    pub fn length(&self) -> f64 {
        self.from.distance(self.to)
    }

    /// Restricts the segment to `window`, cutting the geometry at the new
    /// endpoints. Untouched ends keep their exact coordinates.
    pub fn clip(&self, window: &Interval) -> Option<PositionSegment> {
        let interval = self.interval.intersect(window)?;
        let from = if interval.start == self.interval.start {
            self.from
        } else {
            self.position_at(interval.start)
        };
        let to = if interval.end == self.interval.end {
            self.to
        } else {
            self.position_at(interval.end)
        };
        Some(PositionSegment { interval, from, to })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalNode {
    pub id: String,
    pub label: String,
    pub appearance: Vec<Interval>,
    #[serde(default)]
    pub trajectory: Vec<PositionSegment>,
}

impl TemporalNode {
    /// Checks ordering, disjointness and containment of appearance and trajectory.
    pub fn validate(&self) -> Result<(), ModelError> {
        check_disjoint_sorted(&self.appearance).map_err(|index| {
            ModelError::OverlappingAppearance {
                element: self.id.clone(),
                index,
            }
        })?;
        for (index, pair) in self.trajectory.windows(2).enumerate() {
            if pair[1].interval.start < pair[0].interval.end {
                return Err(ModelError::OverlappingSegments {
                    element: self.id.clone(),
                    index: index + 1,
                });
            }
        }
        for (index, seg) in self.trajectory.iter().enumerate() {
            if !seg.from.is_finite() || !seg.to.is_finite() {
                return Err(ModelError::NonFinitePosition {
                    element: self.id.clone(),
                    index,
                });
            }
            if seg.interval.length() == 0.0 && seg.from != seg.to {
                return Err(ModelError::MovingInstant {
                    element: self.id.clone(),
                    index,
                });
            }
            if !self
                .appearance
                .iter()
                .any(|a| a.contains_interval(&seg.interval))
            {
                return Err(ModelError::SegmentOutsideAppearance {
                    element: self.id.clone(),
                    index,
                });
            }
        }
        Ok(())
    }

    pub fn is_alive_at(&self, t: Time) -> bool {
        interval_containing(&self.appearance, t).is_some()
    }

    /// Position of the node at `t`.
    ///
    /// Inside a segment the position is interpolated. Between segments the
    /// node holds its last position; before its first segment it sits at
    /// that segment's start. Outside every appearance interval, or for a
    /// node without trajectory, the position is absent.
    pub fn position_at(&self, t: Time) -> Option<Point> {
        interval_containing(&self.appearance, t)?;
        if self.trajectory.is_empty() {
            return None;
        }
        // Segments starting at or before t.
        let started = self
            .trajectory
            .partition_point(|s| s.interval.start <= t);
        if started == 0 {
            return Some(self.trajectory[0].from);
        }
        let seg = &self.trajectory[started - 1];
        Some(seg.position_at(t))
    }

    /// Hull of all appearance intervals.
    pub fn lifespan(&self) -> Option<Interval> {
        let first = self.appearance.first()?;
        let last = self.appearance.last()?;
        Some(first.hull(last))
    }

    /// Copy restricted to `window`, or `None` when nothing remains.
    pub fn clip(&self, window: &Interval) -> Option<TemporalNode> {
        let appearance = clip_intervals(&self.appearance, window);
        if appearance.is_empty() {
            return None;
        }
        let mut trajectory: Vec<PositionSegment> = self
            .trajectory
            .iter()
            .filter_map(|s| s.clip(window))
            .collect();
        // A cut inside a hold keeps the held position explicitly.
        for a in &appearance {
            let next = trajectory
                .iter()
                .map(|s| s.interval.start)
                .find(|&s| s >= a.start && s <= a.end);
            if next == Some(a.start) {
                continue;
            }
            if let Some(p) = self.position_at(a.start) {
                let end = next.unwrap_or(a.end);
                trajectory.push(PositionSegment::stationary(Interval { start: a.start, end }, p));
            }
        }
        trajectory.sort_by(|a, b| a.interval.start.total_cmp(&b.interval.start));
        Some(TemporalNode {
            id: self.id.clone(),
            label: self.label.clone(),
            appearance,
            trajectory,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub appearance: Vec<Interval>,
}

impl TemporalEdge {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.source == self.target {
            return Err(ModelError::SelfLoop(self.id.clone()));
        }
        check_disjoint_sorted(&self.appearance).map_err(|index| {
            ModelError::OverlappingAppearance {
                element: self.id.clone(),
                index,
            }
        })
    }

    pub fn is_alive_at(&self, t: Time) -> bool {
        interval_containing(&self.appearance, t).is_some()
    }

    pub fn connects(&self, a: &str, b: &str) -> bool {
        (self.source == a && self.target == b) || (self.source == b && self.target == a)
    }

    /// The endpoint opposite to `node`, if `node` is an endpoint.
    pub fn other_end(&self, node: &str) -> Option<&str> {
        if self.source == node {
            Some(&self.target)
        } else if self.target == node {
            Some(&self.source)
        } else {
            None
        }
    }

    pub fn clip(&self, window: &Interval) -> Option<TemporalEdge> {
        let appearance = clip_intervals(&self.appearance, window);
        (!appearance.is_empty()).then(|| TemporalEdge {
            id: self.id.clone(),
            source: self.source.clone(),
            target: self.target.clone(),
            appearance,
        })
    }
}

/// An immutable temporal graph `(V, E)` with continuous-time attributes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TemporalGraph {
    nodes: BTreeMap<String, TemporalNode>,
    edges: BTreeMap<String, TemporalEdge>,
    extent: Option<Interval>,
}

/// Elements alive at a given instant, in id order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alive<'a> {
    pub nodes: BTreeSet<&'a str>,
    pub edges: BTreeSet<&'a str>,
}

impl TemporalGraph {
    /// Builds a validated graph. Every node and edge invariant is checked.
    pub fn new(
        nodes: impl IntoIterator<Item = TemporalNode>,
        edges: impl IntoIterator<Item = TemporalEdge>,
    ) -> Result<Self, ModelError> {
        let mut node_map = BTreeMap::new();
        for node in nodes {
            node.validate()?;
            if node_map.contains_key(&node.id) {
                return Err(ModelError::DuplicateId(node.id));
            }
            node_map.insert(node.id.clone(), node);
        }
        let mut edge_map = BTreeMap::new();
        for edge in edges {
            edge.validate()?;
            for endpoint in [&edge.source, &edge.target] {
                if !node_map.contains_key(endpoint) {
                    return Err(ModelError::DanglingEndpoint {
                        edge: edge.id.clone(),
                        endpoint: endpoint.clone(),
                    });
                }
            }
            if edge_map.contains_key(&edge.id) || node_map.contains_key(&edge.id) {
                return Err(ModelError::DuplicateId(edge.id));
            }
            edge_map.insert(edge.id.clone(), edge);
        }
        Ok(Self::from_validated(node_map, edge_map))
    }

    fn from_validated(
        nodes: BTreeMap<String, TemporalNode>,
        edges: BTreeMap<String, TemporalEdge>,
    ) -> Self {
        let extent = nodes
            .values()
            .flat_map(|n| n.appearance.iter())
            .chain(edges.values().flat_map(|e| e.appearance.iter()))
            .copied()
            .reduce(|a, b| a.hull(&b));
        TemporalGraph {
            nodes,
            edges,
            extent,
        }
    }

    /// `[min start, max end]` over every appearance; `None` for an empty graph.
    pub fn extent(&self) -> Option<Interval> {
        self.extent
    }

    pub fn node(&self, id: &str) -> Option<&TemporalNode> {
        self.nodes.get(id)
    }

    pub fn edge(&self, id: &str) -> Option<&TemporalEdge> {
        self.edges.get(id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &TemporalNode> + Clone {
        self.nodes.values()
    }

    /// Edges in id order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = &TemporalEdge> + Clone {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn incident_edges<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a TemporalEdge> {
        self.edges
            .values()
            .filter(move |e| e.source == node || e.target == node)
    }

    /// Edges between `a` and `b` in either direction.
    pub fn edges_between<'a>(
        &'a self,
        a: &'a str,
        b: &'a str,
    ) -> impl Iterator<Item = &'a TemporalEdge> {
        self.edges.values().filter(move |e| e.connects(a, b))
    }

    /// Nodes and edges whose closed appearance contains `t`.
    pub fn alive_at(&self, t: Time) -> Alive<'_> {
        Alive {
            nodes: self
                .nodes
                .values()
                .filter(|n| n.is_alive_at(t))
                .map(|n| n.id.as_str())
                .collect(),
            edges: self
                .edges
                .values()
                .filter(|e| e.is_alive_at(t))
                .map(|e| e.id.as_str())
                .collect(),
        }
    }

    /// The subgraph existing during `window`.
    ///
    /// Appearances and segments are intersected with the window, segments cut
    /// at the interpolated positions. Elements left without appearance are
    /// dropped, along with edges whose endpoints were dropped. A window
    /// disjoint from the graph yields an empty graph.
    pub fn clip_to_interval(&self, window: &Interval) -> TemporalGraph {
        let nodes: BTreeMap<_, _> = self
            .nodes
            .values()
            .filter_map(|n| n.clip(window))
            .map(|n| (n.id.clone(), n))
            .collect();
        let edges = self
            .edges
            .values()
            .filter(|e| nodes.contains_key(&e.source) && nodes.contains_key(&e.target))
            .filter_map(|e| e.clip(window))
            .map(|e| (e.id.clone(), e))
            .collect();
        Self::from_validated(nodes, edges)
    }

    /// Replaces trajectories, keeping everything else. Invariants are re-checked.
    pub fn with_trajectories(
        &self,
        mut trajectories: BTreeMap<String, Vec<PositionSegment>>,
    ) -> Result<TemporalGraph, ModelError> {
        let mut nodes = self.nodes.clone();
        for node in nodes.values_mut() {
            node.trajectory = trajectories.remove(&node.id).unwrap_or_default();
            node.validate()?;
        }
        Ok(Self::from_validated(nodes, self.edges.clone()))
    }
}

/// Index of the first out-of-order or overlapping interval.
fn check_disjoint_sorted(intervals: &[Interval]) -> Result<(), usize> {
    match intervals
        .windows(2)
        .position(|w| w[1].start <= w[0].end)
    {
        Some(i) => Err(i + 1),
        None => Ok(()),
    }
}

/// Interval of a sorted disjoint list that contains `t`.
pub(crate) fn interval_containing(intervals: &[Interval], t: Time) -> Option<&Interval> {
    let idx = intervals.partition_point(|i| i.start <= t);
    let candidate = intervals.get(idx.checked_sub(1)?)?;
    (t <= candidate.end).then_some(candidate)
}

pub(crate) fn clip_intervals(intervals: &[Interval], window: &Interval) -> Vec<Interval> {
    intervals
        .iter()
        .filter_map(|i| i.intersect(window))
        .collect()
}
