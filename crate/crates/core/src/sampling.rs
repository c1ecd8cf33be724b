//! Time-coloring of trajectories: turning piecewise-linear node paths into
//! trails of points whose opacity encodes their age.
//!
//! Ages are relative: a point's age is measured from the node's first
//! appearance inside the active window and normalized by the node's visible
//! lifespan in that window. Newer points are more opaque.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::diagnostics::clamp_unit;
use crate::intervals::clip as clip_intervals;
use crate::model::{Interval, Point, PositionSegment, TemporalGraph, TemporalNode, Time};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("node {node} is not visible at {t} within the window")]
    OutsideAppearance { node: String, t: Time },
}

/// Linear opacity scale over normalized age.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgingScale {
    /// Opacity of the oldest point.
    pub min_opacity: f64,
    /// Opacity of the newest point.
    pub max_opacity: f64,
}

impl Default for AgingScale {
    fn default() -> Self {
        AgingScale {
            min_opacity: 0.15,
            max_opacity: 1.0,
        }
    }
}

impl AgingScale {
    pub fn opacity(&self, norm_age: f64) -> f64 {
        let a = clamp_unit(norm_age);
        self.min_opacity + (self.max_opacity - self.min_opacity) * a
    }
}

/// Opacity on the default scale (0.15 for the oldest point, 1 for the newest).
pub fn opacity_for_age(norm_age: f64) -> f64 {
    AgingScale::default().opacity(norm_age)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    /// Taken directly from the layout (a segment endpoint).
    Anchor,
    Interpolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledPoint {
    pub t: Time,
    pub position: Point,
    pub kind: PointKind,
    /// Time since the node's first appearance in the window.
    pub age: f64,
    pub norm_age: f64,
    pub opacity: f64,
}

/// Polyline piece between points `start` and `start + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MovementSegment {
    pub start: usize,
    pub mean_age: f64,
    pub opacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledTrajectory {
    pub node_id: String,
    /// Time-ordered.
    pub points: Vec<SampledPoint>,
    /// One entry per consecutive point pair within each appearance interval.
    pub movement: Vec<MovementSegment>,
}

/// First and last appearance of the node inside `window`.
fn visible_span(node: &TemporalNode, window: &Interval) -> Option<Interval> {
    let mut clipped = node.appearance.iter().filter_map(|a| a.intersect(window));
    let first = clipped.next()?;
    Some(clipped.fold(first, |acc, a| acc.hull(&a)))
}

fn ages(span: &Interval, t: Time) -> (f64, f64) {
    let age = t - span.start();
    let norm = if span.length() > 0.0 {
        (age / span.length()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (age, norm)
}

/// Age of the node at `t` relative to its first appearance in `window`, and
/// that age normalized by the node's visible lifespan in the window.
pub fn relative_age(node: &TemporalNode, t: Time, window: &Interval) -> Result<(f64, f64), SamplingError> {
    let visible = window.contains(t) && node.appearance.iter().any(|a| a.contains(t));
    let span = visible_span(node, window).filter(|_| visible).ok_or_else(|| {
        SamplingError::OutsideAppearance {
            node: node.id.clone(),
            t,
        }
    })?;
    Ok(ages(&span, t))
}

/// Samples a node's trajectory inside `window`.
///
/// Each clipped segment contributes its two endpoints as anchors plus `k`
/// interpolated points at time fractions `i / (k + 1)`. An anchor equal in
/// time and position to the previous point (the shared end of contiguous
/// segments) is emitted once. Where the node holds its position at the start
/// or end of a visible appearance interval, the held position is anchored at
/// that bound.
///
/// Returns `None` when the node is not visible in the window.
pub fn sample_trajectory(
    node: &TemporalNode,
    window: &Interval,
    k: usize,
    aging: &AgingScale,
) -> Option<SampledTrajectory> {
    let span = visible_span(node, window)?;
    let appearance = clip_intervals(&node.appearance, window);
    let clipped: Vec<PositionSegment> = node.trajectory.iter().filter_map(|s| s.clip(window)).collect();
    let point = |t: Time, position: Point, kind: PointKind| {
        let (age, norm_age) = ages(&span, t);
        SampledPoint {
            t,
            position,
            kind,
            age,
            norm_age,
            opacity: aging.opacity(norm_age),
        }
    };

    let mut points: Vec<SampledPoint> = Vec::new();
    let mut movement = Vec::new();
    for appearance in &appearance {
        let run_start = points.len();
        let push_anchor = |points: &mut Vec<SampledPoint>, t: Time, p: Point| {
            let duplicate = points[run_start..]
                .last()
                .is_some_and(|last| last.t == t && last.position == p);
            if !duplicate {
                points.push(point(t, p, PointKind::Anchor));
            }
        };

        let segments: Vec<&PositionSegment> = clipped
            .iter()
            .filter(|s| appearance.contains_interval(&s.interval))
            .collect();
        // Held stretches at either end of the appearance get an anchor.
        let lead = segments.first().is_none_or(|s| s.interval.start() > appearance.start());
        let trail = segments.last().is_none_or(|s| s.interval.end() < appearance.end());
        if lead {
            if let Some(p) = node.position_at(appearance.start()) {
                push_anchor(&mut points, appearance.start(), p);
            }
        }
        for seg in segments {
            push_anchor(&mut points, seg.interval.start(), seg.from);
            if seg.interval.length() > 0.0 {
                for i in 1..=k {
                    let f = i as f64 / (k + 1) as f64;
                    let t = seg.interval.start() + f * seg.interval.length();
                    points.push(point(t, seg.from.lerp(seg.to, f), PointKind::Interpolated));
                }
            }
            push_anchor(&mut points, seg.interval.end(), seg.to);
        }
        if trail {
            if let Some(p) = node.position_at(appearance.end()) {
                push_anchor(&mut points, appearance.end(), p);
            }
        }

        for i in run_start..points.len().saturating_sub(1) {
            let (a, b) = (&points[i], &points[i + 1]);
            movement.push(MovementSegment {
                start: i,
                mean_age: 0.5 * (a.age + b.age),
                opacity: aging.opacity(0.5 * (a.norm_age + b.norm_age)),
            });
        }
    }

    Some(SampledTrajectory {
        node_id: node.id.clone(),
        points,
        movement,
    })
}

/// Samples every node visible in `window`, in id order.
pub fn sample_graph(
    graph: &TemporalGraph,
    window: &Interval,
    k: usize,
    aging: &AgingScale,
) -> Vec<SampledTrajectory> {
    let nodes: Vec<&TemporalNode> = graph.nodes().collect();
    nodes
        .par_iter()
        .filter_map(|n| sample_trajectory(n, window, k, aging))
        .collect()
}

/// Mean age of each movement segment of the trajectory.
pub fn movement_ages(trajectory: &SampledTrajectory) -> Vec<f64> {
    trajectory.movement.iter().map(|m| m.mean_age).collect()
}

/// One edge occurrence drawn between two sampled points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDrawing {
    pub edge_id: String,
    /// Midpoint of the clipped edge appearance.
    pub t_event: Time,
    /// The node the drawing was requested for.
    pub node_a: String,
    pub node_b: String,
    pub endpoint_a: SampledPoint,
    pub endpoint_b: SampledPoint,
    pub opacity: f64,
}

/// Index of the sample nearest in time to `t`; ties go to the earlier sample.
pub fn nearest_sample(points: &[SampledPoint], t: Time) -> Option<usize> {
    if points.is_empty() {
        return None;
    }
    let after = points.partition_point(|p| p.t < t);
    let mut best = after.min(points.len() - 1);
    if after > 0 {
        let mut before = after - 1;
        while before > 0 && points[before - 1].t == points[before].t {
            before -= 1;
        }
        if after == points.len() || (t - points[before].t) <= (points[after].t - t) {
            best = before;
        }
    }
    Some(best)
}

/// Drawing instructions for every edge incident to `node_id` inside `window`.
///
/// Each clipped appearance interval yields one drawing anchored at its
/// midpoint; both ends snap to the sample of their node nearest in time.
/// Edges whose other end has no samples are skipped.
pub fn edges_for_node(
    graph: &TemporalGraph,
    node_id: &str,
    window: &Interval,
    sampled: &[SampledTrajectory],
    aging: &AgingScale,
) -> Result<Vec<EdgeDrawing>, SamplingError> {
    if graph.node(node_id).is_none() {
        return Err(SamplingError::UnknownNode(node_id.to_owned()));
    }
    let by_node: BTreeMap<&str, &SampledTrajectory> =
        sampled.iter().map(|s| (s.node_id.as_str(), s)).collect();
    let Some(own) = by_node.get(node_id) else {
        return Ok(Vec::new());
    };

    let mut drawings = Vec::new();
    for edge in graph.incident_edges(node_id) {
        let other = edge.other_end(node_id).expect("incident edge");
        let Some(theirs) = by_node.get(other) else {
            continue;
        };
        for interval in edge.appearance.iter().filter_map(|a| a.intersect(window)) {
            let t_event = interval.midpoint();
            let (Some(ia), Some(ib)) = (nearest_sample(&own.points, t_event), nearest_sample(&theirs.points, t_event)) else {
                continue;
            };
            let (a, b) = (own.points[ia], theirs.points[ib]);
            drawings.push(EdgeDrawing {
                edge_id: edge.id.clone(),
                t_event,
                node_a: node_id.to_owned(),
                node_b: other.to_owned(),
                endpoint_a: a,
                endpoint_b: b,
                opacity: aging.opacity(0.5 * (a.norm_age + b.norm_age)),
            });
        }
    }
    Ok(drawings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TemporalEdge;

    fn iv(s: f64, e: f64) -> Interval {
        Interval::new(s, e).unwrap()
    }

    fn diagonal(id: &str) -> TemporalNode {
        TemporalNode {
            id: id.into(),
            label: id.into(),
            appearance: vec![iv(0.0, 1.0)],
            trajectory: vec![PositionSegment::new(iv(0.0, 1.0), Point::ORIGIN, Point::new(10.0, 10.0))],
        }
    }

    #[test]
    fn anchors_only_without_interpolation() {
        let s = sample_trajectory(&diagonal("v"), &iv(0.0, 1.0), 0, &AgingScale::default()).unwrap();
        assert_eq!(s.points.len(), 2);
        assert!(s.points.iter().all(|p| p.kind == PointKind::Anchor));
        assert_eq!(s.movement.len(), 1);
    }

    #[test]
    fn midpoint_and_quarter_samples() {
        let aging = AgingScale::default();
        let s = sample_trajectory(&diagonal("v"), &iv(0.0, 1.0), 1, &aging).unwrap();
        assert_eq!(s.points[1].t, 0.5);
        assert_eq!(s.points[1].position, Point::new(5.0, 5.0));
        assert_eq!(s.points[1].kind, PointKind::Interpolated);

        let s = sample_trajectory(&diagonal("v"), &iv(0.0, 1.0), 3, &aging).unwrap();
        let inner: Vec<_> = s.points[1..4].iter().map(|p| (p.t, p.position)).collect();
        assert_eq!(
            inner,
            vec![
                (0.25, Point::new(2.5, 2.5)),
                (0.5, Point::new(5.0, 5.0)),
                (0.75, Point::new(7.5, 7.5)),
            ]
        );
    }

    #[test]
    fn relative_age_examples() {
        let v = TemporalNode {
            id: "v".into(),
            label: "v".into(),
            appearance: vec![iv(10.0, 20.0)],
            trajectory: vec![],
        };
        assert_eq!(relative_age(&v, 10.0, &iv(0.0, 30.0)).unwrap(), (0.0, 0.0));
        assert_eq!(relative_age(&v, 15.0, &iv(10.0, 20.0)).unwrap(), (5.0, 0.5));
        // shrinking the window moves the first appearance
        assert_eq!(relative_age(&v, 15.0, &iv(12.0, 20.0)).unwrap(), (3.0, 0.375));
        assert!(relative_age(&v, 25.0, &iv(0.0, 30.0)).is_err());
        assert!(relative_age(&v, 15.0, &iv(16.0, 30.0)).is_err());

        let instant = TemporalNode {
            appearance: vec![iv(4.0, 4.0)],
            ..v
        };
        assert_eq!(relative_age(&instant, 4.0, &iv(0.0, 9.0)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn opacity_scale() {
        assert_eq!(opacity_for_age(1.0), 1.0);
        assert_eq!(opacity_for_age(0.0), 0.15);
        let mid = 0.5 * (opacity_for_age(0.0) + opacity_for_age(1.0));
        assert!((opacity_for_age(0.5) - mid).abs() <= 1e-12);
        let before = crate::diagnostics::clamped_inputs();
        assert_eq!(opacity_for_age(3.0), 1.0);
        assert_eq!(opacity_for_age(-1.0), 0.15);
        assert!(crate::diagnostics::clamped_inputs() >= before + 2);
    }

    #[test]
    fn movement_means() {
        let traj = |ages: &[f64]| SampledTrajectory {
            node_id: "v".into(),
            points: ages
                .iter()
                .map(|&a| SampledPoint {
                    t: a,
                    position: Point::ORIGIN,
                    kind: PointKind::Anchor,
                    age: a,
                    norm_age: 0.0,
                    opacity: 0.0,
                })
                .collect(),
            movement: ages
                .windows(2)
                .enumerate()
                .map(|(i, w)| MovementSegment {
                    start: i,
                    mean_age: 0.5 * (w[0] + w[1]),
                    opacity: 0.0,
                })
                .collect(),
        };
        assert_eq!(movement_ages(&traj(&[0.0, 10.0])), vec![5.0]);
        assert_eq!(movement_ages(&traj(&[0.0, 2.0, 4.0, 6.0])), vec![1.0, 3.0, 5.0]);
        assert!(movement_ages(&traj(&[1.0])).is_empty());

        let s = sample_trajectory(&diagonal("v"), &iv(0.0, 1.0), 3, &AgingScale::default()).unwrap();
        assert_eq!(movement_ages(&s), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn shared_anchors_are_deduplicated() {
        let v = TemporalNode {
            id: "v".into(),
            label: "v".into(),
            appearance: vec![iv(0.0, 3.0)],
            trajectory: vec![
                PositionSegment::new(iv(0.0, 1.0), Point::ORIGIN, Point::new(1.0, 0.0)),
                PositionSegment::new(iv(1.0, 2.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
                PositionSegment::new(iv(2.0, 3.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)),
            ],
        };
        let k = 4;
        let s = sample_trajectory(&v, &iv(0.0, 3.0), k, &AgingScale::default()).unwrap();
        let m = 3;
        assert_eq!(s.points.len(), m * (k + 2) - (m - 1));
        assert_eq!(s.movement.len(), s.points.len() - 1);
    }

    #[test]
    fn runs_break_between_appearance_intervals() {
        let v = TemporalNode {
            id: "v".into(),
            label: "v".into(),
            appearance: vec![iv(0.0, 1.0), iv(5.0, 6.0)],
            trajectory: vec![
                PositionSegment::new(iv(0.0, 1.0), Point::ORIGIN, Point::new(1.0, 0.0)),
                PositionSegment::new(iv(5.0, 6.0), Point::new(2.0, 0.0), Point::new(3.0, 0.0)),
            ],
        };
        let s = sample_trajectory(&v, &iv(0.0, 6.0), 0, &AgingScale::default()).unwrap();
        assert_eq!(s.points.len(), 4);
        let starts: Vec<_> = s.movement.iter().map(|m| m.start).collect();
        assert_eq!(starts, vec![0, 2]);
    }

    #[test]
    fn held_position_fills_segmentless_window() {
        let v = TemporalNode {
            id: "v".into(),
            label: "v".into(),
            appearance: vec![iv(0.0, 7.0)],
            trajectory: vec![
                PositionSegment::new(iv(0.0, 1.0), Point::new(5.0, 6.0), Point::new(12.0, 11.0)),
                PositionSegment::new(iv(5.0, 7.0), Point::new(8.0, 3.0), Point::new(1.0, 7.0)),
            ],
        };
        let s = sample_trajectory(&v, &iv(2.0, 4.0), 3, &AgingScale::default()).unwrap();
        assert_eq!(s.points.len(), 2);
        assert!(s.points.iter().all(|p| p.position == Point::new(12.0, 11.0)));
        assert!(sample_trajectory(&v, &iv(8.0, 9.0), 3, &AgingScale::default()).is_none());
    }

    #[test]
    fn nearest_sample_prefers_earlier_on_ties() {
        let pts: Vec<SampledPoint> = [0.0, 1.0, 2.0, 2.0, 4.0]
            .iter()
            .map(|&t| SampledPoint {
                t,
                position: Point::ORIGIN,
                kind: PointKind::Anchor,
                age: 0.0,
                norm_age: 0.0,
                opacity: 0.0,
            })
            .collect();
        assert_eq!(nearest_sample(&pts, 0.5), Some(0));
        assert_eq!(nearest_sample(&pts, 1.5), Some(1));
        assert_eq!(nearest_sample(&pts, 3.0), Some(2));
        assert_eq!(nearest_sample(&pts, 2.0), Some(2));
        assert_eq!(nearest_sample(&pts, 9.0), Some(4));
        assert_eq!(nearest_sample(&pts, -9.0), Some(0));
        assert_eq!(nearest_sample(&[], 1.0), None);
    }

    #[test]
    fn edge_anchored_at_interval_midpoint() {
        let stationary = |id: &str, x: f64| TemporalNode {
            id: id.into(),
            label: id.into(),
            appearance: vec![iv(10.0, 20.0)],
            trajectory: vec![PositionSegment::new(iv(10.0, 20.0), Point::new(x, 0.0), Point::new(x, 10.0))],
        };
        let edge = TemporalEdge {
            id: "ab".into(),
            source: "a".into(),
            target: "b".into(),
            appearance: vec![iv(10.0, 20.0)],
        };
        let g = TemporalGraph::new([stationary("a", 0.0), stationary("b", 5.0)], [edge]).unwrap();
        let window = iv(10.0, 20.0);
        let aging = AgingScale::default();
        let sampled = sample_graph(&g, &window, 1, &aging);
        let drawn = edges_for_node(&g, "a", &window, &sampled, &aging).unwrap();
        assert_eq!(drawn.len(), 1);
        let d = &drawn[0];
        assert_eq!(d.t_event, 15.0);
        assert_eq!(d.endpoint_a.t, 15.0);
        assert_eq!(d.endpoint_b.t, 15.0);
        assert_eq!(d.endpoint_b.position, Point::new(5.0, 5.0));
        assert_eq!(d.opacity, aging.opacity(0.5));

        let outside = iv(10.0, 20.0);
        let g2 = TemporalGraph::new(
            [stationary("a", 0.0), stationary("b", 5.0)],
            [TemporalEdge {
                id: "late".into(),
                source: "a".into(),
                target: "b".into(),
                appearance: vec![iv(25.0, 30.0)],
            }],
        );
        // edge appearance outside the node span is legal in the model
        let g2 = g2.unwrap();
        let sampled = sample_graph(&g2, &outside, 1, &aging);
        assert!(edges_for_node(&g2, "a", &outside, &sampled, &aging).unwrap().is_empty());
        assert_eq!(
            edges_for_node(&g2, "zz", &outside, &sampled, &aging),
            Err(SamplingError::UnknownNode("zz".into()))
        );
    }
}
