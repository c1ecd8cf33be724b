//! Attaching trajectories to a graph: imported from an external layout, or
//! computed by a small binned force-directed fallback.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::format::{parse_layout, LayoutDocument, ParseError};
use crate::model::{Interval, ModelError, Point, PositionSegment, TemporalGraph, Time};

/// What `import_layout` had to adjust.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayoutDiagnostics {
    /// Nodes the layout did not cover; they sit stationary at the origin.
    pub stationary: Vec<String>,
    /// Nodes whose segments were clipped to their appearance.
    pub clipped: Vec<String>,
}

/// Attaches the trajectories from a layout document to `graph`.
pub fn import_layout(
    graph: &TemporalGraph,
    document: &str,
) -> Result<(TemporalGraph, LayoutDiagnostics), ParseError> {
    let layout = parse_layout(document)?;
    apply_layout(graph, layout)
}

/// Attaches parsed trajectories. Segments are clipped to the node's
/// appearance; nodes without a trajectory get one stationary segment at the
/// origin per appearance interval.
pub fn apply_layout(
    graph: &TemporalGraph,
    layout: LayoutDocument,
) -> Result<(TemporalGraph, LayoutDiagnostics), ParseError> {
    let mut diagnostics = LayoutDiagnostics::default();
    let mut layout = layout.trajectories;

    if let Some((id, (_, offset))) = layout.iter().find(|(id, _)| graph.node(id).is_none()) {
        return Err(ParseError::UnknownNode {
            element: id.clone(),
            offset: *offset,
        });
    }

    let mut trajectories = BTreeMap::new();
    for node in graph.nodes() {
        let segments = match layout.remove(&node.id) {
            Some((segments, _)) => {
                let clipped = clip_to_appearance(&segments, &node.appearance);
                if clipped != segments {
                    log::warn!("trajectory of {} exceeds its appearance; clipped", node.id);
                    diagnostics.clipped.push(node.id.clone());
                }
                clipped
            }
            None => {
                diagnostics.stationary.push(node.id.clone());
                node.appearance
                    .iter()
                    .map(|a| PositionSegment::stationary(*a, Point::ORIGIN))
                    .collect()
            }
        };
        trajectories.insert(node.id.clone(), segments);
    }

    let graph = graph
        .with_trajectories(trajectories)
        .map_err(|source| ParseError::Invalid {
            element: invalid_element(&source),
            offset: 0,
            source,
        })?;
    Ok((graph, diagnostics))
}

fn invalid_element(err: &ModelError) -> String {
    match err {
        ModelError::OverlappingAppearance { element, .. }
        | ModelError::OverlappingSegments { element, .. }
        | ModelError::SegmentOutsideAppearance { element, .. }
        | ModelError::MovingInstant { element, .. }
        | ModelError::NonFinitePosition { element, .. } => element.clone(),
        other => other.to_string(),
    }
}

/// Pieces of each segment inside the appearance intervals. Pieces that shrink
/// to an instant are dropped unless the segment itself was instantaneous.
fn clip_to_appearance(segments: &[PositionSegment], appearance: &[Interval]) -> Vec<PositionSegment> {
    let mut out = Vec::with_capacity(segments.len());
    for seg in segments {
        for a in appearance {
            if let Some(piece) = seg.clip(a) {
                if piece.interval.length() > 0.0 || seg.interval.length() == 0.0 {
                    out.push(piece);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FallbackParams {
    /// Width of a layout bin in time units.
    pub bin_width: f64,
    /// Force iterations per bin.
    pub iterations: usize,
    pub seed: u64,
}

impl FallbackParams {
    const DEFAULT_BINS: f64 = 64.0;
    const MAX_BINS: f64 = 100_000.0;

    /// 64 bins over the graph's extent, 50 iterations per bin.
    pub fn for_graph(graph: &TemporalGraph, seed: u64) -> Self {
        let span = graph.extent().map_or(0.0, |e| e.length());
        FallbackParams {
            bin_width: if span > 0.0 { span / Self::DEFAULT_BINS } else { 1.0 },
            iterations: 50,
            seed,
        }
    }
}

/// Ideal edge length of the force model, in layout units.
const IDEAL: f64 = 1.0;
/// Pull toward the node's position at the end of the previous bin.
const CONTINUITY: f64 = 0.3;

/// Deterministic stand-in for an external space-time layout.
///
/// Time is cut into bins of `bin_width`. Within each bin the alive nodes are
/// relaxed by force-directed iterations: attraction along edges alive in the
/// bin, repulsion between all alive nodes, and a spring toward where each node
/// ended the previous bin. Anchors sit at bin boundaries and at the ends of
/// each appearance interval, joined by linear segments.
pub fn fallback_layout(graph: &TemporalGraph, params: &FallbackParams) -> TemporalGraph {
    let Some(extent) = graph.extent() else {
        return graph.clone();
    };
    let bin_width = if params.bin_width > 0.0 && params.bin_width.is_finite() {
        params.bin_width
    } else {
        extent.length().max(1.0)
    };
    let bins = (extent.length() / bin_width).ceil().clamp(1.0, FallbackParams::MAX_BINS) as usize;
    let bin_width = if bins as f64 * bin_width < extent.length() {
        extent.length() / bins as f64
    } else {
        bin_width
    };
    let boundary = |j: usize| {
        if j >= bins {
            extent.end()
        } else {
            extent.start() + j as f64 * bin_width
        }
    };

    let nodes: Vec<_> = graph.nodes().collect();
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let spread = (nodes.len() as f64).sqrt() * IDEAL;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut last: Vec<Option<Point>> = vec![None; nodes.len()];
    // Per node: (bin, position entering the bin, position leaving the bin).
    let mut history: Vec<Vec<(usize, Point, Point)>> = vec![Vec::new(); nodes.len()];

    for j in 0..bins {
        let bin = Interval::new(boundary(j), boundary(j + 1)).expect("boundaries increase");
        let alive: Vec<usize> = (0..nodes.len())
            .filter(|&i| nodes[i].appearance.iter().any(|a| a.overlaps(&bin)))
            .collect();
        if alive.is_empty() {
            continue;
        }
        let mut local = vec![usize::MAX; nodes.len()];
        for (k, &i) in alive.iter().enumerate() {
            local[i] = k;
        }
        let springs: Vec<(usize, usize)> = graph
            .edges()
            .filter(|e| e.appearance.iter().any(|a| a.overlaps(&bin)))
            .filter_map(|e| {
                let (s, t) = (local[index[e.source.as_str()]], local[index[e.target.as_str()]]);
                (s != usize::MAX && t != usize::MAX).then_some((s, t))
            })
            .collect();

        let entry: Vec<Point> = alive
            .iter()
            .map(|&i| {
                *last[i].get_or_insert_with(|| {
                    Point::new(
                        rng.random_range(-spread..=spread),
                        rng.random_range(-spread..=spread),
                    )
                })
            })
            .collect();
        let exit = relax(&entry, &springs, params.iterations, spread);
        for (k, &i) in alive.iter().enumerate() {
            history[i].push((j, entry[k], exit[k]));
            last[i] = Some(exit[k]);
        }
    }

    let bin_of = |t: Time| (((t - extent.start()) / bin_width).floor().max(0.0) as usize).min(bins - 1);
    let bin_ending_at = |t: Time| {
        let j = ((t - extent.start()) / bin_width).ceil() as isize - 1;
        (j.max(0) as usize).min(bins - 1)
    };

    let mut trajectories = BTreeMap::new();
    for (i, node) in nodes.iter().enumerate() {
        let lookup = |bin: usize, entering: bool| {
            let h = &history[i];
            let k = h.partition_point(|&(b, _, _)| b < bin).min(h.len() - 1);
            let (b, enter, leave) = h[k];
            if b == bin && entering {
                enter
            } else if b <= bin {
                leave
            } else {
                enter
            }
        };
        let mut segments = Vec::new();
        for a in &node.appearance {
            let mut times = vec![a.start()];
            let first_inner = ((a.start() - extent.start()) / bin_width).floor() as usize + 1;
            times.extend(
                (first_inner..bins)
                    .map(boundary)
                    .skip_while(|&t| t <= a.start())
                    .take_while(|&t| t < a.end()),
            );
            if a.end() > a.start() {
                times.push(a.end());
            }
            let positions: Vec<Point> = times
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    if k == 0 {
                        lookup(bin_of(t), true)
                    } else {
                        lookup(bin_ending_at(t), false)
                    }
                })
                .collect();
            if times.len() == 1 {
                segments.push(PositionSegment::stationary(*a, positions[0]));
            }
            for w in 0..times.len().saturating_sub(1) {
                let interval = Interval::new(times[w], times[w + 1]).expect("anchor times increase");
                segments.push(PositionSegment::new(interval, positions[w], positions[w + 1]));
            }
        }
        trajectories.insert(node.id.clone(), segments);
    }

    graph
        .with_trajectories(trajectories)
        .expect("fallback segments follow the appearance intervals")
}

/// Fruchterman-Reingold style relaxation with a continuity spring to `start`.
fn relax(start: &[Point], springs: &[(usize, usize)], iterations: usize, spread: f64) -> Vec<Point> {
    let n = start.len();
    let mut pos = start.to_vec();
    let mut disp = vec![(0.0, 0.0); n];
    let t0 = 0.1 * spread.max(IDEAL);
    for it in 0..iterations {
        let temperature = t0 * (1.0 - it as f64 / iterations as f64);
        disp.iter_mut().for_each(|d| *d = (0.0, 0.0));

        for a in 0..n {
            for b in a + 1..n {
                let (mut dx, mut dy) = (pos[a].x - pos[b].x, pos[a].y - pos[b].y);
                let mut d = dx.hypot(dy);
                if d < 1e-9 {
                    // Coincident nodes: separate along a fixed direction.
                    let angle = (a * 31 + b * 17) as f64;
                    (dx, dy, d) = (angle.cos() * 1e-3, angle.sin() * 1e-3, 1e-3);
                }
                let f = IDEAL * IDEAL / d;
                disp[a].0 += dx / d * f;
                disp[a].1 += dy / d * f;
                disp[b].0 -= dx / d * f;
                disp[b].1 -= dy / d * f;
            }
        }
        for &(a, b) in springs {
            let (dx, dy) = (pos[a].x - pos[b].x, pos[a].y - pos[b].y);
            let d = dx.hypot(dy);
            if d < 1e-12 {
                continue;
            }
            let f = d * d / IDEAL;
            disp[a].0 -= dx / d * f;
            disp[a].1 -= dy / d * f;
            disp[b].0 += dx / d * f;
            disp[b].1 += dy / d * f;
        }
        for k in 0..n {
            disp[k].0 -= CONTINUITY * (pos[k].x - start[k].x);
            disp[k].1 -= CONTINUITY * (pos[k].y - start[k].y);
            let len = disp[k].0.hypot(disp[k].1);
            if len > 0.0 {
                let step = len.min(temperature);
                pos[k].x += disp[k].0 / len * step;
                pos[k].y += disp[k].1 / len * step;
            }
        }
    }
    pos
}
