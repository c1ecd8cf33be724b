//! Synthetic event streams shaped like a season of team mentions: twelve
//! teams, 3151 interactions, activity rising toward the end of the season.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{pair_edge_id, EventRecord, DAY};
use crate::model::{Interval, Point, PositionSegment, TemporalEdge, TemporalGraph, TemporalNode, Time};

pub const TEAMS: [&str; 12] = [
    "Benetton Treviso",
    "Cardiff Blues",
    "Connacht Rugby",
    "Edinburgh Rugby",
    "Glasgow Warriors",
    "Leinster Rugby",
    "Munster Rugby",
    "Newport Gwent Dragons",
    "Ospreys",
    "Scarlets",
    "Ulster Rugby",
    "Zebre",
];

pub const SEASON_EVENTS: usize = 3151;
/// 2014-09-01T00:00:00Z
pub const SEASON_START: Time = 1_409_529_600.0;
/// Days between the first and the last event.
pub const SEASON_DAYS: f64 = 416.0;

/// A full synthetic season. With 24-hour edges its extent spans 417 days.
pub fn season_events(seed: u64) -> Vec<EventRecord> {
    synthetic_events(&TEAMS, SEASON_EVENTS, SEASON_START, SEASON_DAYS * DAY, seed)
}

/// `count` events between random label pairs over `[start, start + span]`.
///
/// The first and last events sit exactly on the span's ends. Event density
/// grows linearly over the span for 70% of the events; the rest are uniform.
pub fn synthetic_events(
    labels: &[&str],
    count: usize,
    start: Time,
    span: f64,
    seed: u64,
) -> Vec<EventRecord> {
    assert!(labels.len() >= 2, "need at least two labels");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = |rng: &mut ChaCha8Rng| {
        let a = rng.random_range(0..labels.len());
        let mut b = rng.random_range(0..labels.len() - 1);
        if b >= a {
            b += 1;
        }
        (labels[a], labels[b])
    };
    let mut times: Vec<Time> = (0..count)
        .map(|i| match i {
            0 => 0.0,
            1 => 1.0,
            _ => {
                let u: f64 = rng.random();
                if rng.random_bool(0.7) {
                    u.sqrt()
                } else {
                    u
                }
            }
        })
        .map(|f| start + (f * span / 60.0).round() * 60.0)
        .collect();
    times.sort_by(f64::total_cmp);
    times
        .into_iter()
        .map(|t| {
            let (a, b) = pair(&mut rng);
            EventRecord::new(t, a, b).expect("distinct labels and finite times")
        })
        .collect()
}

/// Shape of a random graph from [`random_graph`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGraphParams {
    pub nodes: usize,
    pub edges: usize,
    /// Every time lies on the integer grid of `[0, horizon]`.
    pub horizon: u32,
    /// Coordinates are drawn from `[-spread, spread]`.
    pub spread: f64,
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        RandomGraphParams {
            nodes: 20,
            edges: 40,
            horizon: 1000,
            spread: 50.0,
        }
    }
}

/// Random valid graph with integer times and continuous trajectories.
///
/// Nodes get one or two appearance intervals covered by contiguous linear
/// segments, occasionally interrupted by a hold. Edges connect random pairs
/// with up to three disjoint intervals, some of them instantaneous.
pub fn random_graph(seed: u64, params: &RandomGraphParams) -> TemporalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = params.horizon.max(4);
    let point = |rng: &mut ChaCha8Rng| {
        Point::new(
            rng.random_range(-params.spread..=params.spread),
            rng.random_range(-params.spread..=params.spread),
        )
    };

    let mut nodes = Vec::with_capacity(params.nodes);
    for i in 0..params.nodes {
        let mut cuts: Vec<u32> = (0..if rng.random_bool(0.3) { 4 } else { 2 })
            .map(|_| rng.random_range(0..=h))
            .collect();
        cuts.sort_unstable();
        cuts.dedup();
        if cuts.len() % 2 == 1 {
            cuts.pop();
        }
        if cuts.len() < 2 {
            cuts = vec![0, h];
        }
        let appearance: Vec<Interval> = cuts
            .chunks(2)
            .map(|c| Interval::new(f64::from(c[0]), f64::from(c[1])).expect("sorted cuts"))
            .collect();

        let mut trajectory = Vec::new();
        let mut at = point(&mut rng);
        for a in &appearance {
            let (s, e) = (a.start() as u32, a.end() as u32);
            if s == e {
                trajectory.push(PositionSegment::stationary(*a, at));
                continue;
            }
            let mut knots: Vec<u32> = (0..rng.random_range(0..6)).map(|_| rng.random_range(s..=e)).collect();
            knots.extend([s, e]);
            knots.sort_unstable();
            knots.dedup();
            for w in knots.windows(2) {
                let interval = Interval::new(f64::from(w[0]), f64::from(w[1])).expect("sorted knots");
                if rng.random_bool(0.15) {
                    // hold: no segment, the node stays where it is
                    continue;
                }
                let next = point(&mut rng);
                trajectory.push(PositionSegment::new(interval, at, next));
                at = next;
            }
        }
        if trajectory.is_empty() {
            trajectory.push(PositionSegment::stationary(appearance[0], at));
        }
        nodes.push(TemporalNode {
            id: format!("n{i:03}"),
            label: format!("Node {i}"),
            appearance,
            trajectory,
        });
    }

    let mut edges: Vec<TemporalEdge> = Vec::new();
    if params.nodes >= 2 {
        for _ in 0..params.edges {
            let a = rng.random_range(0..params.nodes);
            let mut b = rng.random_range(0..params.nodes - 1);
            if b >= a {
                b += 1;
            }
            let id = pair_edge_id(&nodes[a].id, &nodes[b].id);
            if edges.iter().any(|e| e.id == id) {
                continue;
            }
            let mut cuts: Vec<u32> = (0..2 * rng.random_range(1..=3)).map(|_| rng.random_range(0..=h)).collect();
            cuts.sort_unstable();
            let mut appearance: Vec<Interval> = Vec::new();
            for c in cuts.chunks(2) {
                let (s, e) = (f64::from(c[0]), f64::from(c[1]));
                let e = if rng.random_bool(0.1) { s } else { e };
                if appearance.last().is_some_and(|l| s <= l.end()) {
                    continue;
                }
                appearance.push(Interval::new(s, e).expect("sorted cuts"));
            }
            edges.push(TemporalEdge {
                id,
                source: nodes[a].id.clone(),
                target: nodes[b].id.clone(),
                appearance,
            });
        }
    }
    TemporalGraph::new(nodes, edges).expect("generator respects the model invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn season_shape() {
        let events = season_events(1);
        assert_eq!(events.len(), SEASON_EVENTS);
        assert_eq!(events[0].timestamp, SEASON_START);
        assert_eq!(events.last().unwrap().timestamp, SEASON_START + SEASON_DAYS * DAY);
        let mut labels: Vec<&str> = events
            .iter()
            .flat_map(|e| [e.source.as_str(), e.target.as_str()])
            .collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 12);
        // busier second half
        let mid = SEASON_START + 0.5 * SEASON_DAYS * DAY;
        let late = events.iter().filter(|e| e.timestamp > mid).count();
        assert!(late > SEASON_EVENTS / 2);
        assert_eq!(season_events(1), events);
    }

    #[test]
    fn random_graphs_are_valid_and_reproducible() {
        for seed in 0..30 {
            let g = random_graph(seed, &RandomGraphParams::default());
            assert_eq!(g.node_count(), 20);
            assert_eq!(g, random_graph(seed, &RandomGraphParams::default()));
        }
    }
}
