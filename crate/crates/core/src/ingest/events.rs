//! Building temporal graphs from raw timestamped interactions.
//!
//! Every event becomes an edge appearance of fixed duration centered on
//! the event time. Appearances of the same node pair that intersect are
//! merged. A node is visible from its first event until the end of the data.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use thiserror::Error;

use crate::intervals;
use crate::model::{Interval, ModelError, TemporalEdge, TemporalGraph, TemporalNode, Time};

pub const DAY: f64 = 86_400.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no events to ingest")]
    NoEvents,
    #[error("edge duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("event at {timestamp} connects {label} to itself")]
    SelfInteraction { timestamp: Time, label: String },
    #[error("event timestamp {0} is not finite")]
    NonFiniteTimestamp(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One interaction between two labelled entities.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub timestamp: Time,
    pub source: String,
    pub target: String,
}

impl EventRecord {
    pub fn new(
        timestamp: Time,
        source: impl Into<String>,
        target: impl Into<String>,
    ) -> Result<Self, IngestError> {
        let (source, target) = (source.into(), target.into());
        if !timestamp.is_finite() {
            return Err(IngestError::NonFiniteTimestamp(timestamp));
        }
        if source == target {
            return Err(IngestError::SelfInteraction {
                timestamp,
                label: source,
            });
        }
        Ok(EventRecord {
            timestamp,
            source,
            target,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergePolicy {
    /// Merge appearances of the same pair whose expanded intervals intersect.
    #[default]
    OverlapMerge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeAppearance {
    /// From the node's first event to the end of the dataset.
    #[default]
    FirstEventToEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestConfig {
    pub edge_duration: f64,
    pub merge_policy: MergePolicy,
    pub node_appearance: NodeAppearance,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            edge_duration: DAY,
            merge_policy: MergePolicy::default(),
            node_appearance: NodeAppearance::default(),
        }
    }
}

impl IngestConfig {
    pub fn with_edge_duration(edge_duration: f64) -> Result<Self, IngestError> {
        let cfg = IngestConfig {
            edge_duration,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), IngestError> {
        if self.edge_duration > 0.0 && self.edge_duration.is_finite() {
            Ok(())
        } else {
            Err(IngestError::InvalidDuration(self.edge_duration))
        }
    }
}

/// `[t - d/2, t + d/2]` for an event at `t` and edge duration `d`.
pub fn expand_event(event: &EventRecord, cfg: &IngestConfig) -> Interval {
    let half = 0.5 * cfg.edge_duration;
    Interval::new(event.timestamp - half, event.timestamp + half)
        .expect("validated events and durations give ordered finite bounds")
}

/// Merges edge appearances into sorted, disjoint intervals. Intervals
/// connected through a chain of intersections end up together.
pub fn merge_edge_intervals(intervals: impl IntoIterator<Item = Interval>) -> Vec<Interval> {
    intervals::union(intervals)
}

/// Id of the edge between two labels, independent of their order.
pub fn pair_edge_id(a: &str, b: &str) -> String {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    format!("{lo}--{hi}")
}

/// Builds a graph without trajectories from raw events.
///
/// One node per distinct label and one edge per unordered label pair.
pub fn ingest_events(events: &[EventRecord], cfg: &IngestConfig) -> Result<TemporalGraph, IngestError> {
    cfg.validate()?;
    if events.is_empty() {
        return Err(IngestError::NoEvents);
    }

    let mut first_seen: BTreeMap<&str, Time> = BTreeMap::new();
    let mut per_pair: BTreeMap<(&str, &str), Vec<Interval>> = BTreeMap::new();
    for event in events {
        if event.source == event.target {
            return Err(IngestError::SelfInteraction {
                timestamp: event.timestamp,
                label: event.source.clone(),
            });
        }
        for label in [event.source.as_str(), event.target.as_str()] {
            first_seen
                .entry(label)
                .and_modify(|t| *t = t.min(event.timestamp))
                .or_insert(event.timestamp);
        }
        let key = if event.source <= event.target {
            (event.source.as_str(), event.target.as_str())
        } else {
            (event.target.as_str(), event.source.as_str())
        };
        per_pair.entry(key).or_default().push(expand_event(event, cfg));
    }

    let edges: Vec<TemporalEdge> = per_pair
        .into_iter()
        .map(|((a, b), raw)| TemporalEdge {
            id: pair_edge_id(a, b),
            source: a.to_owned(),
            target: b.to_owned(),
            appearance: merge_edge_intervals(raw),
        })
        .collect();
    let end = edges
        .iter()
        .filter_map(|e| e.appearance.last())
        .map(Interval::end)
        .fold(f64::NEG_INFINITY, f64::max);

    let nodes = first_seen
        .into_iter()
        .map(|(label, first)| {
            Ok(TemporalNode {
                id: label.to_owned(),
                label: label.to_owned(),
                appearance: vec![Interval::new(first, end)?],
                trajectory: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    Ok(TemporalGraph::new(nodes, edges)?)
}

/// Number of fixed-width slices needed to discretize `extent` at `resolution`.
///
/// This is what a timesliced representation would cost; an instantaneous
/// extent still needs one slice.
pub fn equivalent_timeslices(extent: &Interval, resolution: f64) -> u64 {
    let ratio = extent.length() / resolution;
    // Absorb rounding noise so an exact multiple is not pushed to the next slice.
    let slices = (ratio * (1.0 - 1e-12)).ceil();
    (slices as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TimeFormat {
    UnixSeconds,
    Iso8601,
}

/// Reads events from CSV with header `timestamp,source,target`.
///
/// Timestamps are either UNIX seconds or ISO-8601; the format is detected
/// from the first row and then required of every row.
pub fn read_events_csv(reader: impl Read) -> Result<Vec<EventRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected = ["timestamp", "source", "target"];
    if header.len() != 3 || header.iter().zip(expected).any(|(h, e)| !h.eq_ignore_ascii_case(e)) {
        return Err(IngestError::Row {
            line: 1,
            message: format!("expected header `timestamp,source,target`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut format = None;
    let mut events = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let row_err = |message: String| IngestError::Row { line, message };
        let raw_ts = &record[0];
        let fmt = *format.get_or_insert_with(|| {
            if raw_ts.parse::<f64>().is_ok() {
                TimeFormat::UnixSeconds
            } else {
                TimeFormat::Iso8601
            }
        });
        let timestamp = match fmt {
            TimeFormat::UnixSeconds => raw_ts
                .parse::<f64>()
                .map_err(|_| row_err(format!("`{raw_ts}` is not UNIX seconds")))?,
            TimeFormat::Iso8601 => parse_iso8601(raw_ts)
                .ok_or_else(|| row_err(format!("`{raw_ts}` is not an ISO-8601 timestamp")))?,
        };
        let event = EventRecord::new(timestamp, &record[1], &record[2])
            .map_err(|e| row_err(e.to_string()))?;
        events.push(event);
    }
    Ok(events)
}

/// Seconds since the UNIX epoch. Timestamps without offset are read as UTC.
fn parse_iso8601(s: &str) -> Option<f64> {
    let to_secs = |secs: i64, nanos: u32| secs as f64 + f64::from(nanos) * 1e-9;
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(to_secs(dt.timestamp(), dt.timestamp_subsec_nanos()));
    }
    for pattern in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, pattern) {
            let utc = dt.and_utc();
            return Some(to_secs(utc.timestamp(), utc.timestamp_subsec_nanos()));
        }
    }
    let date = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
    Some(date.and_hms_opt(0, 0, 0)?.and_utc().timestamp() as f64)
}
