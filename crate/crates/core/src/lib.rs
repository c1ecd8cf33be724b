//! Engine for exploring temporal graphs laid out in the space-time cube
//! through 2D projections.
//!
//! Trajectories are sampled and aged so time reads as opacity, sampled
//! points feed an age-weighted density map, and simple analytics (mobility
//! ranking, interaction intervals of locked nodes, alive counts over time)
//! steer the analyst toward interesting nodes and times.

pub mod analytics;
pub mod density;
pub mod diagnostics;
pub mod ingest;
pub mod intervals;
pub mod model;
pub mod sampling;
pub mod synthetic;

pub use model::{Interval, Point, PositionSegment, TemporalEdge, TemporalGraph, TemporalNode, Time};
