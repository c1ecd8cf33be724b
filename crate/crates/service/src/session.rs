use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use timelighting_core::{Interval, TemporalGraph};

/// Largest accepted `k`, grid side and bin count.
pub(crate) const MAX_SAMPLES: usize = 64;
pub(crate) const MAX_GRID: usize = 1024;
pub(crate) const MAX_BINS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewParams {
    pub samples_per_segment: usize,
    pub bandwidth: f64,
    pub width: usize,
    pub height: usize,
    pub timeline_bins: usize,
}

impl ViewParams {
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.samples_per_segment > MAX_SAMPLES {
            return Err(format!("samples_per_segment must be at most {MAX_SAMPLES}"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err("bandwidth must be positive".into());
        }
        if !(2..=MAX_GRID).contains(&self.width) || !(2..=MAX_GRID).contains(&self.height) {
            return Err(format!("grid dimensions must lie in 2..={MAX_GRID}"));
        }
        if !(1..=MAX_BINS).contains(&self.timeline_bins) {
            return Err(format!("timeline_bins must lie in 1..={MAX_BINS}"));
        }
        Ok(())
    }
}

/// Shared selection state of the frontend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    /// Bumped on every accepted update.
    pub version: u64,
    /// `None` only for a graph without any element.
    pub window: Option<Interval>,
    pub locked: BTreeSet<String>,
    pub view: ViewParams,
}

/// Body of `PUT /api/session`; absent fields are left unchanged.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionUpdate {
    pub window: Option<Interval>,
    pub locked: Option<Vec<String>>,
    pub view: Option<ViewParams>,
}

impl Session {
    pub(crate) fn apply(&mut self, graph: &TemporalGraph, update: SessionUpdate) -> Result<(), String> {
        if let Some(w) = update.window {
            match graph.extent() {
                Some(extent) if extent.contains_interval(&w) => {}
                Some(extent) => return Err(format!("window {w} is not inside the extent {extent}")),
                None => return Err("the graph is empty".into()),
            }
        }
        if let Some(ids) = &update.locked {
            if let Some(unknown) = ids.iter().find(|id| graph.node(id).is_none()) {
                return Err(format!("unknown node {unknown}"));
            }
        }
        if let Some(view) = &update.view {
            view.validate()?;
        }
        // validated as a whole; nothing changes on error
        if let Some(w) = update.window {
            self.window = Some(w);
        }
        if let Some(ids) = update.locked {
            self.locked = ids.into_iter().collect();
        }
        if let Some(view) = update.view {
            self.view = view;
        }
        self.version += 1;
        Ok(())
    }
}
