//! Getting graphs in and out: canonical JSON documents, raw event lists,
//! and layouts.

mod events;
mod format;
mod layout;

pub use events::{
    equivalent_timeslices, expand_event, ingest_events, merge_edge_intervals, pair_edge_id,
    read_events_csv, EventRecord, IngestConfig, IngestError, MergePolicy, NodeAppearance, DAY,
};
pub use format::{parse_graph, parse_layout, serialize_graph, serialize_layout, LayoutDocument, ParseError};
pub use layout::{apply_layout, fallback_layout, import_layout, FallbackParams, LayoutDiagnostics};
