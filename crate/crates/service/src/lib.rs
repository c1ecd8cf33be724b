//! HTTP/JSON service and command line front end for the projection engine.

pub mod api;
pub mod cli;
pub mod schemas;
mod session;

pub use api::{router, AppState};
pub use session::{Session, SessionUpdate, ViewParams};
