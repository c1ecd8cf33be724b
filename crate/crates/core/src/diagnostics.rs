//! Process-wide counters for inputs the engine had to repair.

use std::sync::atomic::{AtomicU64, Ordering};

static CLAMPED: AtomicU64 = AtomicU64::new(0);

/// Number of normalized ages that were outside `[0, 1]` and got clamped.
pub fn clamped_inputs() -> u64 {
    CLAMPED.load(Ordering::Relaxed)
}

/// Clamps into `[0, 1]`, counting every repair. NaN maps to 0.
pub(crate) fn clamp_unit(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        return x;
    }
    CLAMPED.fetch_add(1, Ordering::Relaxed);
    if x > 1.0 {
        1.0
    } else {
        0.0
    }
}
