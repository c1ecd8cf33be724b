//! Sweep-line algebra over sets of closed intervals.
//!
//! An interval set is represented canonically as a sorted list of pairwise
//! disjoint intervals (no two share even a single instant).

use crate::model::Interval;

/// Union of arbitrary intervals as a canonical set.
///
/// Intervals that intersect, including those touching at one instant, land
/// in the same output interval. The result does not depend on input order.
pub fn union(intervals: impl IntoIterator<Item = Interval>) -> Vec<Interval> {
    let mut sorted: Vec<Interval> = intervals.into_iter().collect();
    sorted.sort_by(|a, b| a.start().total_cmp(&b.start()).then(a.end().total_cmp(&b.end())));

    let mut out: Vec<Interval> = Vec::with_capacity(sorted.len());
    for next in sorted {
        match out.last_mut() {
            Some(cur) if next.start() <= cur.end() => *cur = cur.hull(&next),
            _ => out.push(next),
        }
    }
    out
}

/// Intersection of two canonical sets.
///
/// Single-instant contacts are kept as zero-length intervals.
pub fn intersect(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if let Some(common) = a[i].intersect(&b[j]) {
            out.push(common);
        }
        if a[i].end() < b[j].end() {
            i += 1;
        } else {
            j += 1;
        }
    }
    // Two zero-length pieces can only coincide if the inputs overlap, which
    // canonical sets exclude, so `out` is already canonical.
    out
}

/// Restricts a canonical set to `window`.
pub fn clip(set: &[Interval], window: &Interval) -> Vec<Interval> {
    set.iter().filter_map(|i| i.intersect(window)).collect()
}

/// Total measure of a canonical set.
pub fn measure(set: &[Interval]) -> f64 {
    set.iter().map(Interval::length).sum()
}
