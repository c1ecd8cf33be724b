//! Age-weighted Gaussian kernel density over the projection plane.
//!
//! The engine produces the scalar grid only; iso-contours are extracted by
//! the client.

use base64::Engine;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::diagnostics::clamp_unit;
use crate::model::{Interval, Point, TemporalGraph};
use crate::sampling::{sample_graph, AgingScale};

/// Kernels are evaluated out to this many standard deviations.
pub const TRUNCATION: f64 = 4.0;
pub const DEFAULT_GRID: usize = 256;
/// Weight of the oldest point relative to the newest.
pub const DEFAULT_WEIGHT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("no points to estimate a density from")]
    NoPoints,
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("grid must be at least 2x2, got {width}x{height}")]
    GridTooSmall { width: usize, height: usize },
    #[error("grid bounds are degenerate")]
    InvalidBounds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPoint {
    pub position: Point,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// Bounding box of the points grown by `TRUNCATION * bandwidth` per side.
    pub fn padded(points: &[WeightedPoint], bandwidth: f64) -> Option<Bounds> {
        let first = points.first()?.position;
        let init = Bounds {
            x_min: first.x,
            x_max: first.x,
            y_min: first.y,
            y_max: first.y,
        };
        let b = points.iter().fold(init, |b, p| Bounds {
            x_min: b.x_min.min(p.position.x),
            x_max: b.x_max.max(p.position.x),
            y_min: b.y_min.min(p.position.y),
            y_max: b.y_max.max(p.position.y),
        });
        let pad = TRUNCATION * bandwidth;
        Some(Bounds {
            x_min: b.x_min - pad,
            x_max: b.x_max + pad,
            y_min: b.y_min - pad,
            y_max: b.y_max + pad,
        })
    }

    fn is_valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min
    }
}

/// Row-major density values over `width x height` cells spanning `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub bounds: Bounds,
    pub width: usize,
    pub height: usize,
    pub bandwidth: f64,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn cell_width(&self) -> f64 {
        (self.bounds.x_max - self.bounds.x_min) / self.width as f64
    }

    pub fn cell_height(&self) -> f64 {
        (self.bounds.y_max - self.bounds.y_min) / self.height as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_width() * self.cell_height()
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point {
        cell_center(&self.bounds, self.width, self.height, row, col)
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Integral of the density over the grid (midpoint rule).
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// Values as little-endian `f32`, row-major, base64-encoded.
    pub fn values_base64(&self) -> String {
        let bytes: Vec<u8> = self
            .values
            .iter()
            .flat_map(|&v| (v as f32).to_le_bytes())
            .collect();
        base64::engine::general_purpose::STANDARD.encode(bytes)
    }
}

fn cell_center(bounds: &Bounds, width: usize, height: usize, row: usize, col: usize) -> Point {
    let dx = (bounds.x_max - bounds.x_min) / width as f64;
    let dy = (bounds.y_max - bounds.y_min) / height as f64;
    Point::new(
        bounds.x_min + (col as f64 + 0.5) * dx,
        bounds.y_min + (row as f64 + 0.5) * dy,
    )
}

/// Density weight of a point with the given normalized age, on a linear
/// scale from `floor` (oldest) to 1 (newest).
pub fn age_weight_with_floor(norm_age: f64, floor: f64) -> f64 {
    floor + (1.0 - floor) * clamp_unit(norm_age)
}

/// [`age_weight_with_floor`] with the default floor of 0.05.
pub fn age_weight(norm_age: f64) -> f64 {
    age_weight_with_floor(norm_age, DEFAULT_WEIGHT_FLOOR)
}

/// KDE on a grid whose bounds pad the data by four bandwidths.
pub fn density_grid(
    points: &[WeightedPoint],
    bandwidth: f64,
    width: usize,
    height: usize,
) -> Result<DensityGrid, DensityError> {
    check_bandwidth(bandwidth)?;
    let bounds = Bounds::padded(points, bandwidth).ok_or(DensityError::NoPoints)?;
    density_grid_in(points, bandwidth, bounds, width, height)
}

fn check_bandwidth(bandwidth: f64) -> Result<(), DensityError> {
    if bandwidth > 0.0 && bandwidth.is_finite() {
        Ok(())
    } else {
        Err(DensityError::InvalidBandwidth(bandwidth))
    }
}

/// KDE on a caller-chosen grid.
///
/// Each cell holds `sum_i w_i * exp(-|c - p_i|^2 / (2 s^2)) / (2 pi s^2)`
/// with kernels cut off beyond `TRUNCATION * s` along either axis. Rows are
/// computed in parallel; within a cell, contributions are summed in point
/// order so the result is deterministic.
pub fn density_grid_in(
    points: &[WeightedPoint],
    bandwidth: f64,
    bounds: Bounds,
    width: usize,
    height: usize,
) -> Result<DensityGrid, DensityError> {
    check_bandwidth(bandwidth)?;
    if points.is_empty() {
        return Err(DensityError::NoPoints);
    }
    if width < 2 || height < 2 {
        return Err(DensityError::GridTooSmall { width, height });
    }
    if !bounds.is_valid() {
        return Err(DensityError::InvalidBounds);
    }

    let dx = (bounds.x_max - bounds.x_min) / width as f64;
    let dy = (bounds.y_max - bounds.y_min) / height as f64;
    let reach = TRUNCATION * bandwidth;
    let inv_two_var = 1.0 / (2.0 * bandwidth * bandwidth);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * bandwidth * bandwidth);

    // The Gaussian factorizes; precompute each kernel's column factors.
    struct Kernel {
        cols: std::ops::Range<usize>,
        rows: std::ops::Range<usize>,
        y: f64,
        scale: f64,
        x_factors: Vec<f64>,
    }
    let axis_range = |center: f64, min: f64, step: f64, n: usize| {
        let lo = ((center - reach - min) / step - 0.5).ceil().max(0.0);
        let hi = ((center + reach - min) / step - 0.5).floor() + 1.0;
        let hi = hi.clamp(0.0, n as f64) as usize;
        (lo as usize).min(hi)..hi
    };
    let kernels: Vec<Kernel> = points
        .iter()
        .filter(|p| p.weight > 0.0)
        .map(|p| {
            let cols = axis_range(p.position.x, bounds.x_min, dx, width);
            let rows = axis_range(p.position.y, bounds.y_min, dy, height);
            let x_factors = cols
                .clone()
                .map(|c| {
                    let d = bounds.x_min + (c as f64 + 0.5) * dx - p.position.x;
                    (-d * d * inv_two_var).exp()
                })
                .collect();
            Kernel {
                cols,
                rows,
                y: p.position.y,
                scale: p.weight * norm,
                x_factors,
            }
        })
        .collect();

    let mut values = vec![0.0; width * height];
    values
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(r, row)| {
            let cy = bounds.y_min + (r as f64 + 0.5) * dy;
            for k in kernels.iter().filter(|k| k.rows.contains(&r)) {
                let d = cy - k.y;
                let fy = k.scale * (-d * d * inv_two_var).exp();
                for (cell, fx) in row[k.cols.clone()].iter_mut().zip(&k.x_factors) {
                    *cell += fy * fx;
                }
            }
        });

    Ok(DensityGrid {
        bounds,
        width,
        height,
        bandwidth,
        values,
    })
}

/// Parameters of a windowed density request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    pub samples_per_segment: usize,
    pub bandwidth: f64,
    pub width: usize,
    pub height: usize,
    pub weight_floor: f64,
}

impl DensityParams {
    pub fn new(samples_per_segment: usize, bandwidth: f64) -> Self {
        DensityParams {
            samples_per_segment,
            bandwidth,
            width: DEFAULT_GRID,
            height: DEFAULT_GRID,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
        }
    }
}

/// Sampled points of every node visible in `window`, weighted by their
/// window-relative age.
pub fn weighted_points(
    graph: &TemporalGraph,
    window: &Interval,
    samples_per_segment: usize,
    weight_floor: f64,
) -> Vec<WeightedPoint> {
    sample_graph(graph, window, samples_per_segment, &AgingScale::default())
        .iter()
        .flat_map(|s| s.points.iter())
        .map(|p| WeightedPoint {
            position: p.position,
            weight: age_weight_with_floor(p.norm_age, weight_floor),
        })
        .collect()
}

/// Density of the graph's sampled trajectories inside `window`.
pub fn density_for_window(
    graph: &TemporalGraph,
    window: &Interval,
    params: &DensityParams,
) -> Result<DensityGrid, DensityError> {
    let points = weighted_points(graph, window, params.samples_per_segment, params.weight_floor);
    density_grid(&points, params.bandwidth, params.width, params.height)
}
