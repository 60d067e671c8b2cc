//! Pixel-space geometry shared by every stage.
//!
//! Coordinates are `f64` pixels with x to the right and y downwards. A pixel
//! at `(row, col)` covers the unit square `[col, col + 1) x [row, row + 1)`
//! and its center sits at `(col + 0.5, row + 0.5)`.
//!
//! Polygons are normalized on construction so that their shoelace signed
//! area is positive; every algorithm in this module relies on that winding.

mod clip;
mod grid;
mod hull;
mod offset;
mod polygon;
mod raster;
mod rect;

pub use clip::{clip_to_bounds, polygon_intersection_area, polygon_iou, triangulate};
pub use grid::{BinaryMap, Grid, LabelMap, ScoreMap};
pub use hull::convex_hull;
pub use offset::polygon_offset;
pub use polygon::{polygon_area, Point, Polygon};
pub use raster::{for_each_pixel_inside, simplify_closed};
pub use rect::{min_area_rect, RotatedBox};

use thiserror::Error;

/// Tolerance for point equality and degeneracy tests, in pixels.
pub const EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("degenerate geometry: {0}")]
    Degenerate(&'static str),
    #[error("polygon is self-intersecting")]
    SelfIntersecting,
    #[error("union area is zero")]
    ZeroUnion,
    #[error("grid shape error: {0}")]
    Shape(String),
}
