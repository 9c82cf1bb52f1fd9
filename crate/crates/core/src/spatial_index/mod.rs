//! Bulk-loaded, query-only spatial indexing over 2-D bounding boxes and the
//! small set of planar predicates used for feature attribution.
//!
//! Coordinates are planar `(x, y)` pairs. Throughout the crate `x` is the
//! longitude and `y` the latitude, both in degrees, and distances are taken
//! directly in that degree space.

mod geometry;
mod strtree;

pub use geometry::{intersects, Geometry2D, Point2};
pub use strtree::{Bbox, StrTree, DEFAULT_NODE_CAPACITY};
