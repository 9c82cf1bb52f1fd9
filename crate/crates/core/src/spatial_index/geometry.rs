use serde::{Deserialize, Serialize};

use super::Bbox;
use crate::error::{Error, Result};

/// Planar point; `x` is longitude and `y` latitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_lat_lon(lat: f64, lon: f64) -> Self {
        Self { x: lon, y: lat }
    }
}

/// Point, polyline or simple polygon. Polygons store their ring without the
/// repeated closing vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeoJsonGeometry", into = "GeoJsonGeometry")]
pub enum Geometry2D {
    Point(Point2),
    Polyline(Vec<Point2>),
    Polygon(Vec<Point2>),
}

/// GeoJSON-style coordinates, `[lon, lat]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(tag = "type", content = "coordinates")]
enum GeoJsonGeometry {
    Point([f64; 2]),
    LineString(Vec<[f64; 2]>),
    Polygon(Vec<Vec<[f64; 2]>>),
}

impl TryFrom<GeoJsonGeometry> for Geometry2D {
    type Error = Error;

    fn try_from(g: GeoJsonGeometry) -> Result<Self> {
        let pts = |v: Vec<[f64; 2]>| v.into_iter().map(|[x, y]| Point2::new(x, y)).collect::<Vec<_>>();
        match g {
            GeoJsonGeometry::Point([x, y]) => Geometry2D::point(Point2::new(x, y)),
            GeoJsonGeometry::LineString(v) => Geometry2D::polyline(pts(v)),
            GeoJsonGeometry::Polygon(mut rings) => {
                if rings.len() != 1 {
                    return Err(Error::DegenerateGeometry(format!(
                        "polygons must have exactly one ring, found {}",
                        rings.len()
                    )));
                }
                Geometry2D::polygon(pts(rings.remove(0)))
            }
        }
    }
}

impl From<Geometry2D> for GeoJsonGeometry {
    fn from(g: Geometry2D) -> Self {
        let pair = |p: &Point2| [p.x, p.y];
        match g {
            Geometry2D::Point(p) => GeoJsonGeometry::Point(pair(&p)),
            Geometry2D::Polyline(v) => GeoJsonGeometry::LineString(v.iter().map(pair).collect()),
            Geometry2D::Polygon(v) => {
                let mut ring: Vec<[f64; 2]> = v.iter().map(pair).collect();
                ring.push(ring[0]);
                GeoJsonGeometry::Polygon(vec![ring])
            }
        }
    }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn within_span(p: Point2, a: Point2, b: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    orient(a, b, p) == 0.0 && within_span(p, a, b)
}

/// Closed-segment intersection by orientation tests.
fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && within_span(p1, q1, q2))
        || (d2 == 0.0 && within_span(p2, q1, q2))
        || (d3 == 0.0 && within_span(q1, p1, p2))
        || (d4 == 0.0 && within_span(q2, p1, p2))
}

fn ring_edges(ring: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    ring.iter().zip(ring.iter().cycle().skip(1)).map(|(a, b)| (*a, *b))
}

fn path_edges(path: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    path.windows(2).map(|w| (w[0], w[1]))
}

/// Even-odd containment; points on the boundary count as inside.
fn point_in_polygon(p: Point2, ring: &[Point2]) -> bool {
    let mut inside = false;
    for (a, b) in ring_edges(ring) {
        if on_segment(p, a, b) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn signed_area(ring: &[Point2]) -> f64 {
    ring_edges(ring).map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>() * 0.5
}

fn check_finite(points: &[Point2]) -> Result<()> {
    if points.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
        Ok(())
    } else {
        Err(Error::DegenerateGeometry("non-finite coordinate".into()))
    }
}

impl Geometry2D {
    pub fn point(p: Point2) -> Result<Self> {
        check_finite(&[p])?;
        Ok(Geometry2D::Point(p))
    }

    pub fn polyline(points: Vec<Point2>) -> Result<Self> {
        check_finite(&points)?;
        if points.len() < 2 {
            return Err(Error::DegenerateGeometry("polyline needs at least two vertices".into()));
        }
        Ok(Geometry2D::Polyline(points))
    }

    /// Builds a simple polygon. A repeated closing vertex is accepted and
    /// dropped.
    pub fn polygon(mut ring: Vec<Point2>) -> Result<Self> {
        check_finite(&ring)?;
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(Error::DegenerateGeometry(
                "polygon needs at least three vertices".into(),
            ));
        }
        if signed_area(&ring) == 0.0 {
            return Err(Error::DegenerateGeometry("polygon has zero area".into()));
        }
        let n = ring.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a1, a2) = (ring[i], ring[(i + 1) % n]);
                let (b1, b2) = (ring[j], ring[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return Err(Error::DegenerateGeometry(format!(
                        "polygon edges {i} and {j} cross; ring is not simple"
                    )));
                }
            }
        }
        Ok(Geometry2D::Polygon(ring))
    }

    /// Axis-aligned rectangle as a counter-clockwise polygon.
    pub fn rectangle(b: &Bbox) -> Result<Self> {
        Self::polygon(vec![
            Point2::new(b.min_x, b.min_y),
            Point2::new(b.max_x, b.min_y),
            Point2::new(b.max_x, b.max_y),
            Point2::new(b.min_x, b.max_y),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        match self {
            Geometry2D::Point(p) => std::slice::from_ref(p),
            Geometry2D::Polyline(v) | Geometry2D::Polygon(v) => v,
        }
    }

    pub fn bbox(&self) -> Bbox {
        Bbox::from_points(self.vertices())
    }

    fn check_usable(&self) -> Result<()> {
        match self {
            Geometry2D::Point(_) => Ok(()),
            Geometry2D::Polyline(v) if v.len() >= 2 => Ok(()),
            Geometry2D::Polygon(v) if v.len() >= 3 && signed_area(v) != 0.0 => Ok(()),
            _ => Err(Error::DegenerateGeometry("geometry is degenerate".into())),
        }
    }
}

/// True when the geometries share at least one point. Boundary contact
/// counts as intersecting.
pub fn intersects(a: &Geometry2D, b: &Geometry2D) -> Result<bool> {
    use Geometry2D::*;

    a.check_usable()?;
    b.check_usable()?;
    if !a.bbox().intersects(&b.bbox()) {
        return Ok(false);
    }

    let hit = match (a, b) {
        (Point(p), Point(q)) => p == q,
        (Point(p), Polyline(l)) | (Polyline(l), Point(p)) => path_edges(l).any(|(s, e)| on_segment(*p, s, e)),
        (Point(p), Polygon(r)) | (Polygon(r), Point(p)) => point_in_polygon(*p, r),
        (Polyline(l1), Polyline(l2)) => {
            path_edges(l1).any(|(a1, a2)| path_edges(l2).any(|(b1, b2)| segments_intersect(a1, a2, b1, b2)))
        }
        (Polyline(l), Polygon(r)) | (Polygon(r), Polyline(l)) => {
            l.iter().any(|p| point_in_polygon(*p, r))
                || path_edges(l).any(|(a1, a2)| ring_edges(r).any(|(b1, b2)| segments_intersect(a1, a2, b1, b2)))
        }
        (Polygon(r1), Polygon(r2)) => {
            ring_edges(r1).any(|(a1, a2)| ring_edges(r2).any(|(b1, b2)| segments_intersect(a1, a2, b1, b2)))
                || point_in_polygon(r1[0], r2)
                || point_in_polygon(r2[0], r1)
        }
    };
    Ok(hit)
}
