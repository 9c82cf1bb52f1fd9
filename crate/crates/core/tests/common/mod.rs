//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tds::spatial_index::{Bbox, Point2};
use tds::terrain::{ElevationMode, TerrainGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_boxes(rng: &mut ChaCha8Rng, n: usize) -> Vec<(Bbox, u64)> {
    (0..n as u64)
        .map(|id| {
            let x = rng.random_range(-100.0..100.0);
            let y = rng.random_range(-100.0..100.0);
            let w = rng.random_range(0.0..3.0);
            let h = rng.random_range(0.0..3.0);
            (Bbox::new(x, y, x + w, y + h).unwrap(), id)
        })
        .collect()
}

pub fn brute_query(items: &[(Bbox, u64)], q: &Bbox) -> Vec<u64> {
    let mut ids: Vec<u64> = items
        .iter()
        .filter(|(b, _)| b.min_x <= q.max_x && q.min_x <= b.max_x && b.min_y <= q.max_y && q.min_y <= b.max_y)
        .map(|(_, id)| *id)
        .collect();
    ids.sort_unstable();
    ids
}

/// Nearest box centroid in raw coordinate space; ties go to the smallest id.
pub fn brute_nearest(items: &[(Bbox, u64)], p: Point2) -> u64 {
    items
        .iter()
        .map(|(b, id)| {
            let (cx, cy) = ((b.min_x + b.max_x) / 2.0, (b.min_y + b.max_y) / 2.0);
            ((cx - p.x) * (cx - p.x) + (cy - p.y) * (cy - p.y), *id)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap()
        .1
}

/// Distance along `dir` from a point `height_above` over a horizontal plane.
pub fn plane_hit(height_above: f64, dir: &Vector3<f64>) -> Vector3<f64> {
    dir * (height_above / -dir.z)
}

/// True when the segment from `a` (ENU, meters, origin at `origin`) to `b`
/// stays above the bilinear surface except near `b`.
pub fn line_of_sight(
    grid: &TerrainGrid,
    plane: &tds::geolocate::LocalPlane,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
) -> bool {
    let len = (b - a).norm();
    let steps = (len / 0.25).ceil() as usize;
    (0..steps).all(|i| {
        let t = i as f64 / steps as f64;
        if len * (1.0 - t) < 0.5 {
            return true;
        }
        let p = a + (b - a) * t;
        let (lat, lon, alt) = plane.to_lat_lon_alt(&p);
        match grid.elevation_at(lat, lon, ElevationMode::Bilinear) {
            Ok(z) => alt > z + 1e-3,
            Err(_) => false,
        }
    })
}
