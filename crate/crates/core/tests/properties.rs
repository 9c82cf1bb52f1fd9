mod common;

use nalgebra::Vector3;
use proptest::prelude::*;
use tds::geodesy::{ecef_to_lla, haversine_m, lla_to_ecef, GeodeticPosition, TangentFrame};
use tds::spatial_index::{Bbox, Point2, StrTree};

fn boxes() -> impl Strategy<Value = Vec<(Bbox, u64)>> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64, 0.0..4.0f64, 0.0..4.0f64), 1..300).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (x, y, w, h))| (Bbox::new(x, y, x + w, y + h).unwrap(), i as u64))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ecef_roundtrip(lat in -89.9..89.9f64, lon in -180.0..180.0f64, alt in -400.0..9000.0f64) {
        let p = GeodeticPosition::wgs84(lat, lon, alt).unwrap();
        let q = ecef_to_lla(&lla_to_ecef(&p).unwrap()).unwrap();
        prop_assert!((q.lat() - lat).abs() < 1e-9);
        prop_assert!((q.lon() - lon).abs() < 1e-9);
        prop_assert!((q.alt() - alt).abs() < 1e-5);
    }

    #[test]
    fn enu_roundtrip(
        lat in -80.0..80.0f64,
        lon in -180.0..180.0f64,
        e in -2000.0..2000.0f64,
        n in -2000.0..2000.0f64,
        u in -300.0..300.0f64,
    ) {
        let frame = TangentFrame::at(GeodeticPosition::wgs84(lat, lon, 100.0).unwrap()).unwrap();
        let v = Vector3::new(e, n, u);
        let back = frame.to_enu(&frame.from_enu(&v).unwrap()).unwrap();
        prop_assert!((back - v).norm() < 1e-6);
    }

    #[test]
    fn haversine_is_symmetric_and_bounded(
        a in (-85.0..85.0f64, -180.0..180.0f64),
        b in (-85.0..85.0f64, -180.0..180.0f64),
    ) {
        let p = GeodeticPosition::wgs84(a.0, a.1, 0.0).unwrap();
        let q = GeodeticPosition::wgs84(b.0, b.1, 0.0).unwrap();
        let d = haversine_m(&p, &q);
        prop_assert_eq!(d, haversine_m(&q, &p));
        prop_assert!((0.0..=std::f64::consts::PI * 6_371_008.8 + 1e-6).contains(&d));
    }

    #[test]
    fn str_query_matches_brute_force(
        items in boxes(),
        q in (-60.0..60.0f64, -60.0..60.0f64, 0.0..20.0f64, 0.0..20.0f64),
        capacity in 2usize..16,
    ) {
        let tree = StrTree::build(items.clone(), capacity).unwrap();
        let window = Bbox::new(q.0, q.1, q.0 + q.2, q.1 + q.3).unwrap();
        prop_assert_eq!(tree.query_bbox(&window), common::brute_query(&items, &window));
    }

    #[test]
    fn str_nearest_matches_brute_force(items in boxes(), x in -60.0..60.0f64, y in -60.0..60.0f64) {
        let tree = StrTree::build(items.clone(), 8).unwrap();
        let p = Point2::new(x, y);
        prop_assert_eq!(tree.nearest(p), common::brute_nearest(&items, p));
    }
}

#[test]
fn str_nearest_breaks_ties_by_id() {
    let b = Bbox::new(0.0, 0.0, 1.0, 1.0).unwrap();
    let items = vec![(b, 9), (b, 3), (b, 7)];
    let tree = StrTree::build(items, 2).unwrap();
    assert_eq!(tree.nearest(Point2::new(0.5, 0.5)), 3);
}
