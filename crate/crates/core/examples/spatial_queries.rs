// Bulk-loading an STR-tree and querying it.
//
// ```bash
// cargo run -p tds --example spatial_queries
// ```

use tds::spatial_index::{intersects, Bbox, Geometry2D, Point2, StrTree, DEFAULT_NODE_CAPACITY};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // A 50 x 50 lattice of 1e-4 degree cells.
    let mut items = Vec::new();
    for r in 0..50 {
        for c in 0..50 {
            let (lat, lon) = (36.2 + r as f64 * 1e-4, -96.0 + c as f64 * 1e-4);
            items.push((Bbox::new(lon, lat, lon + 1e-4, lat + 1e-4)?, (r * 50 + c) as u64));
        }
    }
    let tree = StrTree::build(items, DEFAULT_NODE_CAPACITY)?;
    println!("{} cells, height {}", tree.len(), tree.height());

    let window = Bbox::new(-95.9990, 36.2010, -95.9985, 36.2012)?;
    println!("window touches cells {:?}", tree.query_bbox(&window));
    println!(
        "nearest cell to the query point: {}",
        tree.nearest(Point2::from_lat_lon(36.20234, -95.99871))
    );

    let road = Geometry2D::polyline(vec![Point2::new(-96.0, 36.2), Point2::new(-95.995, 36.205)])?;
    let cell = Geometry2D::rectangle(&Bbox::new(-95.9975, 36.2024, -95.9974, 36.2025)?)?;
    println!("road crosses cell: {}", intersects(&road, &cell)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
