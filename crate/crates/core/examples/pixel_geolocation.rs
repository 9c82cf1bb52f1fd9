// Locating a pixel and a detection box on the ground.
//
// ```bash
// cargo run -p tds --example pixel_geolocation
// ```

use tds::geodesy::{haversine_m, Datum, GeodeticPosition};
use tds::geolocate::{geolocate_detection, geolocate_pixel, PixelBox, VehicleState};
use tds::optics::{CameraModel, GimbalState, PixelCoord};
use tds::terrain::{GridSpec, TerrainGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ground = 180.9964812024639;
    let grid = TerrainGrid::flat(
        &GridSpec::centered(36.2125, -96.0076, 0.003, 1e-4, Datum::EllipsoidWgs84),
        ground,
    )?;
    let drone = GeodeticPosition::wgs84(36.212189, -96.006905, 195.0)?;
    let attitude = GimbalState::from_xyzw(0.056115267, -0.0154703723, 0.9608545, 0.27086953)?;
    let state = VehicleState::new(drone, attitude);
    let camera = CameraModel::new(74.0, 1920, 1080)?;

    let r = geolocate_pixel(&grid, &state, &camera, PixelCoord::new(960.0, 810.0))?;
    let hit = r.hit.ok_or("ray missed the terrain")?;
    let surveyed = GeodeticPosition::wgs84(36.21290054231726, -96.0083389306795, ground)?;
    println!(
        "pixel (960, 810) -> {hit}, {:.3} m from the surveyed point",
        haversine_m(&hit, &surveyed)
    );
    println!("ray length {:.2} m through {} half-cells", r.ray_length_m, r.iterations);

    let person = PixelBox::new(930.0, 760.0, 990.0, 860.0);
    let d = geolocate_detection(&grid, &state, &camera, &person)?;
    println!("detection box center -> {:?}", d.hit);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
