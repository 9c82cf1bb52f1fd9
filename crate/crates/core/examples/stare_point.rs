// Pointing the camera at a ground target and checking where the center
// pixel lands.
//
// ```bash
// cargo run -p tds --example stare_point
// ```

use tds::geodesy::{haversine_m, Datum, GeodeticPosition};
use tds::geolocate::{geolocate_pixel, VehicleState};
use tds::optics::{stare_solution, CameraModel, GimbalLimits, PixelCoord};
use tds::terrain::{synth_terrain, ElevationMode, GridSpec, SynthKind, SynthParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GridSpec::centered(36.2125, -96.007, 0.003, 1e-4, Datum::EllipsoidWgs84);
    let grid = synth_terrain(&SynthParams::new(SynthKind::Hill, spec))?;
    let (lat, lon) = (36.2131, -96.0068);
    let target = GeodeticPosition::wgs84(lat, lon, grid.elevation_at(lat, lon, ElevationMode::Bilinear)?)?;
    let drone = GeodeticPosition::wgs84(36.2118, -96.0079, 340.0)?;

    let cmd = stare_solution(&drone, &target, &GimbalLimits::default())?;
    println!(
        "yaw {:.3} deg, pitch {:.3} deg, reachable {}",
        cmd.vehicle_yaw_deg, cmd.gimbal_pitch_deg, cmd.reachable
    );
    let state = VehicleState::new(drone, cmd.gimbal_state()?);
    let camera = CameraModel::new(74.0, 1920, 1080)?;
    let hit = geolocate_pixel(&grid, &state, &camera, PixelCoord::new(960.0, 540.0))?
        .hit
        .ok_or("center ray missed")?;
    println!("center pixel lands {:.3} m from the target", haversine_m(&hit, &target));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
