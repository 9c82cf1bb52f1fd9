// Altitude bias and random sensor noise pushed through geolocation.
//
// ```bash
// cargo run -p tds --example error_propagation
// ```

use tds::geodesy::{Datum, GeodeticPosition};
use tds::geolocate::{geolocate_pixel, VehicleState};
use tds::optics::{stare_solution, CameraModel, GimbalLimits, PixelCoord};
use tds::terrain::{GridSpec, TerrainGrid};
use tds::uncertainty::{analytic_bias_error, monte_carlo_geolocation, Aim, NoiseModel, Scene};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for angle in [20.0, 45.0, 70.0] {
        println!(
            "3 m altitude bias at {angle} deg depression -> {:.3} m",
            analytic_bias_error(3.0, angle)?
        );
    }

    let grid = TerrainGrid::flat(
        &GridSpec::centered(36.2, -96.0, 0.004, 1e-4, Datum::EllipsoidWgs84),
        250.0,
    )?;
    let drone = GeodeticPosition::wgs84(36.1995, -96.0, 310.0)?;
    let aim = GeodeticPosition::wgs84(36.2, -96.0, 250.0)?;
    let state = VehicleState::new(
        drone,
        stare_solution(&drone, &aim, &GimbalLimits::default())?.gimbal_state()?,
    );
    let camera = CameraModel::new(74.0, 1920, 1080)?;
    let center = PixelCoord::new(960.0, 540.0);
    let truth = geolocate_pixel(&grid, &state, &camera, center)?
        .hit
        .ok_or("nominal ray missed")?;
    let scene = Scene {
        state,
        camera,
        aim: Aim::Pixel(center),
    };

    for preset in ["airborne-scatter", "field-plausibility", "high-hdop"] {
        let noise = NoiseModel::preset(preset)?;
        let stats = monte_carlo_geolocation(&grid, &scene, &truth, &noise, 2000, 42)?;
        println!(
            "{preset:>18}: mean {:.2} m, max {:.2} m, {} misses",
            stats.mean_haversine_m, stats.max_haversine_m, stats.miss_count
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
