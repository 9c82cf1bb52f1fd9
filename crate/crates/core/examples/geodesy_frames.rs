// Converting between geodetic, Earth-centered and local tangent frames.
//
// ```bash
// cargo run -p tds --example geodesy_frames
// ```

use nalgebra::Vector3;
use tds::geodesy::{datum_convert, ecef_to_lla, haversine_m, lla_to_ecef, Datum, GeodeticPosition, TangentFrame};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let home = GeodeticPosition::wgs84(36.212189, -96.006905, 195.0)?;
    let ecef = lla_to_ecef(&home)?;
    println!("{home} -> ECEF {:.3?}", ecef.0.as_slice());
    let back = ecef_to_lla(&ecef)?;
    println!("roundtrip latitude error {:.2e} deg", (back.lat() - home.lat()).abs());

    let frame = TangentFrame::at(home)?;
    let point = frame.from_enu(&Vector3::new(-120.0, 80.0, -14.0))?;
    println!("120 m west, 80 m north, 14 m down: {point}");
    println!("great-circle distance {:.3} m", haversine_m(&home, &point));

    let msl = datum_convert(&home, -28.5, Datum::Amsl)?;
    println!("same point above mean sea level: {:.2} m", msl.alt());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
