// Testing every quaternion and camera-axis convention against a surveyed
// observation.
//
// ```bash
// cargo run -p tds --example frame_calibration
// ```

use tds::optics::calibration::{calibrate_frames, reference_observation};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let report = calibrate_frames(&reference_observation())?;
    let mut ranked: Vec<_> = report.candidates.iter().filter(|c| c.residual_m.is_some()).collect();
    ranked.sort_by(|a, b| a.residual_m.partial_cmp(&b.residual_m).unwrap());
    println!(
        "{} conventions tried, {} hit the ground",
        report.candidates.len(),
        ranked.len()
    );
    for c in ranked.iter().take(4) {
        println!(
            "{:>9.3} m  accepted={}  {:?}",
            c.residual_m.unwrap(),
            c.accepted,
            c.convention
        );
    }
    let chosen = report.selected()?;
    println!("selected: {:?}", chosen.convention);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
