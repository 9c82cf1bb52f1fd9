// Building a terrain grid, saving it, and fusing a segmentation layer.
//
// ```bash
// cargo run -p tds --example terrain_model
// ```

use tds::geodesy::Datum;
use tds::terrain::{
    load_grid, merge_layers, save_grid, synth_terrain, ElevationMode, GridSpec, LandCoverClass, LandCoverRaster,
    SynthKind, SynthParams,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GridSpec::centered(36.2125, -96.007, 0.002, 1e-4, Datum::EllipsoidWgs84);
    let grid = synth_terrain(&SynthParams::new(SynthKind::Gully, spec))?;
    let (lo, hi) = grid.elevation_range();
    println!("{} x {} cells, elevation {lo:.2}..{hi:.2} m", grid.rows(), grid.cols());

    let (lat, lon) = (36.2127, -96.00703);
    println!(
        "at ({lat}, {lon}): nearest {:.3} m, bilinear {:.3} m",
        grid.elevation_at(lat, lon, ElevationMode::Nearest)?,
        grid.elevation_at(lat, lon, ElevationMode::Bilinear)?
    );
    println!("cell info: {:?}", grid.query_point(lat, lon)?);

    let dir = std::env::temp_dir().join(format!("tds-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("gully.json");
    save_grid(&grid, &path)?;
    let reloaded = load_grid(&path)?;
    println!("reloaded {} cells from {}", reloaded.cells().len(), path.display());
    std::fs::remove_dir_all(&dir)?;

    let mut cv = LandCoverRaster::filled(grid.rows(), grid.cols(), LandCoverClass::Background);
    cv.set(10, 10, LandCoverClass::Building);
    cv.set(12, 30, LandCoverClass::Waterway);
    let fused = merge_layers(&grid, &cv)?;
    println!(
        "building cell: {:?}; segmented water with no mapped water nearby: {:?}",
        fused.cell(10, 10).land_cover,
        fused.cell(12, 30).land_cover
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
