mod geodesy_frames {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/geodesy_frames.rs"));
}
mod spatial_queries {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spatial_queries.rs"));
}
mod terrain_model {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/terrain_model.rs"));
}
mod pixel_geolocation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pixel_geolocation.rs"));
}
mod stare_point {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/stare_point.rs"));
}
mod frame_calibration {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/frame_calibration.rs"));
}
mod error_propagation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/error_propagation.rs"));
}
mod collaborative_scenario {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/collaborative_scenario.rs"
    ));
}

#[test]
fn geodesy_frames_runs() {
    geodesy_frames::run_example().expect("geodesy example");
}

#[test]
fn spatial_queries_runs() {
    spatial_queries::run_example().expect("spatial index example");
}

#[test]
fn terrain_model_runs() {
    terrain_model::run_example().expect("terrain example");
}

#[test]
fn pixel_geolocation_runs() {
    pixel_geolocation::run_example().expect("geolocation example");
}

#[test]
fn stare_point_runs() {
    stare_point::run_example().expect("stare example");
}

#[test]
fn frame_calibration_runs() {
    frame_calibration::run_example().expect("calibration example");
}

#[test]
fn error_propagation_runs() {
    error_propagation::run_example().expect("uncertainty example");
}

#[test]
fn collaborative_scenario_runs() {
    collaborative_scenario::run_example().expect("scenario example");
}
