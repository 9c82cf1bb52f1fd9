//! The shipped, tagged check suite fed into [`taxonomy_report`](super::taxonomy_report).

use nalgebra::Vector3;

use super::builtin::{collaborative_detection, lossy_broadcast, reordering, CollaborativeOptions};
use super::run::run_scenario;
use super::taxonomy::{Challenge, Complexity, TestLevel, TestOutcome, TestTag};
use crate::error::Result;
use crate::geodesy::{haversine_m, Datum, GeodeticPosition};
use crate::geolocate::{cast_ray, geolocate_detection, geolocate_pixel, LocalPlane, PixelBox, VehicleState};
use crate::optics::calibration::{calibrate_frames, reference_observation, CALIBRATION_TOLERANCE_M};
use crate::optics::{stare_solution, CameraModel, GimbalLimits, PixelCoord, LOCKED_CONVENTION};
use crate::terrain::{
    merge_layers, synth_terrain, ElevationMode, GridSpec, LandCoverClass, LandCoverRaster, Provenance, SynthKind,
    SynthParams, SynthSurface, TerrainGrid,
};
use crate::uncertainty::{analytic_bias_error, monte_carlo_geolocation, Aim, NoiseModel, Scene};

type Check = fn() -> Result<(bool, String)>;

pub struct SuiteCase {
    pub name: &'static str,
    pub tag: TestTag,
    pub check: Check,
}

const LAT: f64 = 36.2125;
const LON: f64 = -96.0070;

fn camera() -> CameraModel {
    CameraModel::new(74.0, 1920, 1080).expect("valid")
}

fn center() -> PixelCoord {
    PixelCoord::new(960.0, 540.0)
}

fn flat_grid(elev: f64) -> Result<TerrainGrid> {
    TerrainGrid::flat(&GridSpec::centered(LAT, LON, 0.003, 1e-4, Datum::EllipsoidWgs84), elev)
}

fn at(east: f64, north: f64, alt: f64) -> GeodeticPosition {
    let origin = GeodeticPosition::wgs84(LAT, LON, 0.0).expect("valid");
    let (lat, lon, _) = LocalPlane::at(&origin).to_lat_lon_alt(&Vector3::new(east, north, 0.0));
    GeodeticPosition::wgs84(lat, lon, alt).expect("valid")
}

fn looking_at(drone: GeodeticPosition, target: &GeodeticPosition) -> Result<VehicleState> {
    let cmd = stare_solution(&drone, target, &GimbalLimits::default())?;
    Ok(VehicleState::new(drone, cmd.gimbal_state()?))
}

fn reference_reproduced() -> Result<(bool, String)> {
    let report = calibrate_frames(&reference_observation())?;
    let chosen = report.selected()?;
    let residual = chosen.residual_m.unwrap_or(f64::INFINITY);
    Ok((
        chosen.convention == LOCKED_CONVENTION && residual <= CALIBRATION_TOLERANCE_M,
        format!("residual {residual:.4} m"),
    ))
}

fn ridge_occludes() -> Result<(bool, String)> {
    let params = SynthParams::new(
        SynthKind::Ridge,
        GridSpec::centered(LAT, LON, 0.003, 1e-4, Datum::EllipsoidWgs84),
    )
    .with_base(274.0)
    .with_magnitude(30.0)
    .with_width(40.0);
    let grid = synth_terrain(&params)?;
    let axis = SynthSurface::new(params)?.axis_lon();
    let drone = at(-100.0, 0.0, 284.0);
    let target = at(100.0, 0.0, 274.0);
    let r = cast_ray(
        &grid,
        &drone,
        &(LocalPlane::at(&drone).to_enu(target.lat(), target.lon(), target.alt())).normalize(),
    )?;
    let Some(hit) = r.hit else {
        return Ok((false, format!("{:?}", r.status)));
    };
    Ok((
        hit.lon() < axis && haversine_m(&hit, &target) > 50.0,
        format!("blocked {:.1} m short of target", haversine_m(&hit, &target)),
    ))
}

fn hill_hit_on_surface() -> Result<(bool, String)> {
    let grid = synth_terrain(&SynthParams::new(
        SynthKind::Hill,
        GridSpec::centered(LAT, LON, 0.003, 1e-4, Datum::EllipsoidWgs84),
    ))?;
    let takeoff = grid.elevation_at(LAT - 0.0025, LON, ElevationMode::Bilinear)?;
    let target_ground = grid.elevation_at(LAT + 0.0015, LON, ElevationMode::Bilinear)?;
    let target = GeodeticPosition::wgs84(LAT + 0.0015, LON, target_ground)?;
    let state = looking_at(GeodeticPosition::wgs84(LAT, LON, takeoff + 60.0)?, &target)?;
    let r = geolocate_pixel(&grid, &state, &camera(), center())?;
    let Some(hit) = r.hit else {
        return Ok((false, format!("{:?}", r.status)));
    };
    let surface = grid.elevation_at(hit.lat(), hit.lon(), ElevationMode::Bilinear)?;
    let on_surface = (hit.alt() - surface).abs() < 1e-3;
    let inconsistent = (hit.alt() - takeoff).abs() > 1.0;
    Ok((
        on_surface && inconsistent && haversine_m(&hit, &target) < 0.1,
        format!("hit {:.2} m above takeoff ground", hit.alt() - takeoff),
    ))
}

fn oblique_scene(grid: &TerrainGrid) -> Result<(Scene, GeodeticPosition)> {
    let target = at(0.0, 0.0, 274.0);
    let state = looking_at(at(-60.0, -60.0, 274.0 + 84.85), &target)?;
    let truth = geolocate_pixel(grid, &state, &camera(), center())?
        .hit
        .ok_or_else(|| crate::Error::invalid("nominal ray missed"))?;
    Ok((
        Scene {
            state,
            camera: camera(),
            aim: Aim::Pixel(center()),
        },
        truth,
    ))
}

fn hdop_inflates_error() -> Result<(bool, String)> {
    let grid = flat_grid(274.0)?;
    let (scene, truth) = oblique_scene(&grid)?;
    let base = NoiseModel {
        gps_sigma_h_m: 1.0,
        ..NoiseModel::zero()
    };
    let high = NoiseModel {
        hdop_scale: 3.0,
        ..base
    };
    let a = monte_carlo_geolocation(&grid, &scene, &truth, &base, 400, 11)?.mean_haversine_m;
    let b = monte_carlo_geolocation(&grid, &scene, &truth, &high, 400, 11)?.mean_haversine_m;
    Ok((b > 2.0 * a && a > 0.0, format!("mean {a:.3} m vs {b:.3} m")))
}

fn altitude_bias_law() -> Result<(bool, String)> {
    let grid = flat_grid(274.0)?;
    let (scene, truth) = oblique_scene(&grid)?;
    let noise = NoiseModel {
        altitude_bias_m: 3.0,
        ..NoiseModel::zero()
    };
    let st = monte_carlo_geolocation(&grid, &scene, &truth, &noise, 4, 1)?;
    let expected = analytic_bias_error(3.0, 45.0)?;
    let err = (st.mean_haversine_m - expected).abs();
    Ok((
        err <= 0.01 * expected,
        format!("{:.4} m vs {expected:.4} m", st.mean_haversine_m),
    ))
}

fn attitude_noise_spreads() -> Result<(bool, String)> {
    let grid = flat_grid(274.0)?;
    let (scene, truth) = oblique_scene(&grid)?;
    let quiet = monte_carlo_geolocation(&grid, &scene, &truth, &NoiseModel::zero(), 50, 3)?;
    let noisy = NoiseModel {
        attitude_sigma_deg: 0.5,
        ..NoiseModel::zero()
    };
    let st = monte_carlo_geolocation(&grid, &scene, &truth, &noisy, 200, 3)?;
    Ok((
        quiet.max_haversine_m == 0.0 && st.mean_haversine_m > 0.1,
        format!("mean {:.3} m", st.mean_haversine_m),
    ))
}

fn stare_centers_target() -> Result<(bool, String)> {
    let grid = flat_grid(274.0)?;
    let target = at(35.0, 80.0, 274.0);
    let state = looking_at(at(-20.0, -10.0, 330.0), &target)?;
    let hit = geolocate_pixel(&grid, &state, &camera(), center())?.hit;
    let d = hit.map_or(f64::INFINITY, |h| haversine_m(&h, &target));
    Ok((d <= 0.1, format!("{d:.2e} m")))
}

fn detection_box_center() -> Result<(bool, String)> {
    let grid = flat_grid(274.0)?;
    let (scene, _) = oblique_scene(&grid)?;
    let bbox = PixelBox::new(900.0, 700.0, 1000.0, 820.0);
    let a = geolocate_detection(&grid, &scene.state, &scene.camera, &bbox)?.hit;
    let b = geolocate_pixel(&grid, &scene.state, &scene.camera, PixelCoord::new(950.0, 760.0))?.hit;
    let outside = PixelBox::new(1900.0, 10.0, 1930.0, 20.0)
        .validate(&scene.camera)
        .is_err();
    Ok((a.is_some() && a == b && outside, "box center matches pixel".into()))
}

fn shaded_water_rejected() -> Result<(bool, String)> {
    let base = TerrainGrid::build(
        &GridSpec::new(40.0, -86.0, 40.0005, -85.9995, 1e-4, Datum::Amsl),
        |_, _| 250.0,
        |_, _| LandCoverClass::Grassland,
    )?;
    let mut cv = LandCoverRaster::filled(5, 5, LandCoverClass::Background);
    cv.set(1, 1, LandCoverClass::Waterway);
    cv.set(3, 3, LandCoverClass::Building);
    let m = merge_layers(&base, &cv)?;
    let ok = m.cell(1, 1).land_cover == LandCoverClass::Grassland
        && m.cell(3, 3).land_cover == LandCoverClass::Building
        && m.cell(3, 3).provenance == Provenance::CvSegmentation;
    Ok((ok, "water without base hydrography dropped".into()))
}

fn collaborative() -> Result<(bool, String)> {
    let r = run_scenario(&collaborative_detection(CollaborativeOptions::default())?, None)?;
    Ok((r.passed(), format!("{} assertions", r.assertions.len())))
}

fn total_loss() -> Result<(bool, String)> {
    let r = run_scenario(&lossy_broadcast(1.0, 3, 20)?, None)?;
    let bravo = r.agent("bravo").map_or(usize::MAX, |a| a.reorientations);
    Ok((
        r.bus.dropped == r.bus.sent && r.bus.delivered == 0 && bravo == 0,
        format!("{} of {} dropped", r.bus.dropped, r.bus.sent),
    ))
}

fn latest_timestamp_wins() -> Result<(bool, String)> {
    let r = run_scenario(&reordering(5)?, None)?;
    let newest = r
        .events
        .iter()
        .filter(|e| e.event == "receive")
        .filter_map(|e| e.observed_at_s)
        .fold(f64::NEG_INFINITY, f64::max);
    let kept = r.agent("bravo").and_then(|a| a.received_target).map(|(t, _)| t);
    Ok((
        r.bus.stale > 0 && kept == Some(newest),
        format!("{} stale deliveries ignored", r.bus.stale),
    ))
}

pub fn builtin_suite() -> Vec<SuiteCase> {
    use Challenge::*;
    use Complexity::*;
    use TestLevel::*;
    let case = |name, level, complexity, challenges: &[Challenge], check| SuiteCase {
        name,
        tag: TestTag::new(level, complexity, challenges),
        check,
    };
    vec![
        case(
            "reference_observation_reproduced",
            Unit,
            Simple,
            &[C3],
            reference_reproduced as Check,
        ),
        case(
            "ridge_occludes_line_of_sight",
            Integration,
            Moderate,
            &[C1],
            ridge_occludes,
        ),
        case(
            "hill_hit_lies_on_surface",
            Integration,
            Moderate,
            &[C1, C2],
            hill_hit_on_surface,
        ),
        case(
            "hdop_inflates_error",
            Integration,
            Moderate,
            &[C3, C4],
            hdop_inflates_error,
        ),
        case("altitude_bias_follows_law", Unit, Simple, &[C2, C4], altitude_bias_law),
        case(
            "attitude_noise_spreads_hits",
            Unit,
            Moderate,
            &[C5],
            attitude_noise_spreads,
        ),
        case("stare_centers_target", Unit, Simple, &[C5], stare_centers_target),
        case("detection_box_center", Unit, Simple, &[C6], detection_box_center),
        case("shaded_water_rejected", Unit, Edge, &[C6], shaded_water_rejected),
        case(
            "collaborative_detection",
            System,
            Moderate,
            &[C3, C6, C7],
            collaborative,
        ),
        case("total_message_loss", System, Edge, &[C7], total_loss),
        case("latest_timestamp_wins", Integration, Edge, &[C7], latest_timestamp_wins),
    ]
}

pub fn run_builtin_suite() -> Vec<TestOutcome> {
    builtin_suite()
        .into_iter()
        .map(|c| {
            let (passed, detail) = match (c.check)() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            TestOutcome {
                name: c.name.into(),
                tag: c.tag,
                passed,
                detail: Some(detail),
            }
        })
        .collect()
}
