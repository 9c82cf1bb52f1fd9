//! Frame-convention calibration.
//!
//! A raw orientation quaternion means nothing without knowing its component
//! order, which way it rotates, how the camera is mounted in the body frame,
//! which world frame it targets and where pixel coordinates are sampled.
//! This harness tries every combination against a reference observation
//! with a known ground point, over flat terrain at the ground point's
//! height, and reports which combinations reproduce it.

use serde::Serialize;

use super::{
    pixel_to_camera_ray_with, Axis, CameraAxes, CameraModel, FrameConvention, PixelCoord, PixelOrigin, QuaternionOrder,
    RotationSense, WorldFrame,
};
use crate::error::{Error, Result};
use crate::geodesy::{haversine_m, GeodeticPosition};
use crate::geolocate::{cast_ray, HitStatus};
use crate::terrain::{GridSpec, TerrainGrid};

/// Horizontal acceptance radius for a candidate convention.
pub const CALIBRATION_TOLERANCE_M: f64 = 0.5;

/// A camera observation with a surveyed ground point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceObservation {
    pub drone: GeodeticPosition,
    pub camera: CameraModel,
    pub pixel: PixelCoord,
    /// Raw components in the order they were published.
    pub quaternion: [f64; 4],
    pub ground_point: GeodeticPosition,
}

/// The field unit-test observation used to lock the convention: a drone at
/// 195 m ellipsoid height looking slightly down towards the north-west.
pub fn reference_observation() -> ReferenceObservation {
    ReferenceObservation {
        drone: GeodeticPosition::wgs84(36.212189, -96.006905, 195.0).expect("valid"),
        camera: CameraModel::new(74.0, 1920, 1080).expect("valid"),
        pixel: PixelCoord::new(960.0, 810.0),
        quaternion: [0.056115267, -0.0154703723, 0.9608545, 0.27086953],
        ground_point: GeodeticPosition::wgs84(36.21290054231724, -96.00833893067946, 180.9964812024639).expect("valid"),
    }
}

impl ReferenceObservation {
    /// Flat terrain at the ground point's height covering drone and target.
    pub fn flat_terrain(&self) -> Result<TerrainGrid> {
        let lat = (self.drone.lat() + self.ground_point.lat()) / 2.0;
        let lon = (self.drone.lon() + self.ground_point.lon()) / 2.0;
        let spec = GridSpec::centered(lat, lon, 0.003, 1e-4, self.ground_point.datum());
        TerrainGrid::flat(&spec, self.ground_point.alt())
    }
}

/// Every convention considered: 2 quaternion orders x 2 rotation senses x
/// 24 right-handed camera mountings x 2 world frames x 2 pixel origins.
pub fn candidate_conventions() -> Vec<FrameConvention> {
    let mut out = Vec::new();
    for order in [QuaternionOrder::ScalarLast, QuaternionOrder::ScalarFirst] {
        for sense in [RotationSense::BodyToWorld, RotationSense::WorldToBody] {
            for forward in Axis::ALL {
                for right in Axis::ALL {
                    if forward.vector().dot(&right.vector()) != 0.0 {
                        continue;
                    }
                    for world in [WorldFrame::Enu, WorldFrame::Ned] {
                        for pixel_origin in [PixelOrigin::Corner, PixelOrigin::HalfPixel] {
                            out.push(FrameConvention {
                                order,
                                sense,
                                axes: CameraAxes { forward, right },
                                world,
                                pixel_origin,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateOutcome {
    pub convention: FrameConvention,
    pub status: HitStatus,
    /// Horizontal distance from the ground point, when the ray hit.
    pub residual_m: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub tolerance_m: f64,
    pub candidates: Vec<CandidateOutcome>,
}

impl CalibrationReport {
    pub fn accepted(&self) -> Vec<&CandidateOutcome> {
        self.candidates.iter().filter(|c| c.accepted).collect()
    }

    /// The unique accepted convention; zero or several is an error.
    pub fn selected(&self) -> Result<&CandidateOutcome> {
        let accepted = self.accepted();
        match accepted.as_slice() {
            [one] => Ok(one),
            other => Err(Error::Validation(format!(
                "frame calibration is ambiguous: {} conventions within {} m",
                other.len(),
                self.tolerance_m
            ))),
        }
    }
}

pub fn calibrate_frames(obs: &ReferenceObservation) -> Result<CalibrationReport> {
    let grid = obs.flat_terrain()?;
    let mut candidates = Vec::new();
    for convention in candidate_conventions() {
        let ray = pixel_to_camera_ray_with(&obs.camera, obs.pixel, convention.pixel_origin)?;
        let dir = convention.optical_to_enu(obs.quaternion, &ray)?.normalize();
        let r = cast_ray(&grid, &obs.drone, &dir)?;
        let residual_m = r.hit.map(|h| haversine_m(&h, &obs.ground_point));
        candidates.push(CandidateOutcome {
            convention,
            status: r.status,
            residual_m,
            accepted: residual_m.is_some_and(|d| d <= CALIBRATION_TOLERANCE_M),
        });
    }
    Ok(CalibrationReport {
        tolerance_m: CALIBRATION_TOLERANCE_M,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::LOCKED_CONVENTION;

    #[test]
    fn enumerates_all_candidates() {
        let c = candidate_conventions();
        assert_eq!(c.len(), 2 * 2 * 24 * 2 * 2);
        assert!(c.contains(&LOCKED_CONVENTION));
    }

    #[test]
    fn calibration_selects_locked_convention() {
        let report = calibrate_frames(&reference_observation()).unwrap();
        let chosen = report.selected().unwrap();
        assert_eq!(chosen.convention, LOCKED_CONVENTION);
        assert!(chosen.residual_m.unwrap() < 0.05);
    }

    #[test]
    fn half_pixel_variant_misses_tolerance() {
        let report = calibrate_frames(&reference_observation()).unwrap();
        let half = FrameConvention {
            pixel_origin: PixelOrigin::HalfPixel,
            ..LOCKED_CONVENTION
        };
        let outcome = report.candidates.iter().find(|c| c.convention == half).unwrap();
        assert!(!outcome.accepted);
        assert!(outcome.residual_m.unwrap() > CALIBRATION_TOLERANCE_M);
    }
}
