//! Pinhole camera rays, gimbal orientation and the inverse stare-point
//! solution.
//!
//! # Frame convention
//!
//! The orientation quaternion rotates vectors from the camera *body* frame
//! into the local East-North-Up frame. Quaternion components are given in
//! `(x, y, z, w)` order (scalar last). The body frame is forward-left-up:
//! `+X` along the optical axis, `+Y` to the left of the image, `+Z` towards
//! the top of the image. Pixel coordinates have their origin at the top-left
//! corner of the image with `y` growing downwards, and the optical axis
//! passes through `(W/2, H/2)`; pixel `(x, y)` is sampled at exactly that
//! coordinate, with no half-pixel shift.
//!
//! This convention is not guessed: [`calibration::calibrate_frames`]
//! enumerates every candidate (component order, rotation sense, camera axis
//! assignment, world frame, pixel origin) against a reference geolocation
//! and exactly one candidate reproduces it. That candidate is
//! [`LOCKED_CONVENTION`].
//!
//! With the identity orientation the camera looks due East, level.

pub mod calibration;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{Datum, GeodeticPosition, TangentFrame};

/// Tolerance on `|q| - 1` for externally supplied quaternions.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fov_h_deg: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl CameraModel {
    pub fn new(fov_h_deg: f64, width_px: u32, height_px: u32) -> Result<Self> {
        if !(fov_h_deg > 0.0 && fov_h_deg < 180.0) {
            return Err(Error::invalid(format!("horizontal FOV {fov_h_deg} outside (0, 180)")));
        }
        if width_px == 0 || height_px == 0 {
            return Err(Error::invalid("image resolution must be positive"));
        }
        Ok(Self {
            fov_h_deg,
            width_px,
            height_px,
        })
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        (self.width_px as f64 / 2.0) / (self.fov_h_deg.to_radians() / 2.0).tan()
    }

    /// Vertical FOV derived from the pinhole aspect ratio.
    pub fn fov_v_deg(&self) -> f64 {
        2.0 * ((self.height_px as f64 / 2.0) / self.focal_px()).atan().to_degrees()
    }

    pub fn center(&self) -> PixelCoord {
        PixelCoord::new(self.width_px as f64 / 2.0, self.height_px as f64 / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelCoord {
    pub x: f64,
    pub y: f64,
}

impl PixelCoord {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Where a pixel index is sampled relative to the pixel grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PixelOrigin {
    /// `(x, y)` is used as is.
    Corner,
    /// `(x + 0.5, y + 0.5)`.
    HalfPixel,
}

impl PixelOrigin {
    fn offset(self) -> f64 {
        match self {
            PixelOrigin::Corner => 0.0,
            PixelOrigin::HalfPixel => 0.5,
        }
    }
}

/// Unit ray in the optical frame (`+X` right, `+Y` down, `+Z` forward) using
/// the locked pixel origin.
pub fn pixel_to_camera_ray(cam: &CameraModel, px: PixelCoord) -> Result<Vector3<f64>> {
    pixel_to_camera_ray_with(cam, px, LOCKED_CONVENTION.pixel_origin)
}

pub fn pixel_to_camera_ray_with(cam: &CameraModel, px: PixelCoord, origin: PixelOrigin) -> Result<Vector3<f64>> {
    let (w, h) = (cam.width_px as f64, cam.height_px as f64);
    if !(px.x >= 0.0 && px.x < w && px.y >= 0.0 && px.y < h) {
        return Err(Error::invalid(format!(
            "pixel ({}, {}) outside {}x{} frame",
            px.x, px.y, cam.width_px, cam.height_px
        )));
    }
    let f = cam.focal_px();
    let o = origin.offset();
    Ok(Vector3::new((px.x + o - w / 2.0) / f, (px.y + o - h / 2.0) / f, 1.0).normalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuaternionOrder {
    /// `(x, y, z, w)`
    ScalarLast,
    /// `(w, x, y, z)`
    ScalarFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RotationSense {
    /// `q` maps camera-body vectors into the world frame.
    BodyToWorld,
    /// `q` maps world vectors into the camera body; its inverse is applied.
    WorldToBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WorldFrame {
    Enu,
    Ned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::PosX, Axis::NegX, Axis::PosY, Axis::NegY, Axis::PosZ, Axis::NegZ];

    pub fn vector(self) -> Vector3<f64> {
        match self {
            Axis::PosX => Vector3::x(),
            Axis::NegX => -Vector3::x(),
            Axis::PosY => Vector3::y(),
            Axis::NegY => -Vector3::y(),
            Axis::PosZ => Vector3::z(),
            Axis::NegZ => -Vector3::z(),
        }
    }
}

/// Body-frame axes carrying the optical axis and the image-right direction.
/// Image-down is `forward x right`, which keeps the optical frame
/// right-handed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CameraAxes {
    pub forward: Axis,
    pub right: Axis,
}

impl CameraAxes {
    pub fn down(&self) -> Vector3<f64> {
        self.forward.vector().cross(&self.right.vector())
    }

    /// Optical-frame vector expressed in the body frame.
    pub fn optical_to_body(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.right.vector() * v.x + self.down() * v.y + self.forward.vector() * v.z
    }

    pub fn body_to_optical(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            v.dot(&self.right.vector()),
            v.dot(&self.down()),
            v.dot(&self.forward.vector()),
        )
    }
}

/// Interpretation of a raw orientation quaternion and pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameConvention {
    pub order: QuaternionOrder,
    pub sense: RotationSense,
    pub axes: CameraAxes,
    pub world: WorldFrame,
    pub pixel_origin: PixelOrigin,
}

/// The convention selected by the calibration harness.
pub const LOCKED_CONVENTION: FrameConvention = FrameConvention {
    order: QuaternionOrder::ScalarLast,
    sense: RotationSense::BodyToWorld,
    axes: CameraAxes {
        forward: Axis::PosX,
        right: Axis::NegY,
    },
    world: WorldFrame::Enu,
    pixel_origin: PixelOrigin::Corner,
};

impl FrameConvention {
    /// Builds the body-to-ENU rotation described by `raw` under this
    /// convention.
    pub fn body_to_enu(&self, raw: [f64; 4]) -> Result<UnitQuaternion<f64>> {
        let q = match self.order {
            QuaternionOrder::ScalarLast => Quaternion::new(raw[3], raw[0], raw[1], raw[2]),
            QuaternionOrder::ScalarFirst => Quaternion::new(raw[0], raw[1], raw[2], raw[3]),
        };
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
            return Err(Error::invalid(format!("quaternion norm {norm} is not 1")));
        }
        let mut rot = UnitQuaternion::from_quaternion(q);
        if self.sense == RotationSense::WorldToBody {
            rot = rot.inverse();
        }
        if self.world == WorldFrame::Ned {
            // NED -> ENU is a fixed 180 degree rotation about (1, 1, 0)/sqrt(2).
            let ned_to_enu = UnitQuaternion::from_quaternion(Quaternion::new(
                0.0,
                std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
                0.0,
            ));
            rot = ned_to_enu * rot;
        }
        Ok(rot)
    }

    /// World ENU direction of an optical-frame ray.
    pub fn optical_to_enu(&self, raw: [f64; 4], ray_optical: &Vector3<f64>) -> Result<Vector3<f64>> {
        Ok(self.body_to_enu(raw)? * self.axes.optical_to_body(ray_optical))
    }
}

/// How a gimbal orientation was specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OrientationSource {
    Quaternion,
    Euler {
        vehicle_yaw_deg: f64,
        gimbal_pitch_deg: f64,
        gimbal_roll_deg: f64,
    },
}

/// Camera orientation after gimbal stabilization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGimbal", into = "RawGimbal")]
pub struct GimbalState {
    orientation: UnitQuaternion<f64>,
    pub source: OrientationSource,
}

#[derive(Serialize, Deserialize)]
struct RawGimbal {
    quaternion_xyzw: [f64; 4],
    source: OrientationSource,
}

impl TryFrom<RawGimbal> for GimbalState {
    type Error = Error;

    fn try_from(raw: RawGimbal) -> Result<Self> {
        let [x, y, z, w] = raw.quaternion_xyzw;
        GimbalState::from_xyzw(x, y, z, w)?;
        // Stored components are already unit; keep them bit-exact.
        Ok(GimbalState {
            orientation: UnitQuaternion::new_unchecked(Quaternion::new(w, x, y, z)),
            source: raw.source,
        })
    }
}

impl From<GimbalState> for RawGimbal {
    fn from(g: GimbalState) -> Self {
        RawGimbal {
            quaternion_xyzw: g.xyzw(),
            source: g.source,
        }
    }
}

impl GimbalState {
    /// From raw `(x, y, z, w)` components.
    pub fn from_xyzw(x: f64, y: f64, z: f64, w: f64) -> Result<Self> {
        Ok(Self {
            orientation: LOCKED_CONVENTION.body_to_enu([x, y, z, w])?,
            source: OrientationSource::Quaternion,
        })
    }

    pub fn from_quaternion(orientation: UnitQuaternion<f64>) -> Self {
        Self {
            orientation,
            source: OrientationSource::Quaternion,
        }
    }

    /// Vehicle yaw is a compass heading (clockwise from North); pitch is
    /// positive above the horizon; positive roll lowers the right side.
    pub fn from_euler(vehicle_yaw_deg: f64, gimbal_pitch_deg: f64, gimbal_roll_deg: f64) -> Result<Self> {
        if ![vehicle_yaw_deg, gimbal_pitch_deg, gimbal_roll_deg]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::invalid("Euler angles must be finite"));
        }
        let orientation = UnitQuaternion::from_euler_angles(
            gimbal_roll_deg.to_radians(),
            -gimbal_pitch_deg.to_radians(),
            (90.0 - vehicle_yaw_deg).to_radians(),
        );
        Ok(Self {
            orientation,
            source: OrientationSource::Euler {
                vehicle_yaw_deg,
                gimbal_pitch_deg,
                gimbal_roll_deg,
            },
        })
    }

    pub fn orientation(&self) -> &UnitQuaternion<f64> {
        &self.orientation
    }

    /// `(x, y, z, w)` components.
    pub fn xyzw(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.i, q.j, q.k, q.w]
    }

    /// `(vehicle_yaw_deg in [0, 360), gimbal_pitch_deg, gimbal_roll_deg)`.
    pub fn to_euler(&self) -> (f64, f64, f64) {
        let (roll, neg_pitch, heading) = self.orientation.euler_angles();
        (
            (90.0 - heading.to_degrees()).rem_euclid(360.0),
            -neg_pitch.to_degrees(),
            roll.to_degrees(),
        )
    }

    /// Optical axis in ENU.
    pub fn boresight(&self) -> Vector3<f64> {
        camera_ray_to_world(&Vector3::z(), self)
    }

    /// Applies an additional rotation expressed in the body frame.
    pub fn rotated_in_body(&self, delta: &UnitQuaternion<f64>) -> Self {
        Self {
            orientation: self.orientation * delta,
            source: OrientationSource::Quaternion,
        }
    }
}

/// Rotates an optical-frame ray into the ENU world frame.
pub fn camera_ray_to_world(ray_cam: &Vector3<f64>, g: &GimbalState) -> Vector3<f64> {
    g.orientation * LOCKED_CONVENTION.axes.optical_to_body(ray_cam)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GimbalLimits {
    pub pitch_min_deg: f64,
    pub pitch_max_deg: f64,
    pub roll_min_deg: f64,
    pub roll_max_deg: f64,
}

impl Default for GimbalLimits {
    fn default() -> Self {
        Self {
            pitch_min_deg: -120.0,
            pitch_max_deg: 30.0,
            roll_min_deg: -45.0,
            roll_max_deg: 45.0,
        }
    }
}

impl GimbalLimits {
    pub fn allows(&self, pitch_deg: f64, roll_deg: f64) -> bool {
        (self.pitch_min_deg..=self.pitch_max_deg).contains(&pitch_deg)
            && (self.roll_min_deg..=self.roll_max_deg).contains(&roll_deg)
    }
}

/// Vehicle yaw and gimbal angles that put a target at the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StareCommand {
    pub vehicle_yaw_deg: f64,
    pub gimbal_pitch_deg: f64,
    pub gimbal_roll_deg: f64,
    pub reachable: bool,
}

impl StareCommand {
    pub fn gimbal_state(&self) -> Result<GimbalState> {
        GimbalState::from_euler(self.vehicle_yaw_deg, self.gimbal_pitch_deg, self.gimbal_roll_deg)
    }
}

/// ENU displacement of `target` as seen from `from`. Positions sharing the
/// AMSL datum are treated as ellipsoid heights; the common offset cancels.
pub fn enu_displacement(from: &GeodeticPosition, target: &GeodeticPosition) -> Result<Vector3<f64>> {
    from.ensure_same_datum(target)?;
    let as_ellipsoid = |p: &GeodeticPosition| GeodeticPosition::new(p.lat(), p.lon(), p.alt(), Datum::EllipsoidWgs84);
    let frame = TangentFrame::at(as_ellipsoid(from)?)?;
    frame.to_enu(&as_ellipsoid(target)?)
}

pub fn stare_solution(
    drone: &GeodeticPosition,
    target: &GeodeticPosition,
    limits: &GimbalLimits,
) -> Result<StareCommand> {
    let d = enu_displacement(drone, target)?;
    if d.norm() == 0.0 {
        return Err(Error::invalid("stare target coincides with the vehicle"));
    }
    // Sub-micrometre horizontal offsets are numerical noise; treat as nadir.
    let horizontal = d.x.hypot(d.y);
    let yaw = if horizontal < 1e-6 {
        0.0
    } else {
        d.x.atan2(d.y).to_degrees().rem_euclid(360.0)
    };
    let pitch = d.z.atan2(if horizontal < 1e-6 { 0.0 } else { horizontal }).to_degrees();
    Ok(StareCommand {
        vehicle_yaw_deg: yaw,
        gimbal_pitch_deg: pitch,
        gimbal_roll_deg: 0.0,
        reachable: limits.allows(pitch, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_camera() -> CameraModel {
        CameraModel::new(74.0, 1920, 1080).unwrap()
    }

    fn angle_deg(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos().to_degrees()
    }

    #[test]
    fn intrinsics() {
        let cam = reference_camera();
        assert!((cam.focal_px() - 1273.96).abs() < 0.01);
        let expected_v = 2.0 * (540.0 / cam.focal_px()).atan().to_degrees();
        assert_eq!(cam.fov_v_deg(), expected_v);
        assert!(CameraModel::new(180.0, 10, 10).is_err());
        assert!(CameraModel::new(60.0, 0, 10).is_err());
    }

    #[test]
    fn center_pixel_is_optical_axis() {
        let cam = reference_camera();
        let r = pixel_to_camera_ray(&cam, cam.center()).unwrap();
        assert!((r - Vector3::z()).norm() < 1e-12);
        let half = pixel_to_camera_ray_with(&cam, PixelCoord::new(959.5, 539.5), PixelOrigin::HalfPixel).unwrap();
        assert!((half - Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn left_edge_angle() {
        let cam = reference_camera();
        let r = pixel_to_camera_ray(&cam, PixelCoord::new(0.0, 540.0)).unwrap();
        let ang = r.x.atan2(r.z).to_degrees();
        assert!((ang + 37.0).abs() < 0.05, "{ang}");
    }

    #[test]
    fn reference_pixel_tilt() {
        let cam = reference_camera();
        let r = pixel_to_camera_ray(&cam, PixelCoord::new(960.0, 810.0)).unwrap();
        let down = r.y.atan2(r.z).to_degrees();
        // atan(270 / f) with f = 960 / tan(37 deg)
        let expected = (270.0 / (960.0 / 37f64.to_radians().tan())).atan().to_degrees();
        assert!((down - expected).abs() < 1e-12);
        assert!((down - 11.99).abs() < 0.05);
    }

    #[test]
    fn out_of_frame_rejected() {
        let cam = reference_camera();
        for (x, y) in [(-1.0, 0.0), (1920.0, 10.0), (10.0, 1080.0), (f64::NAN, 1.0)] {
            assert!(pixel_to_camera_ray(&cam, PixelCoord::new(x, y)).is_err());
        }
    }

    #[test]
    fn identity_looks_east() {
        let g = GimbalState::from_xyzw(0.0, 0.0, 0.0, 1.0).unwrap();
        assert!((g.boresight() - Vector3::x()).norm() < 1e-15);
    }

    #[test]
    fn reference_quaternion_looks_down_north_west() {
        let cam = reference_camera();
        let g = GimbalState::from_xyzw(0.056115267, -0.0154703723, 0.9608545, 0.27086953).unwrap();
        let w = camera_ray_to_world(&pixel_to_camera_ray(&cam, PixelCoord::new(960.0, 810.0)).unwrap(), &g);
        assert!(w.x < 0.0 && w.y > 0.0 && w.z < 0.0, "{w}");
        let (yaw, pitch, roll) = g.to_euler();
        assert!((yaw - 301.489).abs() < 1e-3 && (pitch - 6.6739).abs() < 1e-3 && roll.abs() < 0.05);
    }

    #[test]
    fn rejects_non_unit_quaternion() {
        assert!(GimbalState::from_xyzw(0.0, 0.0, 0.0, 1.1).is_err());
        assert!(GimbalState::from_xyzw(0.0, 0.0, 0.0, 1.0 + 5e-7).is_ok());
    }

    #[test]
    fn euler_roundtrip() {
        for &(y, p, r) in &[
            (0.0, 0.0, 0.0),
            (45.0, -30.0, 5.0),
            (301.5, 6.7, -2.0),
            (180.0, -89.0, 0.0),
            (359.0, 20.0, 40.0),
        ] {
            let g = GimbalState::from_euler(y, p, r).unwrap();
            let (y2, p2, r2) = g.to_euler();
            assert!(
                (y2 - y).abs() < 1e-9 && (p2 - p).abs() < 1e-9 && (r2 - r).abs() < 1e-9,
                "{y2} {p2} {r2}"
            );
            let f = g.boresight();
            assert!((f.z.asin().to_degrees() - p).abs() < 1e-9);
        }
    }

    #[test]
    fn positive_roll_lowers_right_side() {
        let g = GimbalState::from_euler(0.0, 0.0, 10.0).unwrap();
        let right = camera_ray_to_world(&Vector3::x(), &g);
        assert!(right.z < 0.0 && right.x > 0.0);
    }

    #[test]
    fn stare_geometry() {
        let drone = GeodeticPosition::wgs84(36.2, -96.0, 300.0).unwrap();
        let frame = TangentFrame::at(drone).unwrap();
        let below = GeodeticPosition::wgs84(36.2, -96.0, 200.0).unwrap();
        let cmd = stare_solution(&drone, &below, &GimbalLimits::default()).unwrap();
        assert!((cmd.gimbal_pitch_deg + 90.0).abs() < 1e-9);
        assert_eq!(cmd.vehicle_yaw_deg, 0.0);
        assert!(cmd.reachable);
        let narrow = GimbalLimits {
            pitch_min_deg: -60.0,
            ..GimbalLimits::default()
        };
        assert!(!stare_solution(&drone, &below, &narrow).unwrap().reachable);

        let north_down = frame.from_enu(&Vector3::new(0.0, 100.0, -100.0)).unwrap();
        let cmd = stare_solution(&drone, &north_down, &GimbalLimits::default()).unwrap();
        assert!(cmd.vehicle_yaw_deg.min(360.0 - cmd.vehicle_yaw_deg) < 1e-9);
        assert!((cmd.gimbal_pitch_deg + 45.0).abs() < 1e-9);

        assert!(stare_solution(&drone, &drone, &GimbalLimits::default()).is_err());
        let amsl = GeodeticPosition::new(36.2, -96.0, 200.0, Datum::Amsl).unwrap();
        assert!(matches!(
            stare_solution(&drone, &amsl, &GimbalLimits::default()),
            Err(Error::DatumMismatch { .. })
        ));
    }

    #[test]
    fn stare_boresight_closes_loop() {
        let drone = GeodeticPosition::wgs84(41.8, -86.2, 320.0).unwrap();
        let frame = TangentFrame::at(drone).unwrap();
        for d in [
            Vector3::new(120.0, -40.0, -60.0),
            Vector3::new(-10.0, 250.0, -35.0),
            Vector3::new(-80.0, -80.0, 15.0),
        ] {
            let target = frame.from_enu(&d).unwrap();
            let g = stare_solution(&drone, &target, &GimbalLimits::default())
                .unwrap()
                .gimbal_state()
                .unwrap();
            let ray = camera_ray_to_world(
                &pixel_to_camera_ray(
                    &CameraModel::new(74.0, 1920, 1080).unwrap(),
                    PixelCoord::new(960.0, 540.0),
                )
                .unwrap(),
                &g,
            );
            assert!(angle_deg(&ray, &d) <= 0.01);
        }
    }

    #[test]
    fn optical_axes_are_right_handed() {
        let axes = LOCKED_CONVENTION.axes;
        let v = Vector3::new(0.3, -0.2, 0.9);
        assert!((axes.body_to_optical(&axes.optical_to_body(&v)) - v).norm() < 1e-15);
        assert_eq!(axes.down(), -Vector3::z());
    }
}
