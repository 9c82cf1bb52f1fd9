//! Sensor error models and their propagation through geolocation.

use std::io::Write;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{haversine_m, GeodeticPosition};
use crate::geolocate::{geolocate_pixel, HitStatus, LocalPlane, PixelBox, VehicleState};
use crate::optics::{enu_displacement, CameraModel, PixelCoord};
use crate::terrain::TerrainGrid;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Error sources applied to a vehicle state before geolocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-axis (east, north) GPS sigma, meters.
    pub gps_sigma_h_m: f64,
    pub gps_sigma_v_m: f64,
    /// Systematic offset added to the believed altitude.
    pub altitude_bias_m: f64,
    /// Per-axis attitude sigma (roll, pitch, yaw), degrees.
    pub attitude_sigma_deg: f64,
    pub pixel_sigma_px: f64,
    /// Multiplies `gps_sigma_h_m`.
    pub hdop_scale: f64,
    /// Age of the state used to tag an image, seconds.
    pub latency_s: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::zero()
    }
}

impl NoiseModel {
    pub const fn zero() -> Self {
        Self {
            gps_sigma_h_m: 0.0,
            gps_sigma_v_m: 0.0,
            altitude_bias_m: 0.0,
            attitude_sigma_deg: 0.0,
            pixel_sigma_px: 0.0,
            hdop_scale: 1.0,
            latency_s: 0.0,
            seed: DEFAULT_SEED,
        }
    }

    /// Names accepted by [`NoiseModel::preset`].
    pub const PRESETS: [&'static str; 5] = [
        "zero",
        "ground-scatter",
        "airborne-scatter",
        "high-hdop",
        "field-plausibility",
    ];

    /// Named presets. The scatter presets are rough, site-specific magnitudes
    /// and are not calibrated against any particular receiver.
    pub fn preset(name: &str) -> Result<Self> {
        let z = Self::zero();
        let m = match name {
            "zero" => z,
            // Stationary receiver on the ground: meters of wander.
            "ground-scatter" => Self {
                gps_sigma_h_m: 2.0,
                gps_sigma_v_m: 3.0,
                ..z
            },
            // RTK-assisted airframe: sub-meter scatter.
            "airborne-scatter" => Self {
                gps_sigma_h_m: 0.4,
                gps_sigma_v_m: 0.6,
                attitude_sigma_deg: 0.2,
                ..z
            },
            "high-hdop" => Self {
                gps_sigma_h_m: 1.5,
                gps_sigma_v_m: 1.0,
                hdop_scale: 3.0,
                ..z
            },
            "field-plausibility" => Self {
                gps_sigma_h_m: 1.5,
                gps_sigma_v_m: 1.0,
                altitude_bias_m: 3.0,
                attitude_sigma_deg: 0.5,
                ..z
            },
            other => {
                return Err(Error::invalid(format!(
                    "unknown noise preset {other:?}; expected one of {}",
                    Self::PRESETS.join(", ")
                )))
            }
        };
        Ok(m)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            ("gps_sigma_h_m", self.gps_sigma_h_m),
            ("gps_sigma_v_m", self.gps_sigma_v_m),
            ("attitude_sigma_deg", self.attitude_sigma_deg),
            ("pixel_sigma_px", self.pixel_sigma_px),
            ("latency_s", self.latency_s),
        ];
        for (name, v) in sigmas {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !self.altitude_bias_m.is_finite() {
            return Err(Error::Validation("altitude_bias_m must be finite".into()));
        }
        if !(self.hdop_scale.is_finite() && self.hdop_scale >= 1.0) {
            return Err(Error::Validation(format!(
                "hdop_scale must be >= 1, got {}",
                self.hdop_scale
            )));
        }
        Ok(())
    }

    fn is_silent(&self) -> bool {
        self.gps_sigma_h_m == 0.0
            && self.gps_sigma_v_m == 0.0
            && self.altitude_bias_m == 0.0
            && self.attitude_sigma_deg == 0.0
            && self.pixel_sigma_px == 0.0
    }
}

/// Independent generator for one trial: same seed, stream = trial index.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

/// Draws in a fixed order so every trial consumes the same stream layout.
struct TrialDraw {
    enu: Vector3<f64>,
    attitude_rad: [f64; 3],
    pixel: [f64; 2],
}

impl TrialDraw {
    fn sample(noise: &NoiseModel, trial: u64) -> Self {
        let mut rng = trial_rng(noise.seed, trial);
        let sh = noise.gps_sigma_h_m * noise.hdop_scale;
        let enu = Vector3::new(
            gauss(&mut rng, sh),
            gauss(&mut rng, sh),
            gauss(&mut rng, noise.gps_sigma_v_m) + noise.altitude_bias_m,
        );
        let sa = noise.attitude_sigma_deg.to_radians();
        let attitude_rad = [gauss(&mut rng, sa), gauss(&mut rng, sa), gauss(&mut rng, sa)];
        let pixel = [
            gauss(&mut rng, noise.pixel_sigma_px),
            gauss(&mut rng, noise.pixel_sigma_px),
        ];
        Self {
            enu,
            attitude_rad,
            pixel,
        }
    }

    fn apply(&self, state: &VehicleState) -> Result<VehicleState> {
        let mut out = *state;
        if self.enu != Vector3::zeros() {
            let (lat, lon, alt) = LocalPlane::at(&state.position).to_lat_lon_alt(&self.enu);
            out.position = GeodeticPosition::new(lat, lon, alt, state.position.datum())?;
        }
        if self.attitude_rad.iter().any(|a| *a != 0.0) {
            let [roll, pitch, yaw] = self.attitude_rad;
            let delta = UnitQuaternion::from_euler_angles(roll, pitch, yaw);
            out.attitude = state.attitude.rotated_in_body(&delta);
        }
        Ok(out)
    }
}

/// The believed state for one trial. Deterministic in `(noise.seed, trial)`.
pub fn perturb_state(state: &VehicleState, noise: &NoiseModel, trial: u64) -> Result<VehicleState> {
    noise.validate()?;
    if noise.is_silent() {
        return Ok(*state);
    }
    TrialDraw::sample(noise, trial).apply(state)
}

/// The state a consumer actually pairs with an image captured at `t`: the
/// trajectory sampled `latency_s` earlier, stamped as if it were current.
pub fn lagged_state<F>(trajectory: F, t: f64, noise: &NoiseModel) -> Result<VehicleState>
where
    F: Fn(f64) -> Result<VehicleState>,
{
    let mut s = trajectory(t - noise.latency_s)?;
    s.timestamp_s = t;
    Ok(s)
}

/// Horizontal error caused by an altitude bias over flat ground.
pub fn analytic_bias_error(bias_m: f64, depression_angle_deg: f64) -> Result<f64> {
    signed_bias_shift(bias_m, depression_angle_deg).map(f64::abs)
}

/// Shift of the returned point along the ground-projected view ray:
/// negative is towards the vehicle.
pub fn signed_bias_shift(bias_m: f64, depression_angle_deg: f64) -> Result<f64> {
    if !(depression_angle_deg > 0.0 && depression_angle_deg < 90.0) {
        return Err(Error::invalid(format!(
            "depression angle must lie in (0, 90) degrees, got {depression_angle_deg}"
        )));
    }
    if !bias_m.is_finite() {
        return Err(Error::invalid("altitude bias must be finite"));
    }
    Ok(bias_m / depression_angle_deg.to_radians().tan())
}

/// Signed horizontal offset of `hit` from `truth` along the direction from
/// `vehicle` to `truth`, meters.
pub fn along_view_offset(vehicle: &GeodeticPosition, truth: &GeodeticPosition, hit: &GeodeticPosition) -> Result<f64> {
    let to_truth = enu_displacement(vehicle, truth)?;
    let to_hit = enu_displacement(vehicle, hit)?;
    let axis = Vector3::new(to_truth.x, to_truth.y, 0.0);
    let n = axis.norm();
    if n == 0.0 {
        return Err(Error::DegenerateGeometry(
            "truth lies directly below the vehicle".into(),
        ));
    }
    let d = Vector3::new(to_hit.x - to_truth.x, to_hit.y - to_truth.y, 0.0);
    Ok(d.dot(&axis) / n)
}

/// What the camera is pointed at in the image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aim {
    Pixel(PixelCoord),
    Detection(PixelBox),
}

impl Aim {
    fn pixel(&self, cam: &CameraModel) -> Result<PixelCoord> {
        match self {
            Aim::Pixel(p) => Ok(*p),
            Aim::Detection(b) => {
                b.validate(cam)?;
                Ok(b.center())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub state: VehicleState,
    pub camera: CameraModel,
    pub aim: Aim,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub status: HitStatus,
    pub d_haversine_m: Option<f64>,
    pub d_elev_m: Option<f64>,
    pub hit: Option<GeodeticPosition>,
}

impl TrialRecord {
    pub fn score(trial: u64, status: HitStatus, hit: Option<GeodeticPosition>, truth: &GeodeticPosition) -> Self {
        let (d_haversine_m, d_elev_m) = match &hit {
            Some(h) => (Some(haversine_m(h, truth)), Some((h.alt() - truth.alt()).abs())),
            None => (None, None),
        };
        Self {
            trial,
            status,
            d_haversine_m,
            d_elev_m,
            hit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub n: usize,
    pub mean_haversine_m: f64,
    pub max_haversine_m: f64,
    pub mean_abs_elevation_err_m: f64,
    pub max_abs_elevation_err_m: f64,
    pub miss_count: usize,
    pub records: Vec<TrialRecord>,
}

impl ErrorStats {
    pub fn hit_count(&self) -> usize {
        self.n - self.miss_count
    }

    pub fn from_records(records: Vec<TrialRecord>) -> Self {
        let mut sum_h = 0.0;
        let mut max_h: f64 = 0.0;
        let mut sum_e = 0.0;
        let mut max_e: f64 = 0.0;
        let mut hits = 0usize;
        for r in &records {
            if let (Some(h), Some(e)) = (r.d_haversine_m, r.d_elev_m) {
                hits += 1;
                sum_h += h;
                sum_e += e;
                max_h = max_h.max(h);
                max_e = max_e.max(e);
            }
        }
        let mean = |s: f64| if hits == 0 { 0.0 } else { s / hits as f64 };
        Self {
            n: records.len(),
            mean_haversine_m: mean(sum_h),
            max_haversine_m: max_h,
            mean_abs_elevation_err_m: mean(sum_e),
            max_abs_elevation_err_m: max_e,
            miss_count: records.len() - hits,
            records,
        }
    }

    /// Per-trial table with columns `trial, d_haversine_m, d_elev_m, status`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            trial: u64,
            d_haversine_m: Option<f64>,
            d_elev_m: Option<f64>,
            status: &'a str,
        }
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(Row {
                trial: r.trial,
                d_haversine_m: r.d_haversine_m,
                d_elev_m: r.d_elev_m,
                status: status_label(r.status),
            })
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Validation(format!("csv: {other:?}")),
    }
}

pub fn status_label(s: HitStatus) -> &'static str {
    match s {
        HitStatus::Hit => "HIT",
        HitStatus::MissOutOfRegion => "MISS_OUT_OF_REGION",
        HitStatus::MissAboveHorizon => "MISS_ABOVE_HORIZON",
        HitStatus::MissMaxRange => "MISS_MAX_RANGE",
        HitStatus::OriginBelowTerrain => "ORIGIN_BELOW_TERRAIN",
    }
}

/// Believed state and measured pixel for one trial of `scene`.
pub fn perturbed_observation(scene: &Scene, noise: &NoiseModel, trial: u64) -> Result<(VehicleState, PixelCoord)> {
    noise.validate()?;
    let nominal = scene.aim.pixel(&scene.camera)?;
    if noise.is_silent() {
        return Ok((scene.state, nominal));
    }
    let draw = TrialDraw::sample(noise, trial);
    let (w, h) = (scene.camera.width_px as f64, scene.camera.height_px as f64);
    let px = PixelCoord::new(
        (nominal.x + draw.pixel[0]).clamp(0.0, w.next_down()),
        (nominal.y + draw.pixel[1]).clamp(0.0, h.next_down()),
    );
    Ok((draw.apply(&scene.state)?, px))
}

fn run_trial(
    grid: &TerrainGrid,
    scene: &Scene,
    truth: &GeodeticPosition,
    noise: &NoiseModel,
    trial: u64,
) -> Result<TrialRecord> {
    let (state, px) = perturbed_observation(scene, noise, trial)?;
    let r = geolocate_pixel(grid, &state, &scene.camera, px)?;
    Ok(TrialRecord::score(trial, r.status, r.hit, truth))
}

/// Perturbs, geolocates and scores `trials` independent trials. Results do
/// not depend on thread scheduling.
pub fn monte_carlo_geolocation(
    grid: &TerrainGrid,
    scene: &Scene,
    truth: &GeodeticPosition,
    noise: &NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<ErrorStats> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    noise.validate()?;
    if grid.datum() != truth.datum() {
        return Err(Error::DatumMismatch {
            expected: grid.datum(),
            found: truth.datum(),
        });
    }
    let noise = noise.with_seed(seed);
    let records = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(grid, scene, truth, &noise, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorStats::from_records(records))
}
