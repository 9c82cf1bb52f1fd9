//! WGS84 geodetic positions, Earth-centered Cartesian coordinates, local
//! East-North-Up tangent frames and great-circle distance.
//!
//! Only the WGS84 ellipsoid is supported. Heights above mean sea level are
//! carried with an explicit [`Datum::Amsl`] tag and must be converted with
//! [`datum_convert`] (using a per-site geoid undulation) before any ellipsoid
//! geometry is applied to them.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// WGS84 semi-major axis in meters.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// WGS84 semi-minor axis in meters.
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);
/// First eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);
/// Mean Earth radius used by [`haversine_m`].
pub const MEAN_EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Reference surface for an altitude value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Datum {
    #[serde(rename = "ELLIPSOID_WGS84")]
    EllipsoidWgs84,
    #[serde(rename = "AMSL")]
    Amsl,
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::EllipsoidWgs84 => f.write_str("ELLIPSOID_WGS84"),
            Datum::Amsl => f.write_str("AMSL"),
        }
    }
}

impl std::str::FromStr for Datum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ELLIPSOID_WGS84" | "ELLIPSOIDWGS84" | "WGS84" | "ELLIPSOID" => Ok(Datum::EllipsoidWgs84),
            "AMSL" | "MSL" => Ok(Datum::Amsl),
            other => Err(Error::invalid(format!("unknown datum `{other}`"))),
        }
    }
}

/// Latitude, longitude and altitude with an explicit altitude datum.
///
/// Latitude is kept in `[-90, 90]` and longitude is normalized into
/// `[-180, 180]` on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPosition", into = "RawPosition")]
pub struct GeodeticPosition {
    latitude_deg: f64,
    longitude_deg: f64,
    altitude_m: f64,
    datum: Datum,
}

#[derive(Serialize, Deserialize)]
struct RawPosition {
    latitude_deg: f64,
    longitude_deg: f64,
    altitude_m: f64,
    datum: Datum,
}

impl TryFrom<RawPosition> for GeodeticPosition {
    type Error = Error;

    fn try_from(raw: RawPosition) -> Result<Self> {
        GeodeticPosition::new(raw.latitude_deg, raw.longitude_deg, raw.altitude_m, raw.datum)
    }
}

impl From<GeodeticPosition> for RawPosition {
    fn from(p: GeodeticPosition) -> Self {
        RawPosition {
            latitude_deg: p.latitude_deg,
            longitude_deg: p.longitude_deg,
            altitude_m: p.altitude_m,
            datum: p.datum,
        }
    }
}

fn normalize_lon(lon: f64) -> f64 {
    if (-180.0..=180.0).contains(&lon) {
        return lon;
    }
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if wrapped == -180.0 && lon > 0.0 {
        180.0
    } else {
        wrapped
    }
}

impl GeodeticPosition {
    pub fn new(latitude_deg: f64, longitude_deg: f64, altitude_m: f64, datum: Datum) -> Result<Self> {
        if !(latitude_deg.is_finite() && longitude_deg.is_finite() && altitude_m.is_finite()) {
            return Err(Error::invalid("geodetic position components must be finite"));
        }
        if !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(Error::invalid(format!("latitude {latitude_deg} outside [-90, 90]")));
        }
        Ok(Self {
            latitude_deg,
            longitude_deg: normalize_lon(longitude_deg),
            altitude_m,
            datum,
        })
    }

    /// Shorthand for an ellipsoid-height position.
    pub fn wgs84(latitude_deg: f64, longitude_deg: f64, altitude_m: f64) -> Result<Self> {
        Self::new(latitude_deg, longitude_deg, altitude_m, Datum::EllipsoidWgs84)
    }

    pub fn lat(&self) -> f64 {
        self.latitude_deg
    }

    pub fn lon(&self) -> f64 {
        self.longitude_deg
    }

    pub fn alt(&self) -> f64 {
        self.altitude_m
    }

    pub fn datum(&self) -> Datum {
        self.datum
    }

    /// Same horizontal position with a different altitude (same datum).
    pub fn with_altitude(&self, altitude_m: f64) -> Result<Self> {
        Self::new(self.latitude_deg, self.longitude_deg, altitude_m, self.datum)
    }

    /// Returns an error unless `self` and `other` share a datum.
    pub fn ensure_same_datum(&self, other: &GeodeticPosition) -> Result<()> {
        if self.datum != other.datum {
            return Err(Error::DatumMismatch {
                expected: self.datum,
                found: other.datum,
            });
        }
        Ok(())
    }

    fn ensure_ellipsoid(&self) -> Result<()> {
        if self.datum != Datum::EllipsoidWgs84 {
            return Err(Error::DatumMismatch {
                expected: Datum::EllipsoidWgs84,
                found: self.datum,
            });
        }
        Ok(())
    }
}

impl fmt::Display for GeodeticPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {} m {})",
            self.latitude_deg, self.longitude_deg, self.altitude_m, self.datum
        )
    }
}

/// A point in the Earth-centered Earth-fixed frame, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcefVector(pub Vector3<f64>);

impl EcefVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Prime-vertical radius of curvature at geodetic latitude `lat_rad`.
pub fn prime_vertical_radius(lat_rad: f64) -> f64 {
    let s = lat_rad.sin();
    WGS84_A / (1.0 - WGS84_E2 * s * s).sqrt()
}

/// Meridional radius of curvature at geodetic latitude `lat_rad`.
pub fn meridian_radius(lat_rad: f64) -> f64 {
    let s = lat_rad.sin();
    let w2 = 1.0 - WGS84_E2 * s * s;
    WGS84_A * (1.0 - WGS84_E2) / (w2 * w2.sqrt())
}

pub fn lla_to_ecef(p: &GeodeticPosition) -> Result<EcefVector> {
    p.ensure_ellipsoid()?;
    let lat = p.latitude_deg.to_radians();
    let lon = p.longitude_deg.to_radians();
    let n = prime_vertical_radius(lat);
    let h = p.altitude_m;
    let (slat, clat) = lat.sin_cos();
    let (slon, clon) = lon.sin_cos();
    Ok(EcefVector::new(
        (n + h) * clat * clon,
        (n + h) * clat * slon,
        (n * (1.0 - WGS84_E2) + h) * slat,
    ))
}

/// Inverse of [`lla_to_ecef`] using Bowring's parametric-latitude iteration.
pub fn ecef_to_lla(v: &EcefVector) -> Result<GeodeticPosition> {
    let (x, y, z) = (v.0.x, v.0.y, v.0.z);
    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::invalid("ECEF components must be finite"));
    }
    if v.norm() <= 1.0e6 {
        return Err(Error::invalid(format!(
            "ECEF vector magnitude {} m is too close to the Earth's center",
            v.norm()
        )));
    }
    let ep2 = WGS84_E2 / (1.0 - WGS84_E2);
    let p = x.hypot(y);
    let lon = y.atan2(x);

    let mut beta = z.atan2((1.0 - WGS84_F) * p);
    let mut lat = 0.0;
    for _ in 0..8 {
        let (sb, cb) = beta.sin_cos();
        let next = (z + ep2 * WGS84_B * sb * sb * sb).atan2(p - WGS84_E2 * WGS84_A * cb * cb * cb);
        let done = (next - lat).abs() < 1e-15;
        lat = next;
        beta = ((1.0 - WGS84_F) * lat.sin()).atan2(lat.cos());
        if done {
            break;
        }
    }
    let (slat, clat) = lat.sin_cos();
    let h = p * clat + z * slat - WGS84_A * (1.0 - WGS84_E2 * slat * slat).sqrt();
    GeodeticPosition::new(lat.to_degrees(), lon.to_degrees(), h, Datum::EllipsoidWgs84)
}

/// Local East-North-Up frame anchored at a geodetic origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    origin: GeodeticPosition,
    origin_ecef: EcefVector,
    /// Rows are the East, North and Up unit vectors expressed in ECEF.
    basis: Matrix3<f64>,
}

impl TangentFrame {
    pub fn at(origin: GeodeticPosition) -> Result<Self> {
        let origin_ecef = lla_to_ecef(&origin)?;
        let lat = origin.latitude_deg.to_radians();
        let lon = origin.longitude_deg.to_radians();
        let (slat, clat) = lat.sin_cos();
        let (slon, clon) = lon.sin_cos();
        #[rustfmt::skip]
        let basis = Matrix3::new(
            -slon,         clon,         0.0,
            -slat * clon, -slat * slon,  clat,
             clat * clon,  clat * slon,  slat,
        );
        Ok(Self {
            origin,
            origin_ecef,
            basis,
        })
    }

    pub fn origin(&self) -> &GeodeticPosition {
        &self.origin
    }

    pub fn basis(&self) -> &Matrix3<f64> {
        &self.basis
    }

    pub fn to_enu(&self, p: &GeodeticPosition) -> Result<Vector3<f64>> {
        let e = lla_to_ecef(p)?;
        Ok(self.basis * (e.0 - self.origin_ecef.0))
    }

    pub fn from_enu(&self, enu: &Vector3<f64>) -> Result<GeodeticPosition> {
        let ecef = self.origin_ecef.0 + self.basis.transpose() * enu;
        ecef_to_lla(&EcefVector(ecef))
    }
}

/// Great-circle distance on a sphere of radius [`MEAN_EARTH_RADIUS_M`].
/// Altitudes are ignored.
pub fn haversine_m(a: &GeodeticPosition, b: &GeodeticPosition) -> f64 {
    let lat1 = a.latitude_deg.to_radians();
    let lat2 = b.latitude_deg.to_radians();
    let dlat = lat2 - lat1;
    let dlon = (b.longitude_deg - a.longitude_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * MEAN_EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Re-expresses the altitude of `p` against `target`.
///
/// `geoid_undulation_m` is the geoid height above the ellipsoid at the site:
/// `ellipsoid_height = amsl_height + undulation`.
pub fn datum_convert(p: &GeodeticPosition, geoid_undulation_m: f64, target: Datum) -> Result<GeodeticPosition> {
    if !geoid_undulation_m.is_finite() {
        return Err(Error::invalid("geoid undulation must be finite"));
    }
    let alt = match (p.datum, target) {
        (a, b) if a == b => p.altitude_m,
        (Datum::Amsl, Datum::EllipsoidWgs84) => p.altitude_m + geoid_undulation_m,
        (Datum::EllipsoidWgs84, Datum::Amsl) => p.altitude_m - geoid_undulation_m,
        _ => unreachable!(),
    };
    GeodeticPosition::new(p.latitude_deg, p.longitude_deg, alt, target)
}
