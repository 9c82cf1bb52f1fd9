//! Deterministic analytic terrains for testing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{GridSpec, LandCoverClass, TerrainGrid};
use crate::error::{Error, Result};
use crate::geodesy::{meridian_radius, prime_vertical_radius};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SynthKind {
    /// Constant base with an optional ripple of at most 1 m peak to peak.
    Flat,
    /// North-south trench with a truncated Gaussian cross-section.
    Gully,
    /// Linear ramp rising towards the north.
    Hill,
    /// Tent-shaped north-south crest placed between centroid columns.
    Ridge,
    /// Sum of Gaussian peaks.
    Peaks,
}

impl std::str::FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(SynthKind::Flat),
            "gully" => Ok(SynthKind::Gully),
            "hill" => Ok(SynthKind::Hill),
            "ridge" => Ok(SynthKind::Ridge),
            "peaks" => Ok(SynthKind::Peaks),
            other => Err(Error::invalid(format!("unknown terrain kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub kind: SynthKind,
    pub grid: GridSpec,
    pub base_elevation_m: f64,
    /// Ripple (FLAT), depth (GULLY), rise (HILL) or height (RIDGE, PEAKS).
    /// `None` selects the per-kind default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude_m: Option<f64>,
    /// Cross-section width scale in meters (GULLY, RIDGE, PEAKS).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_m: Option<f64>,
}

impl SynthParams {
    pub fn new(kind: SynthKind, grid: GridSpec) -> Self {
        Self {
            kind,
            grid,
            base_elevation_m: 274.0,
            magnitude_m: None,
            width_m: None,
        }
    }

    pub fn with_base(mut self, base_elevation_m: f64) -> Self {
        self.base_elevation_m = base_elevation_m;
        self
    }

    pub fn with_magnitude(mut self, magnitude_m: f64) -> Self {
        self.magnitude_m = Some(magnitude_m);
        self
    }

    pub fn with_width(mut self, width_m: f64) -> Self {
        self.width_m = Some(width_m);
        self
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude_m.unwrap_or(match self.kind {
            SynthKind::Flat => 0.0,
            SynthKind::Gully => 6.0,
            SynthKind::Hill => 16.0,
            SynthKind::Ridge => 10.0,
            SynthKind::Peaks => 120.0,
        })
    }

    pub fn width(&self) -> f64 {
        self.width_m.unwrap_or(match self.kind {
            SynthKind::Peaks => 150.0,
            _ => 20.0,
        })
    }
}

/// The analytic surface behind a synthetic grid, usable as ground truth.
#[derive(Debug, Clone, Copy)]
pub struct SynthSurface {
    params: SynthParams,
    lat_c: f64,
    lon_c: f64,
    m_per_deg_lat: f64,
    m_per_deg_lon: f64,
    /// Longitude of the gully axis or ridge crest.
    axis_lon: f64,
    /// Latitudes of the first and last centroid rows.
    ramp: (f64, f64),
}

impl SynthSurface {
    pub fn new(params: SynthParams) -> Result<Self> {
        let mag = params.magnitude();
        let width = params.width();
        if !params.base_elevation_m.is_finite() || !mag.is_finite() || mag < 0.0 {
            return Err(Error::invalid(
                "synthetic terrain magnitude must be finite and non-negative",
            ));
        }
        if params.kind == SynthKind::Flat && mag > 1.0 {
            return Err(Error::invalid("flat terrain ripple must not exceed 1 m"));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid("synthetic terrain width must be positive"));
        }
        let g = &params.grid;
        let (rows, cols) = g.dimensions()?;
        let lat_c = (g.lat_min + g.lat_max) / 2.0;
        let lon_c = (g.lon_min + g.lon_max) / 2.0;
        let phi = lat_c.to_radians();
        let centroid_lon = |c: usize| g.lon_min + (c as f64 + 0.5) * g.cell_size_lon;
        let centroid_lat = |r: usize| g.lat_min + (r as f64 + 0.5) * g.cell_size_lat;
        let axis_lon = match params.kind {
            // On a centroid column so the grid samples the full depth.
            SynthKind::Gully => centroid_lon(cols / 2),
            // Half-way between columns so the grid misses the crest.
            SynthKind::Ridge => centroid_lon(cols / 2) - 0.5 * g.cell_size_lon,
            _ => lon_c,
        };
        Ok(Self {
            params,
            lat_c,
            lon_c,
            m_per_deg_lat: meridian_radius(phi) * PI / 180.0,
            m_per_deg_lon: prime_vertical_radius(phi) * phi.cos() * PI / 180.0,
            axis_lon,
            ramp: (centroid_lat(0), centroid_lat(rows - 1)),
        })
    }

    pub fn params(&self) -> &SynthParams {
        &self.params
    }

    /// Longitude of the trench axis or crest line.
    pub fn axis_lon(&self) -> f64 {
        self.axis_lon
    }

    pub fn elevation(&self, lat: f64, lon: f64) -> f64 {
        let base = self.params.base_elevation_m;
        let mag = self.params.magnitude();
        let width = self.params.width();
        let east = (lon - self.lon_c) * self.m_per_deg_lon;
        let north = (lat - self.lat_c) * self.m_per_deg_lat;
        match self.params.kind {
            SynthKind::Flat => {
                let k = 2.0 * PI / 37.0;
                base + 0.5 * mag * (k * east).sin() * (k * north).cos()
            }
            SynthKind::Gully => {
                let d = (lon - self.axis_lon) * self.m_per_deg_lon;
                let sigma = width / 2.0;
                let cut = (-4.5f64).exp();
                let g = ((-0.5 * (d / sigma).powi(2)).exp() - cut) / (1.0 - cut);
                base - mag * g.max(0.0)
            }
            SynthKind::Hill => {
                let (lo, hi) = self.ramp;
                if hi == lo {
                    base
                } else {
                    base + mag * ((lat - lo) / (hi - lo))
                }
            }
            SynthKind::Ridge => {
                let d = (lon - self.axis_lon) * self.m_per_deg_lon;
                base + mag * (1.0 - d.abs() / width).max(0.0)
            }
            SynthKind::Peaks => {
                const PEAKS: [(f64, f64, f64); 4] =
                    [(0.0, 0.0, 1.0), (-0.8, 1.1, 0.6), (1.2, -0.6, 0.75), (0.9, 1.4, 0.4)];
                base + PEAKS
                    .iter()
                    .map(|(ex, ny, h)| {
                        let dx = east - ex * width;
                        let dy = north - ny * width;
                        mag * h * (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
                    })
                    .sum::<f64>()
            }
        }
    }
}

/// Samples an analytic terrain onto a grid.
pub fn synth_terrain(params: &SynthParams) -> Result<TerrainGrid> {
    let surface = SynthSurface::new(*params)?;
    let cover = match params.kind {
        SynthKind::Peaks => LandCoverClass::Barren,
        SynthKind::Gully | SynthKind::Ridge => LandCoverClass::Woodland,
        _ => LandCoverClass::Grassland,
    };
    TerrainGrid::build(&params.grid, |lat, lon| surface.elevation(lat, lon), |_, _| cover)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::Datum;

    fn grid() -> GridSpec {
        GridSpec::centered(41.8, -86.2, 0.0015, 1e-4, Datum::Amsl)
    }

    fn range(g: &TerrainGrid) -> f64 {
        let (lo, hi) = g.elevation_range();
        hi - lo
    }

    #[test]
    fn flat_stays_within_half_meter() {
        for ripple in [0.0, 1.0] {
            let p = SynthParams::new(SynthKind::Flat, grid()).with_magnitude(ripple);
            let g = synth_terrain(&p).unwrap();
            assert!(g.elevations().all(|e| (273.5..=274.5).contains(&e)));
        }
        let bad = SynthParams::new(SynthKind::Flat, grid()).with_magnitude(2.0);
        assert!(synth_terrain(&bad).is_err());
    }

    #[test]
    fn gully_depth() {
        let g = synth_terrain(&SynthParams::new(SynthKind::Gully, grid())).unwrap();
        assert!(range(&g) >= 6.0, "{}", range(&g));
        assert!(range(&g) <= 6.0 + 1e-9);
    }

    #[test]
    fn hill_rise() {
        let g = synth_terrain(&SynthParams::new(SynthKind::Hill, grid())).unwrap();
        assert!((range(&g) - 16.0).abs() <= 0.16);
    }

    #[test]
    fn ridge_crest_falls_between_samples() {
        let p = SynthParams::new(SynthKind::Ridge, grid());
        let s = SynthSurface::new(p).unwrap();
        let g = synth_terrain(&p).unwrap();
        let crest = s.elevation(41.8, s.axis_lon());
        assert!((crest - 284.0).abs() < 1e-9);
        assert!(g.elevation_range().1 < crest - 1.0);
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in [
            SynthKind::Flat,
            SynthKind::Gully,
            SynthKind::Hill,
            SynthKind::Ridge,
            SynthKind::Peaks,
        ] {
            let p = SynthParams::new(kind, grid()).with_magnitude(if kind == SynthKind::Flat { 0.8 } else { 12.0 });
            let a: Vec<u64> = synth_terrain(&p).unwrap().elevations().map(f64::to_bits).collect();
            let b: Vec<u64> = synth_terrain(&p).unwrap().elevations().map(f64::to_bits).collect();
            assert_eq!(a, b);
        }
    }
}
