//! The terrain digital shadow: a regular latitude/longitude grid of cells
//! carrying elevation, land cover and attributed discrete features, indexed
//! by two STR-trees (one over cells, one over discrete features).
//!
//! Rows run south to north and columns west to east; cell `(row, col)` is
//! stored at `row * cols + col`.

mod io;
mod merge;
mod synth;

pub use io::{load_grid, read_grid, save_grid, write_grid, GRID_FILE_VERSION};
pub use merge::{merge_layers, LandCoverRaster};
pub use synth::{synth_terrain, SynthKind, SynthParams, SynthSurface};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::Datum;
use crate::spatial_index::{intersects, Bbox, Geometry2D, Point2, StrTree, DEFAULT_NODE_CAPACITY};

/// Upper bound on the number of cells in one grid.
pub const MAX_CELLS: u64 = 10_000_000;
/// Default cell edge, roughly 10 m.
pub const DEFAULT_CELL_SIZE_DEG: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandCoverClass {
    Background,
    Woodland,
    Waterway,
    Road,
    Building,
    Grassland,
    Shrubland,
    Wetland,
    Developed,
    Cropland,
    Barren,
}

impl LandCoverClass {
    pub const ALL: [LandCoverClass; 11] = [
        LandCoverClass::Background,
        LandCoverClass::Woodland,
        LandCoverClass::Waterway,
        LandCoverClass::Road,
        LandCoverClass::Building,
        LandCoverClass::Grassland,
        LandCoverClass::Shrubland,
        LandCoverClass::Wetland,
        LandCoverClass::Developed,
        LandCoverClass::Cropland,
        LandCoverClass::Barren,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

/// Which layer a cell's land cover came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    BaseUsgs,
    CvSegmentation,
}

impl Provenance {
    pub fn code(self) -> u8 {
        match self {
            Provenance::BaseUsgs => 0,
            Provenance::CvSegmentation => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Provenance::BaseUsgs),
            1 => Some(Provenance::CvSegmentation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Water,
    Road,
    Trail,
}

/// A discrete vector feature (water body, road or trail).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub id: u64,
    pub kind: FeatureKind,
    pub geometry: Geometry2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainCell {
    /// SW, SE, NE, NW corners.
    pub corners: [Point2; 4],
    pub centroid: Point2,
    pub elevation_m: f64,
    pub land_cover: LandCoverClass,
    pub provenance: Provenance,
    /// Ids of discrete features intersecting the cell, ascending.
    pub features: Vec<u64>,
}

impl TerrainCell {
    pub fn bbox(&self) -> Bbox {
        Bbox {
            min_x: self.corners[0].x,
            min_y: self.corners[0].y,
            max_x: self.corners[2].x,
            max_y: self.corners[2].y,
        }
    }
}

/// Point-lookup interpolation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ElevationMode {
    /// Elevation of the cell whose centroid is nearest.
    #[default]
    Nearest,
    /// Bilinear blend of the four surrounding centroids, clamped at borders.
    Bilinear,
}

/// Attributes returned by [`TerrainGrid::query_point`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellInfo {
    pub row: usize,
    pub col: usize,
    pub elevation_m: f64,
    pub land_cover: LandCoverClass,
    pub provenance: Provenance,
    pub features: Vec<u64>,
}

/// Requested grid extent and resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lat_min: f64,
    pub lon_min: f64,
    pub lat_max: f64,
    pub lon_max: f64,
    pub cell_size_lat: f64,
    pub cell_size_lon: f64,
    pub datum: Datum,
}

impl GridSpec {
    pub fn new(lat_min: f64, lon_min: f64, lat_max: f64, lon_max: f64, cell_size_deg: f64, datum: Datum) -> Self {
        Self {
            lat_min,
            lon_min,
            lat_max,
            lon_max,
            cell_size_lat: cell_size_deg,
            cell_size_lon: cell_size_deg,
            datum,
        }
    }

    /// Square region of `half_extent_deg` around a center.
    pub fn centered(lat: f64, lon: f64, half_extent_deg: f64, cell_size_deg: f64, datum: Datum) -> Self {
        Self::new(
            lat - half_extent_deg,
            lon - half_extent_deg,
            lat + half_extent_deg,
            lon + half_extent_deg,
            cell_size_deg,
            datum,
        )
    }

    /// Rows and columns needed to cover the region.
    pub fn dimensions(&self) -> Result<(usize, usize)> {
        let vals = [self.lat_min, self.lon_min, self.lat_max, self.lon_max];
        if vals.iter().any(|v| !v.is_finite()) || self.lat_max <= self.lat_min || self.lon_max <= self.lon_min {
            return Err(Error::invalid("grid region is degenerate"));
        }
        if !(self.cell_size_lat > 0.0 && self.cell_size_lon > 0.0)
            || !self.cell_size_lat.is_finite()
            || !self.cell_size_lon.is_finite()
        {
            return Err(Error::invalid("cell size must be positive"));
        }
        let count = |extent: f64, size: f64| ((extent / size) - 1e-9).ceil().max(1.0);
        let rows = count(self.lat_max - self.lat_min, self.cell_size_lat);
        let cols = count(self.lon_max - self.lon_min, self.cell_size_lon);
        let total = rows * cols;
        if total > MAX_CELLS as f64 {
            return Err(Error::TooManyCells {
                count: total as u128,
                limit: MAX_CELLS,
            });
        }
        Ok((rows as usize, cols as usize))
    }
}

/// Raw arrays from which a grid is assembled and validated.
#[derive(Debug, Clone)]
pub struct GridParts {
    pub datum: Datum,
    pub lat_min: f64,
    pub lon_min: f64,
    pub cell_size_lat: f64,
    pub cell_size_lon: f64,
    pub rows: usize,
    pub cols: usize,
    pub elevation_m: Vec<f64>,
    pub land_cover: Vec<LandCoverClass>,
    pub provenance: Vec<Provenance>,
    pub features: Vec<Feature>,
}

#[derive(Debug, Clone)]
pub struct TerrainGrid {
    datum: Datum,
    region: Bbox,
    cell_size_lat: f64,
    cell_size_lon: f64,
    rows: usize,
    cols: usize,
    cells: Vec<TerrainCell>,
    features: Vec<Feature>,
    continuous_index: StrTree,
    discrete_index: Option<StrTree>,
    elevation_range: (f64, f64),
}

impl TerrainGrid {
    /// Samples elevation and land cover at every cell centroid.
    pub fn build(
        spec: &GridSpec,
        elevation: impl Fn(f64, f64) -> f64,
        land_cover: impl Fn(f64, f64) -> LandCoverClass,
    ) -> Result<Self> {
        let (rows, cols) = spec.dimensions()?;
        let mut elevation_m = Vec::with_capacity(rows * cols);
        let mut classes = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let b = cell_bbox(spec.lat_min, spec.lon_min, spec.cell_size_lat, spec.cell_size_lon, r, c);
                let centroid = b.center();
                elevation_m.push(elevation(centroid.y, centroid.x));
                classes.push(land_cover(centroid.y, centroid.x));
            }
        }
        Self::from_parts(GridParts {
            datum: spec.datum,
            lat_min: spec.lat_min,
            lon_min: spec.lon_min,
            cell_size_lat: spec.cell_size_lat,
            cell_size_lon: spec.cell_size_lon,
            rows,
            cols,
            elevation_m,
            land_cover: classes,
            provenance: vec![Provenance::BaseUsgs; rows * cols],
            features: Vec::new(),
        })
    }

    /// Constant-elevation grid with background land cover.
    pub fn flat(spec: &GridSpec, elevation_m: f64) -> Result<Self> {
        Self::build(spec, |_, _| elevation_m, |_, _| LandCoverClass::Background)
    }

    pub fn from_parts(parts: GridParts) -> Result<Self> {
        let GridParts {
            datum,
            lat_min,
            lon_min,
            cell_size_lat,
            cell_size_lon,
            rows,
            cols,
            elevation_m,
            land_cover,
            provenance,
            features,
        } = parts;

        if rows == 0 || cols == 0 {
            return Err(Error::Validation("grid must have at least one row and column".into()));
        }
        if (rows as u64).saturating_mul(cols as u64) > MAX_CELLS {
            return Err(Error::TooManyCells {
                count: rows as u128 * cols as u128,
                limit: MAX_CELLS,
            });
        }
        if !(cell_size_lat > 0.0 && cell_size_lon > 0.0 && cell_size_lat.is_finite() && cell_size_lon.is_finite()) {
            return Err(Error::Validation("cell size must be positive and finite".into()));
        }
        if !(lat_min.is_finite() && lon_min.is_finite()) {
            return Err(Error::Validation("region origin must be finite".into()));
        }
        let n = rows * cols;
        for (name, len) in [
            ("elevation_m", elevation_m.len()),
            ("land_cover", land_cover.len()),
            ("provenance", provenance.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: format!("{name} with {rows}x{cols}={n} entries"),
                    found: format!("{len} entries"),
                });
            }
        }
        if let Some(i) = elevation_m.iter().position(|e| !e.is_finite()) {
            return Err(Error::Validation(format!("elevation at cell {i} is not finite")));
        }
        let mut ids: Vec<u64> = features.iter().map(|f| f.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate feature id".into()));
        }

        let region = Bbox::new(
            lon_min,
            lat_min,
            lon_min + cols as f64 * cell_size_lon,
            lat_min + rows as f64 * cell_size_lat,
        )?;
        if region.max_y > 90.0 || region.min_y < -90.0 {
            return Err(Error::Validation("grid extends beyond the poles".into()));
        }

        let discrete_index = if features.is_empty() {
            None
        } else {
            let items = features.iter().map(|f| (f.geometry.bbox(), f.id)).collect();
            Some(StrTree::build(items, DEFAULT_NODE_CAPACITY)?)
        };

        let mut cells = Vec::with_capacity(n);
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                let b = cell_bbox(lat_min, lon_min, cell_size_lat, cell_size_lon, r, c);
                let mut cell = TerrainCell {
                    corners: [
                        Point2::new(b.min_x, b.min_y),
                        Point2::new(b.max_x, b.min_y),
                        Point2::new(b.max_x, b.max_y),
                        Point2::new(b.min_x, b.max_y),
                    ],
                    centroid: b.center(),
                    elevation_m: elevation_m[i],
                    land_cover: land_cover[i],
                    provenance: provenance[i],
                    features: Vec::new(),
                };
                if let Some(index) = &discrete_index {
                    cell.features = attribute_features(&b, index, &features)?;
                }
                cells.push(cell);
            }
        }

        let continuous_index = StrTree::build(
            cells.iter().enumerate().map(|(i, c)| (c.bbox(), i as u64)).collect(),
            DEFAULT_NODE_CAPACITY,
        )?;
        let elevation_range = elevation_m
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
                (lo.min(e), hi.max(e))
            });

        Ok(Self {
            datum,
            region,
            cell_size_lat,
            cell_size_lon,
            rows,
            cols,
            cells,
            features,
            continuous_index,
            discrete_index,
            elevation_range,
        })
    }

    /// Same grid with its discrete feature table replaced.
    pub fn with_features(self, features: Vec<Feature>) -> Result<Self> {
        let mut parts = self.into_parts();
        parts.features = features;
        Self::from_parts(parts)
    }

    pub fn into_parts(self) -> GridParts {
        GridParts {
            datum: self.datum,
            lat_min: self.region.min_y,
            lon_min: self.region.min_x,
            cell_size_lat: self.cell_size_lat,
            cell_size_lon: self.cell_size_lon,
            rows: self.rows,
            cols: self.cols,
            elevation_m: self.cells.iter().map(|c| c.elevation_m).collect(),
            land_cover: self.cells.iter().map(|c| c.land_cover).collect(),
            provenance: self.cells.iter().map(|c| c.provenance).collect(),
            features: self.features,
        }
    }

    pub fn datum(&self) -> Datum {
        self.datum
    }

    /// Covered extent; `x` is longitude, `y` latitude.
    pub fn region(&self) -> Bbox {
        self.region
    }

    /// `(lat, lon)` cell size in degrees.
    pub fn cell_size(&self) -> (f64, f64) {
        (self.cell_size_lat, self.cell_size_lon)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[TerrainCell] {
        &self.cells
    }

    pub fn cell(&self, row: usize, col: usize) -> &TerrainCell {
        &self.cells[row * self.cols + col]
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, id: u64) -> Option<&Feature> {
        self.features.iter().find(|f| f.id == id)
    }

    pub fn continuous_index(&self) -> &StrTree {
        &self.continuous_index
    }

    pub fn discrete_index(&self) -> Option<&StrTree> {
        self.discrete_index.as_ref()
    }

    /// `(min, max)` cell elevation.
    pub fn elevation_range(&self) -> (f64, f64) {
        self.elevation_range
    }

    pub fn elevations(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().map(|c| c.elevation_m)
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        self.region.contains_point(Point2::from_lat_lon(lat, lon))
    }

    fn check_inside(&self, lat: f64, lon: f64) -> Result<()> {
        if self.contains(lat, lon) {
            Ok(())
        } else {
            Err(Error::OutOfRegion { lat, lon })
        }
    }

    /// Index of the cell whose centroid is nearest in degree space.
    pub fn nearest_cell(&self, lat: f64, lon: f64) -> Result<usize> {
        self.check_inside(lat, lon)?;
        Ok(self.continuous_index.nearest(Point2::from_lat_lon(lat, lon)) as usize)
    }

    pub fn elevation_at(&self, lat: f64, lon: f64, mode: ElevationMode) -> Result<f64> {
        self.check_inside(lat, lon)?;
        match mode {
            ElevationMode::Nearest => Ok(self.cells[self.nearest_cell(lat, lon)?].elevation_m),
            ElevationMode::Bilinear => Ok(self.bilinear(lat, lon)),
        }
    }

    /// Continuous column coordinate: 0 at the first centroid, 1 at the next.
    pub(crate) fn col_coord(&self, lon: f64) -> f64 {
        (lon - self.region.min_x) / self.cell_size_lon - 0.5
    }

    pub(crate) fn row_coord(&self, lat: f64) -> f64 {
        (lat - self.region.min_y) / self.cell_size_lat - 0.5
    }

    /// Base corner and clamped offset along one axis for bilinear blending.
    pub(crate) fn blend_axis(coord: f64, n: usize) -> (usize, f64) {
        if n == 1 {
            return (0, 0.0);
        }
        let clamped = coord.clamp(0.0, (n - 1) as f64);
        let base = (clamped.floor() as usize).min(n - 2);
        (base, clamped - base as f64)
    }

    /// Corner elevations `(z00, z01, z10, z11)` of the blending patch whose
    /// lower-left centroid is `(row, col)`; indexes past the edge repeat.
    pub(crate) fn patch_corners(&self, row: usize, col: usize) -> (f64, f64, f64, f64) {
        let r1 = (row + 1).min(self.rows - 1);
        let c1 = (col + 1).min(self.cols - 1);
        (
            self.cell(row, col).elevation_m,
            self.cell(row, c1).elevation_m,
            self.cell(r1, col).elevation_m,
            self.cell(r1, c1).elevation_m,
        )
    }

    fn bilinear(&self, lat: f64, lon: f64) -> f64 {
        let (r, ty) = Self::blend_axis(self.row_coord(lat), self.rows);
        let (c, tx) = Self::blend_axis(self.col_coord(lon), self.cols);
        let (z00, z01, z10, z11) = self.patch_corners(r, c);
        let bottom = z00 + (z01 - z00) * tx;
        let top = z10 + (z11 - z10) * tx;
        bottom + (top - bottom) * ty
    }

    /// Nearest-cell attributes plus the discrete features touching that cell.
    pub fn query_point(&self, lat: f64, lon: f64) -> Result<CellInfo> {
        let idx = self.nearest_cell(lat, lon)?;
        let cell = &self.cells[idx];
        let features = match &self.discrete_index {
            Some(index) => attribute_features(&cell.bbox(), index, &self.features)?,
            None => Vec::new(),
        };
        Ok(CellInfo {
            row: idx / self.cols,
            col: idx % self.cols,
            elevation_m: cell.elevation_m,
            land_cover: cell.land_cover,
            provenance: cell.provenance,
            features,
        })
    }

    /// Whether the cell carries a base-layer water attribute.
    pub fn has_water(&self, row: usize, col: usize) -> bool {
        let cell = self.cell(row, col);
        (cell.land_cover == LandCoverClass::Waterway && cell.provenance == Provenance::BaseUsgs)
            || cell
                .features
                .iter()
                .any(|id| self.feature(*id).is_some_and(|f| f.kind == FeatureKind::Water))
    }
}

fn cell_bbox(lat_min: f64, lon_min: f64, dlat: f64, dlon: f64, row: usize, col: usize) -> Bbox {
    Bbox {
        min_x: lon_min + col as f64 * dlon,
        min_y: lat_min + row as f64 * dlat,
        max_x: lon_min + (col + 1) as f64 * dlon,
        max_y: lat_min + (row + 1) as f64 * dlat,
    }
}

fn attribute_features(cell: &Bbox, index: &StrTree, features: &[Feature]) -> Result<Vec<u64>> {
    let quad = Geometry2D::rectangle(cell)?;
    let mut out = Vec::new();
    for id in index.query_bbox(cell) {
        let f = features
            .iter()
            .find(|f| f.id == id)
            .expect("index ids come from the feature table");
        if intersects(&quad, &f.geometry)? {
            out.push(id);
        }
    }
    Ok(out)
}
