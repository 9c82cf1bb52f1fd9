//! Versioned JSON grid files.
//!
//! ```json
//! { "version": 1, "datum": "AMSL", "region": [lat0, lon0, lat1, lon1],
//!   "cell_size_deg": [dlat, dlon], "rows": R, "cols": C,
//!   "elevation_m": [...], "land_cover": [...], "provenance": [...],
//!   "features": [{ "id": 1, "kind": "road", "geometry": {...} }] }
//! ```
//!
//! Arrays are row-major with row 0 at the southern edge. Floats are written
//! in shortest round-trip form so elevations survive a save/load bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Feature, GridParts, LandCoverClass, Provenance, TerrainGrid};
use crate::error::{Error, Result};
use crate::geodesy::Datum;

pub const GRID_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    version: u32,
    datum: Datum,
    region: [f64; 4],
    cell_size_deg: [f64; 2],
    rows: usize,
    cols: usize,
    elevation_m: Vec<f64>,
    land_cover: Vec<u8>,
    provenance: Vec<u8>,
    #[serde(default)]
    features: Vec<Feature>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

pub fn write_grid(grid: &TerrainGrid, writer: impl Write) -> Result<()> {
    let r = grid.region();
    let (dlat, dlon) = grid.cell_size();
    let file = GridFile {
        version: GRID_FILE_VERSION,
        datum: grid.datum(),
        region: [r.min_y, r.min_x, r.max_y, r.max_x],
        cell_size_deg: [dlat, dlon],
        rows: grid.rows(),
        cols: grid.cols(),
        elevation_m: grid.elevations().collect(),
        land_cover: grid.cells().iter().map(|c| c.land_cover.code()).collect(),
        provenance: grid.cells().iter().map(|c| c.provenance.code()).collect(),
        features: grid.features().to_vec(),
    };
    serde_json::to_writer(writer, &file).map_err(Error::from_json)
}

pub fn read_grid(mut reader: impl Read) -> Result<TerrainGrid> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;

    let probe: VersionProbe = serde_json::from_str(&text).map_err(Error::from_json)?;
    if probe.version != GRID_FILE_VERSION {
        return Err(Error::UnsupportedVersion(probe.version));
    }
    let file: GridFile = serde_json::from_str(&text).map_err(Error::from_json)?;

    let n = file
        .rows
        .checked_mul(file.cols)
        .ok_or_else(|| Error::Validation("rows*cols overflows".into()))?;
    if file.elevation_m.len() != n || file.land_cover.len() != n || file.provenance.len() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}={} entries per array", file.rows, file.cols, n),
            found: format!(
                "elevation_m={}, land_cover={}, provenance={}",
                file.elevation_m.len(),
                file.land_cover.len(),
                file.provenance.len()
            ),
        });
    }
    let land_cover = file
        .land_cover
        .iter()
        .map(|&c| LandCoverClass::from_code(c).ok_or_else(|| Error::Validation(format!("unknown land cover code {c}"))))
        .collect::<Result<Vec<_>>>()?;
    let provenance = file
        .provenance
        .iter()
        .map(|&c| Provenance::from_code(c).ok_or_else(|| Error::Validation(format!("unknown provenance code {c}"))))
        .collect::<Result<Vec<_>>>()?;

    let [lat0, lon0, lat1, lon1] = file.region;
    let [dlat, dlon] = file.cell_size_deg;
    let consistent = |lo: f64, hi: f64, size: f64, count: usize| {
        ((lo + count as f64 * size) - hi).abs() <= 1e-6 * size.abs().max(f64::MIN_POSITIVE)
    };
    if !consistent(lat0, lat1, dlat, file.rows) || !consistent(lon0, lon1, dlon, file.cols) {
        return Err(Error::Validation(
            "region does not match rows/cols times cell size".into(),
        ));
    }

    TerrainGrid::from_parts(GridParts {
        datum: file.datum,
        lat_min: lat0,
        lon_min: lon0,
        cell_size_lat: dlat,
        cell_size_lon: dlon,
        rows: file.rows,
        cols: file.cols,
        elevation_m: file.elevation_m,
        land_cover,
        provenance,
        features: file.features,
    })
}

pub fn save_grid(grid: &TerrainGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_grid(grid, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<TerrainGrid> {
    read_grid(BufReader::new(File::open(path)?))
}
