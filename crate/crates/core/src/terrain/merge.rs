use serde::{Deserialize, Serialize};

use super::{LandCoverClass, Provenance, TerrainGrid};
use crate::error::{Error, Result};

/// Per-cell land-cover classes from image segmentation, aligned with a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandCoverRaster {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, row 0 at the southern edge.
    pub classes: Vec<LandCoverClass>,
}

impl LandCoverRaster {
    pub fn new(rows: usize, cols: usize, classes: Vec<LandCoverClass>) -> Result<Self> {
        if classes.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows}x{cols} classes"),
                found: format!("{} classes", classes.len()),
            });
        }
        Ok(Self { rows, cols, classes })
    }

    pub fn filled(rows: usize, cols: usize, class: LandCoverClass) -> Self {
        Self {
            rows,
            cols,
            classes: vec![class; rows * cols],
        }
    }

    pub fn set(&mut self, row: usize, col: usize, class: LandCoverClass) {
        self.classes[row * self.cols + col] = class;
    }
}

/// Fuses a segmentation layer onto the base grid.
///
/// Elevation and discrete hydrography always come from the base. Segmented
/// buildings, woodland and roads replace the base land cover. Segmented
/// water is kept only where the base cell or one of its eight neighbours
/// already carries water; isolated water blobs (typically shadows) are
/// dropped. Any other segmented class leaves the base untouched.
pub fn merge_layers(base: &TerrainGrid, cv: &LandCoverRaster) -> Result<TerrainGrid> {
    if cv.rows != base.rows() || cv.cols != base.cols() || cv.classes.len() != cv.rows * cv.cols {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", base.rows(), base.cols()),
            found: format!("{}x{} ({} classes)", cv.rows, cv.cols, cv.classes.len()),
        });
    }

    let (rows, cols) = (base.rows(), base.cols());
    let water_near = |r: usize, c: usize| {
        (r.saturating_sub(1)..=(r + 1).min(rows - 1))
            .any(|nr| (c.saturating_sub(1)..=(c + 1).min(cols - 1)).any(|nc| base.has_water(nr, nc)))
    };

    let mut parts = base.clone().into_parts();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let accept = match cv.classes[i] {
                LandCoverClass::Building | LandCoverClass::Woodland | LandCoverClass::Road => true,
                LandCoverClass::Waterway => water_near(r, c),
                _ => false,
            };
            if accept {
                parts.land_cover[i] = cv.classes[i];
                parts.provenance[i] = Provenance::CvSegmentation;
            }
        }
    }
    TerrainGrid::from_parts(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::Datum;
    use crate::spatial_index::{Geometry2D, Point2};
    use crate::terrain::{Feature, FeatureKind, GridSpec};

    fn base() -> TerrainGrid {
        let spec = GridSpec::new(40.0, -86.0, 40.0005, -85.9995, 1e-4, Datum::Amsl);
        TerrainGrid::build(
            &spec,
            |lat, lon| 250.0 + (lat - 40.0) * 1e4 - (lon + 86.0) * 3e3,
            |_, _| LandCoverClass::Grassland,
        )
        .unwrap()
    }

    #[test]
    fn building_overwrites_grassland() {
        let b = base();
        let mut cv = LandCoverRaster::filled(5, 5, LandCoverClass::Background);
        cv.set(2, 3, LandCoverClass::Building);
        let m = merge_layers(&b, &cv).unwrap();
        assert_eq!(m.cell(2, 3).land_cover, LandCoverClass::Building);
        assert_eq!(m.cell(2, 3).provenance, Provenance::CvSegmentation);
        assert_eq!(m.cell(2, 2).land_cover, LandCoverClass::Grassland);
        assert_eq!(m.cell(2, 2).provenance, Provenance::BaseUsgs);
    }

    #[test]
    fn isolated_cv_water_is_rejected() {
        let b = base();
        let mut cv = LandCoverRaster::filled(5, 5, LandCoverClass::Background);
        cv.set(1, 1, LandCoverClass::Waterway);
        let m = merge_layers(&b, &cv).unwrap();
        assert_eq!(m.cell(1, 1).land_cover, LandCoverClass::Grassland);
        assert_eq!(m.cell(1, 1).provenance, Provenance::BaseUsgs);
    }

    #[test]
    fn cv_water_next_to_lake_is_accepted() {
        let lake = Feature {
            id: 1,
            kind: FeatureKind::Water,
            geometry: Geometry2D::polygon(vec![
                Point2::new(-85.99985, 40.00035),
                Point2::new(-85.99975, 40.00035),
                Point2::new(-85.99975, 40.00045),
                Point2::new(-85.99985, 40.00045),
            ])
            .unwrap(),
        };
        let b = base().with_features(vec![lake]).unwrap();
        assert!(b.has_water(3, 1));
        let mut cv = LandCoverRaster::filled(5, 5, LandCoverClass::Background);
        cv.set(3, 1, LandCoverClass::Waterway);
        cv.set(2, 2, LandCoverClass::Waterway); // diagonal neighbour of a lake cell
        cv.set(0, 4, LandCoverClass::Waterway); // far away
        let m = merge_layers(&b, &cv).unwrap();
        assert_eq!(m.cell(3, 1).land_cover, LandCoverClass::Waterway);
        assert_eq!(m.cell(2, 2).land_cover, LandCoverClass::Waterway);
        assert_eq!(m.cell(0, 4).land_cover, LandCoverClass::Grassland);
    }

    #[test]
    fn elevations_are_untouched() {
        let b = base();
        let cv = LandCoverRaster::new(
            5,
            5,
            (0..25)
                .map(|i| LandCoverClass::ALL[i % LandCoverClass::ALL.len()])
                .collect(),
        )
        .unwrap();
        let m = merge_layers(&b, &cv).unwrap();
        let before: Vec<u64> = b.elevations().map(f64::to_bits).collect();
        let after: Vec<u64> = m.elevations().map(f64::to_bits).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn dimension_mismatch() {
        let cv = LandCoverRaster::filled(4, 5, LandCoverClass::Road);
        assert!(matches!(
            merge_layers(&base(), &cv),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
