//! Lesion area, filled (total) area and vessel density of a segmented mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, CropRect, GrayImage, PixelGeometry};
use crate::segmentation::{region_fill, run_pipeline, PipelineConfig};

/// Per-image quantitative features. Areas are in mm².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiomarkerRecord {
    pub image_id: String,
    pub object_pixels: usize,
    pub filled_pixels: usize,
    pub mcnv_area_mm2: f64,
    pub total_area_mm2: f64,
    pub vessel_density: f64,
    /// Set when the segmented mask has no object pixels.
    #[serde(default)]
    pub empty: bool,
}

impl BiomarkerRecord {
    /// Record from already-known areas, e.g. when reading features back from
    /// a CSV or generating synthetic training data.
    pub fn from_areas(image_id: impl Into<String>, mcnv_area_mm2: f64, total_area_mm2: f64) -> Self {
        let vessel_density = if total_area_mm2 > 0.0 {
            (mcnv_area_mm2 / total_area_mm2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Self {
            image_id: image_id.into(),
            object_pixels: 0,
            filled_pixels: 0,
            mcnv_area_mm2,
            total_area_mm2,
            vessel_density,
            empty: total_area_mm2 <= 0.0,
        }
    }

    pub fn mcnv_area_um2(&self) -> f64 {
        self.mcnv_area_mm2 * 1e6
    }

    pub fn total_area_um2(&self) -> f64 {
        self.total_area_mm2 * 1e6
    }
}

/// Object pixel count times the area of one pixel.
pub fn mcnv_area(mask: &BinaryMask, geom: &PixelGeometry) -> f64 {
    mask.count() as f64 * geom.pixel_area_mm2
}

/// Area of the mask after its enclosed holes are filled.
pub fn total_area(mask: &BinaryMask, geom: &PixelGeometry) -> f64 {
    mcnv_area(&region_fill(mask), geom)
}

/// `mcnv / total`, or 0 for an empty lesion.
pub fn vessel_density(mcnv: f64, total: f64) -> Result<f64> {
    if mcnv < 0.0 || total < mcnv {
        return Err(Error::InconsistentAreas { mcnv, total });
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(mcnv / total)
}

/// Features of an already segmented mask.
pub fn record_from_mask(
    image_id: impl Into<String>,
    mask: &BinaryMask,
    geom: &PixelGeometry,
) -> Result<BiomarkerRecord> {
    let filled = region_fill(mask);
    let object_pixels = mask.count();
    let filled_pixels = filled.count();
    let mcnv = object_pixels as f64 * geom.pixel_area_mm2;
    let total = filled_pixels as f64 * geom.pixel_area_mm2;
    Ok(BiomarkerRecord {
        image_id: image_id.into(),
        object_pixels,
        filled_pixels,
        mcnv_area_mm2: mcnv,
        total_area_mm2: total,
        vessel_density: vessel_density(mcnv, total)?,
        empty: object_pixels == 0,
    })
}

/// Segments `img` and measures the result.
pub fn extract_record(
    image_id: impl Into<String>,
    img: &GrayImage,
    cfg: &PipelineConfig,
    rect: &CropRect,
    geom: &PixelGeometry,
) -> Result<BiomarkerRecord> {
    let mask = run_pipeline(img, cfg, rect)?;
    record_from_mask(image_id, &mask, geom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::pixel_geometry;

    fn geom() -> PixelGeometry {
        pixel_geometry(200.0, 510).unwrap()
    }

    #[test]
    fn measurement_table_pixel_count() {
        let g = geom();
        let area = 112_037.0 * g.pixel_area_mm2;
        assert!((area - 0.017230).abs() < 5e-6, "{area}");
        let full = BinaryMask::from_fn(510, 510, 200.0, |_, _| true).unwrap();
        assert!((mcnv_area(&full, &g) - 0.0400).abs() < 1e-12);
        let empty = BinaryMask::empty(510, 510, 200.0).unwrap();
        assert_eq!(mcnv_area(&empty, &g), 0.0);
        assert_eq!(total_area(&empty, &g), 0.0);
    }

    #[test]
    fn donut_total_area() {
        // 5x5 block with a plus-shaped 5-pixel hole: 20 ring pixels.
        let hole = |x: usize, y: usize| (x == 3 && (2..=4).contains(&y)) || (y == 3 && (2..=4).contains(&x));
        let m = BinaryMask::from_fn(7, 7, 7.0, |x, y| {
            (1..6).contains(&x) && (1..6).contains(&y) && !hole(x, y)
        })
        .unwrap();
        assert_eq!(m.count(), 20);
        let g = pixel_geometry(7.0, 7).unwrap();
        assert!((total_area(&m, &g) - 25.0 * g.pixel_area_mm2).abs() < 1e-18);
        let r = record_from_mask("donut", &m, &g).unwrap();
        assert_eq!((r.object_pixels, r.filled_pixels), (20, 25));
        assert!((r.vessel_density - 0.8).abs() < 1e-12);

        let solid = BinaryMask::from_fn(7, 7, 7.0, |x, y| (1..6).contains(&x) && (1..6).contains(&y)).unwrap();
        assert_eq!(total_area(&solid, &g), mcnv_area(&solid, &g));
        assert_eq!(record_from_mask("solid", &solid, &g).unwrap().vessel_density, 1.0);
    }

    #[test]
    fn density_edge_cases() {
        assert_eq!(vessel_density(0.02, 0.04).unwrap(), 0.5);
        assert_eq!(vessel_density(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(vessel_density(0.03, 0.03).unwrap(), 1.0);
        assert!(vessel_density(0.05, 0.04).is_err());
    }
}
