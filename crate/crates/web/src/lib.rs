//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Three operations are exposed: segmenting a synthetic scan with adjustable
//! pipeline settings, reading its biomarkers back, and classifying a point of
//! the (mCNV area, total area) plane with the rule tables.

use octa_core::phantom::{healthy_phantom, lesion_phantom, rule_region_dataset, PhantomCase, PhantomParams, DEFAULT_REGION_COUNTS};
use octa_core::segmentation::region_fill;
use octa_core::whitebox::{apply_cuts, discretize_supervised, vote_name, Cuts, Ensemble, RuleInput, RuleSet};
use octa_core::{
    overlap, pixel_geometry, record_from_mask, run_pipeline, BinaryMask, BiomarkerRecord, CropRect, Label,
    PipelineConfig, PixelGeometry,
};
use wasm_bindgen::prelude::*;

/// Biomarkers of the current mask and its agreement with the phantom truth.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub object_pixels: usize,
    pub filled_pixels: usize,
    pub mcnv_area_mm2: f64,
    pub total_area_mm2: f64,
    pub vessel_density: f64,
    pub dice: f64,
    pub jaccard: f64,
}

#[wasm_bindgen]
pub struct Demo {
    case: PhantomCase,
    geom: PixelGeometry,
    mask: BinaryMask,
}

impl Demo {
    pub fn try_new(seed: u32, size: usize, healthy: bool) -> octa_core::Result<Demo> {
        let params = PhantomParams {
            size,
            ..Default::default()
        };
        let case = if healthy {
            healthy_phantom(&params, seed as u64)?
        } else {
            lesion_phantom(&params, seed as u64)?
        };
        let geom = pixel_geometry(params.scan_size_um, size)?;
        let mask = BinaryMask::empty(size, size, params.scan_size_um)?;
        Ok(Demo { case, geom, mask })
    }

    pub fn try_segment(&mut self, sigma: f64, otsu_cap: u8, binary_threshold: u8) -> octa_core::Result<Readout> {
        let cfg = PipelineConfig {
            gaussian_sigma: sigma,
            otsu_cap,
            binary_threshold,
            ..Default::default()
        };
        self.mask = run_pipeline(&self.case.image, &cfg, &CropRect::full(&self.case.image))?;
        let rec = record_from_mask("demo", &self.mask, &self.geom)?;
        let o = overlap(&self.mask, &self.case.truth)?;
        Ok(Readout {
            object_pixels: rec.object_pixels,
            filled_pixels: rec.filled_pixels,
            mcnv_area_mm2: rec.mcnv_area_mm2,
            total_area_mm2: rec.total_area_mm2,
            vessel_density: rec.vessel_density,
            dice: o.dice,
            jaccard: o.jaccard_index,
        })
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, size: usize, healthy: bool) -> Result<Demo, JsError> {
        Self::try_new(seed, size, healthy).map_err(|e| JsError::new(&e.to_string()))
    }

    pub fn size(&self) -> usize {
        self.case.image.width()
    }

    /// Runs the pipeline with the given settings, keeping the mask for
    /// [`Demo::overlay_rgba`].
    pub fn segment(&mut self, sigma: f64, otsu_cap: u8, binary_threshold: u8) -> Result<Readout, JsError> {
        self.try_segment(sigma, otsu_cap, binary_threshold)
            .map_err(|e| JsError::new(&e.to_string()))
    }

    /// The scan as RGBA bytes.
    pub fn image_rgba(&self) -> Vec<u8> {
        self.case.image.pixels().iter().flat_map(|&g| [g, g, g, 255]).collect()
    }

    /// Scan darkened, segmented vessel in green, filled holes in amber.
    pub fn overlay_rgba(&self) -> Vec<u8> {
        let filled = region_fill(&self.mask);
        self.case
            .image
            .pixels()
            .iter()
            .zip(self.mask.pixels().iter().zip(filled.pixels()))
            .flat_map(|(&g, (&on, &fill))| {
                let d = g / 3;
                if on {
                    [d, 200, d, 255]
                } else if fill {
                    [230, 160, 20, 255]
                } else {
                    [d, d, d, 255]
                }
            })
            .collect()
    }
}

fn demo_cuts() -> Cuts {
    let data = rule_region_dataset(DEFAULT_REGION_COUNTS, 11);
    let (records, labels): (Vec<BiomarkerRecord>, Vec<Label>) = data.into_iter().unzip();
    discretize_supervised(&records, &labels).expect("region data has both labels")
}

/// Votes for one point of the area plane.
#[wasm_bindgen]
pub struct Verdict {
    dt: String,
    dt_rule: String,
    svm: String,
    dl: String,
    ensemble: String,
}

#[wasm_bindgen]
impl Verdict {
    pub fn dt(&self) -> String {
        self.dt.clone()
    }
    pub fn dt_rule(&self) -> String {
        self.dt_rule.clone()
    }
    pub fn svm(&self) -> String {
        self.svm.clone()
    }
    pub fn dl(&self) -> String {
        self.dl.clone()
    }
    pub fn ensemble(&self) -> String {
        self.ensemble.clone()
    }
}

/// Classifies areas (mm²) with the decision-tree table, the SVM and DL rules
/// on bins learned from the rule-region data, and their ensemble.
#[wasm_bindgen]
pub fn classify_areas(mcnv_area_mm2: f64, total_area_mm2: f64) -> Verdict {
    let rec = BiomarkerRecord::from_areas("point", mcnv_area_mm2, total_area_mm2);
    let bins = apply_cuts(&rec, &demo_cuts());
    let input = RuleInput::from_record(&rec, Some(bins));
    let ensemble = Ensemble::default();
    let v = ensemble.classify(&input).expect("areas and bins are both present");
    let dt_rule = ensemble
        .dt
        .matching_rule(&input)
        .ok()
        .flatten()
        .map_or_else(String::new, |r| r.name.clone());
    Verdict {
        dt: vote_name(v.dt),
        dt_rule,
        svm: vote_name(v.svm),
        dl: vote_name(v.dl),
        ensemble: v.ensemble.to_string(),
    }
}

/// RGBA map of the decision-tree table over `[0, max_area]²`, mCNV area on
/// the x axis and total area upwards. Points with total < mCNV are grey.
#[wasm_bindgen]
pub fn rule_plane_rgba(width: usize, height: usize, max_area: f64) -> Vec<u8> {
    let table = RuleSet::decision_tree_table();
    let mut out = Vec::with_capacity(width * height * 4);
    for row in 0..height {
        let v = max_area * (height - 1 - row) as f64 / (height.max(2) - 1) as f64;
        for col in 0..width {
            let m = max_area * col as f64 / (width.max(2) - 1) as f64;
            let px = if v < m {
                [60, 60, 60, 255]
            } else {
                match table.classify(&RuleInput::areas(m, v)) {
                    Ok(Some(Label::Sick)) => [200, 70, 60, 255],
                    Ok(Some(Label::NotSick)) => [60, 110, 200, 255],
                    _ => [0, 0, 0, 255],
                }
            };
            out.extend_from_slice(&px);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_marks_vessel_and_holes() {
        let mut d = Demo::try_new(5, 96, false).unwrap();
        d.try_segment(1.0, 170, 127).unwrap();
        let on = d.mask.pixels().iter().filter(|&&p| p).count();
        let rgba = d.overlay_rgba();
        let green = rgba.chunks(4).filter(|p| p[1] == 200 && p[0] < 200).count();
        assert_eq!(green, on);
    }

    #[test]
    fn demo_cuts_are_ordered() {
        let c = demo_cuts();
        assert!(c.m_cut1 < c.m_cut2 && c.v_cut1 < c.v_cut2, "{c:?}");
    }
}
