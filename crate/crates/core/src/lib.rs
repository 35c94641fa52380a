//! Segmentation of choroidal neovascularization in grayscale OCTA scans,
//! lesion biomarkers, section-stack volumetry with STL export, and
//! rule-based Sick/NotSick classification.

pub mod biomarkers;
pub mod error;
pub mod image;
pub mod metrics;
pub mod phantom;
pub mod segmentation;
pub mod volume;
pub mod whitebox;

pub use biomarkers::{extract_record, mcnv_area, record_from_mask, total_area, vessel_density, BiomarkerRecord};
pub use error::{Error, Result};
pub use image::{
    crop, gaussian_blur, load_gray, load_mask, pixel_geometry, save_gray, save_mask, BinaryMask, CropRect,
    GeometryConfig, GrayImage, PixelGeometry,
};
pub use metrics::{overlap, OverlapReport};
pub use segmentation::{run_pipeline, run_pipeline_stages, Connectivity, LabelMap, PipelineConfig};
pub use volume::{export_stl, mesh_volume, stack_volume, voxel_surface, SectionStack, TriangleMesh};
pub use whitebox::Label;
