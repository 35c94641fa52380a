use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use octa_core::phantom::{healthy_phantom, lesion_phantom, lesion_stack, PhantomCase, PhantomParams};
use octa_core::{save_gray, save_mask, GeometryConfig, Label};

use crate::manifest::{DatasetManifest, ManifestEntry, StackRef};

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomOptions {
    pub lesions: usize,
    pub healthy: usize,
    /// Sections per visit of the two-visit stack; 0 for no stack.
    pub stack_sections: usize,
    /// Lesion scale of the second visit relative to the first.
    pub followup_scale: f64,
    pub params: PhantomParams,
}

impl Default for PhantomOptions {
    fn default() -> Self {
        Self {
            lesions: 20,
            healthy: 0,
            stack_sections: 0,
            followup_scale: 0.85,
            params: PhantomParams::default(),
        }
    }
}

fn write_case(dir: &Path, id: &str, case: &PhantomCase) -> Result<(PathBuf, PathBuf)> {
    let image = PathBuf::from("images").join(format!("{id}.pgm"));
    let truth = PathBuf::from("truth").join(format!("{id}.pgm"));
    save_gray(&case.image, dir.join(&image))?;
    save_mask(&case.truth, dir.join(&truth))?;
    Ok((image, truth))
}

/// Writes a synthetic dataset (images, ground-truth masks and
/// `manifest.json`) into `dir`. Phantom `i` of each kind uses a seed derived
/// from `seed` and `i`, so the dataset is fully determined by `seed`.
/// Returns the manifest as loaded back, with resolved paths.
pub fn cmd_phantom(dir: &Path, opts: &PhantomOptions, seed: u64) -> Result<DatasetManifest> {
    fs::create_dir_all(dir.join("images")).with_context(|| format!("creating {}", dir.display()))?;
    fs::create_dir_all(dir.join("truth"))?;
    let mut entries = Vec::new();
    let mut push = |id: String, case: &PhantomCase, label, stack| -> Result<()> {
        let (path, annotation) = write_case(dir, &id, case)?;
        entries.push(ManifestEntry {
            image_id: id,
            path,
            crop: None,
            label,
            annotation: Some(annotation),
            stack,
        });
        Ok(())
    };

    for i in 0..opts.lesions {
        let case = lesion_phantom(&opts.params, seed.wrapping_mul(1000).wrapping_add(i as u64))?;
        push(format!("lesion_{i:03}"), &case, Some(Label::Sick), None)?;
    }
    for i in 0..opts.healthy {
        let case = healthy_phantom(&opts.params, seed.wrapping_mul(1000).wrapping_add(500 + i as u64))?;
        push(format!("healthy_{i:03}"), &case, Some(Label::NotSick), None)?;
    }
    if opts.stack_sections > 0 {
        for (visit, scale) in [("visit1", 1.0), ("visit2", opts.followup_scale)] {
            let cases = lesion_stack(&opts.params, opts.stack_sections, scale, seed)?;
            for (k, case) in cases.iter().enumerate() {
                let stack = StackRef {
                    group: visit.into(),
                    section: k,
                };
                push(format!("{visit}_s{k:03}"), case, None, Some(stack))?;
            }
        }
    }

    let manifest = DatasetManifest {
        geometry: GeometryConfig {
            scan_size_um: opts.params.scan_size_um,
            pixels_per_side: opts.params.size,
        },
        entries,
        ..Default::default()
    };
    let path = dir.join("manifest.json");
    manifest.save(&path)?;
    DatasetManifest::load(&path)
}
