use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use octa_core::volume::VolumeMeasurement;
use octa_core::{export_stl, voxel_surface, SectionStack};
use serde::{Deserialize, Serialize};

use crate::batch::{par_map, segment, EntryOutcome, EntryStatus, RunReport};
use crate::config::RunConfig;
use crate::manifest::DatasetManifest;

/// One row of the volume table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub visit: String,
    pub sections: usize,
    pub distance_um: f64,
    pub pixels: usize,
    pub volume_um3: f64,
    pub stl: Option<PathBuf>,
}

/// Renders rows with the columns Visit, Sections, Distance, Pixels, Volume.
pub fn format_table(rows: &[VolumeRow]) -> String {
    let visit_w = rows.iter().map(|r| r.visit.len()).max().unwrap_or(0).max(5);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<visit_w$} | {:>8} | {:>13} | {:>10} | {:>16}",
        "Visit", "Sections", "Distance (µm)", "Pixels", "Volume (µm³)"
    );
    let _ = writeln!(s, "{}", "-".repeat(visit_w + 60));
    for r in rows {
        let _ = writeln!(
            s,
            "{:<visit_w$} | {:>8} | {:>13} | {:>10} | {:>16.1}",
            r.visit, r.sections, r.distance_um, r.pixels, r.volume_um3
        );
    }
    s
}

fn stack_for_group(manifest: &DatasetManifest, cfg: &RunConfig, group: &str, jobs: usize) -> Result<SectionStack> {
    let groups = manifest.stack_groups();
    let Some(members) = groups.get(group) else {
        bail!("stack group {group:?} is not in the manifest");
    };
    let masks = par_map(members, jobs, |e| {
        segment(manifest, cfg, e).with_context(|| format!("section {} ({})", e.stack.as_ref().map_or(0, |s| s.section), e.image_id))
    })?;
    let masks = masks.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SectionStack::new(masks, manifest.slice_distance_um)?)
}

/// Segments each requested stack group (all groups when `groups` is empty),
/// writes `<group>.stl` for non-empty volumes, `volume.csv` and
/// `volume_report.json`.
pub fn cmd_volume(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    groups: &[String],
    out: &Path,
    jobs: usize,
) -> Result<(Vec<VolumeRow>, RunReport)> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let geom = manifest.geometry.pixel_geometry()?;
    let wanted: Vec<String> = if groups.is_empty() {
        manifest.stack_groups().keys().map(|g| g.to_string()).collect()
    } else {
        groups.to_vec()
    };
    if wanted.is_empty() {
        log::warn!("manifest has no stack groups");
    }

    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for group in &wanted {
        let stack = match stack_for_group(manifest, cfg, group, jobs) {
            Ok(s) => s,
            Err(err) => {
                outcomes.push(EntryOutcome {
                    image_id: group.clone(),
                    status: EntryStatus::Failed,
                    message: Some(format!("{err:#}")),
                    outputs: Vec::new(),
                });
                log::error!("{group}: {err:#}");
                continue;
            }
        };
        let m = VolumeMeasurement::of(&stack, &geom);
        let stl = if m.pixels == 0 {
            log::warn!("{group}: no object voxels, volume is 0 and no STL is written");
            None
        } else {
            let path = out.join(format!("{group}.stl"));
            export_stl(&voxel_surface(&stack, &geom), &path)?;
            Some(path)
        };
        outcomes.push(EntryOutcome {
            image_id: group.clone(),
            status: EntryStatus::Ok,
            message: None,
            outputs: stl.iter().cloned().collect(),
        });
        rows.push(VolumeRow {
            visit: group.clone(),
            sections: m.sections,
            distance_um: m.distance_um,
            pixels: m.pixels,
            volume_um3: m.volume_um3,
            stl,
        });
    }

    let csv_path = out.join("volume.csv");
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record(["visit", "sections", "distance_um", "pixels", "volume_um3"])?;
    for r in &rows {
        w.write_record([
            r.visit.clone(),
            r.sections.to_string(),
            r.distance_um.to_string(),
            r.pixels.to_string(),
            format!("{:.1}", r.volume_um3),
        ])?;
    }
    w.flush()?;

    let report = RunReport::new("volume", cfg, outcomes);
    report.write(out)?;
    Ok((rows, report))
}
