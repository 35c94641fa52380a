//! Per-entry commands: segmentation, feature extraction and agreement with
//! annotations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use octa_core::metrics::{aggregate, AggregateOverlap};
use octa_core::{
    load_gray, load_mask, overlap, record_from_mask, run_pipeline, run_pipeline_stages, save_gray, save_mask,
    BinaryMask, CropRect, Label, OverlapReport,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::manifest::{DatasetManifest, ManifestEntry};

/// Maps `f` over `items` on at most `jobs` threads (0 means one per core).
/// Results keep the input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker pool")?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryOutcome {
    pub image_id: String,
    pub status: EntryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<PathBuf>,
}

impl EntryOutcome {
    fn ok(image_id: &str, outputs: Vec<PathBuf>) -> Self {
        Self {
            image_id: image_id.into(),
            status: EntryStatus::Ok,
            message: None,
            outputs,
        }
    }

    fn failed(image_id: &str, err: &anyhow::Error) -> Self {
        log::error!("{image_id}: {err:#}");
        Self {
            image_id: image_id.into(),
            status: EntryStatus::Failed,
            message: Some(format!("{err:#}")),
            outputs: Vec::new(),
        }
    }

    fn skipped(image_id: &str, why: &str) -> Self {
        log::warn!("{image_id}: skipped, {why}");
        Self {
            image_id: image_id.into(),
            status: EntryStatus::Skipped,
            message: Some(why.into()),
            outputs: Vec::new(),
        }
    }
}

/// Machine-readable account of one command run, in manifest order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config_hash: String,
    pub entries: Vec<EntryOutcome>,
    pub failed: usize,
}

impl RunReport {
    pub fn new(command: &str, cfg: &RunConfig, entries: Vec<EntryOutcome>) -> Self {
        let failed = entries.iter().filter(|e| e.status == EntryStatus::Failed).count();
        Self {
            command: command.into(),
            config_hash: cfg.hash(),
            entries,
            failed,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}_report.json", self.command));
        write_json(&path, self)?;
        Ok(path)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn segment(manifest: &DatasetManifest, cfg: &RunConfig, entry: &ManifestEntry) -> Result<BinaryMask> {
    let img = load_gray(&entry.path, manifest.geometry.scan_size_um)?;
    let rect = entry.crop.unwrap_or_else(|| CropRect::full(&img));
    Ok(run_pipeline(&img, &cfg.pipeline, &rect)?)
}

fn process_entry(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    entry: &ManifestEntry,
    out: &Path,
    dump_stages: bool,
) -> Result<Vec<PathBuf>> {
    let img = load_gray(&entry.path, manifest.geometry.scan_size_um)?;
    let rect = entry.crop.unwrap_or_else(|| CropRect::full(&img));
    let mut outputs = Vec::new();
    let mask = if dump_stages {
        let stages = run_pipeline_stages(&img, &cfg.pipeline, &rect)?;
        let dir = out.join("stages").join(&entry.image_id);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, stage) in stages.dump_images() {
            let path = dir.join(format!("{name}.pgm"));
            save_gray(&stage, &path)?;
            outputs.push(path);
        }
        stages.result
    } else {
        run_pipeline(&img, &cfg.pipeline, &rect)?
    };
    let path = out.join("masks").join(format!("{}.pgm", entry.image_id));
    save_mask(&mask, &path)?;
    outputs.insert(0, path);
    Ok(outputs)
}

/// Segments every entry and writes `masks/<id>.pgm` (plus `stages/<id>/`
/// with `dump_stages`) and `process_report.json` under `out`.
pub fn cmd_process(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    out: &Path,
    jobs: usize,
    dump_stages: bool,
) -> Result<RunReport> {
    fs::create_dir_all(out.join("masks")).with_context(|| format!("creating {}", out.display()))?;
    let entries = par_map(&manifest.entries, jobs, |e| {
        match process_entry(manifest, cfg, e, out, dump_stages) {
            Ok(outputs) => EntryOutcome::ok(&e.image_id, outputs),
            Err(err) => EntryOutcome::failed(&e.image_id, &err),
        }
    })?;
    let report = RunReport::new("process", cfg, entries);
    report.write(out)?;
    Ok(report)
}

/// One row of the features CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub image_id: String,
    pub object_pixels: usize,
    pub filled_pixels: usize,
    pub mcnv_area_mm2: f64,
    pub total_area_mm2: f64,
    pub vessel_density: f64,
    pub config_hash: String,
    pub label: Option<Label>,
}

pub const FEATURE_COLUMNS: [&str; 8] = [
    "image_id",
    "object_pixels",
    "filled_pixels",
    "mcnv_area_mm2",
    "total_area_mm2",
    "vessel_density",
    "config_hash",
    "label",
];

pub fn write_features(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    w.write_record(FEATURE_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        rows.push(rec.with_context(|| format!("{} row {}", path.display(), i + 1))?);
    }
    Ok(rows)
}

/// Extracts biomarkers for every entry into `features.csv`.
pub fn cmd_features(manifest: &DatasetManifest, cfg: &RunConfig, out: &Path, jobs: usize) -> Result<(Vec<FeatureRow>, RunReport)> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let geom = manifest.geometry.pixel_geometry()?;
    let hash = cfg.hash();
    let results = par_map(&manifest.entries, jobs, |e| -> Result<FeatureRow> {
        let mask = segment(manifest, cfg, e)?;
        let rec = record_from_mask(&e.image_id, &mask, &geom)?;
        Ok(FeatureRow {
            image_id: rec.image_id,
            object_pixels: rec.object_pixels,
            filled_pixels: rec.filled_pixels,
            mcnv_area_mm2: rec.mcnv_area_mm2,
            total_area_mm2: rec.total_area_mm2,
            vessel_density: rec.vessel_density,
            config_hash: hash.clone(),
            label: e.label,
        })
    })?;
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    let csv_path = out.join("features.csv");
    for (e, res) in manifest.entries.iter().zip(results) {
        match res {
            Ok(row) => {
                rows.push(row);
                outcomes.push(EntryOutcome::ok(&e.image_id, vec![csv_path.clone()]));
            }
            Err(err) => outcomes.push(EntryOutcome::failed(&e.image_id, &err)),
        }
    }
    write_features(&csv_path, &rows)?;
    let report = RunReport::new("features", cfg, outcomes);
    report.write(out)?;
    Ok((rows, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageAgreement {
    pub image_id: String,
    #[serde(flatten)]
    pub overlap: OverlapReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config_hash: String,
    pub images: Vec<ImageAgreement>,
    pub aggregate: Option<AggregateOverlap>,
}

fn evaluate_entry(manifest: &DatasetManifest, cfg: &RunConfig, e: &ManifestEntry, annotation: &Path) -> Result<OverlapReport> {
    let mask = segment(manifest, cfg, e)?;
    let truth = load_mask(annotation, mask.scan_size_um())?;
    overlap(&mask, &truth).map_err(|err| anyhow!("annotation {}: {err}", annotation.display()))
}

/// Compares pipeline masks with the annotated masks; writes
/// `evaluation.json` (per image plus mean and pooled aggregates) and
/// `evaluation.csv`.
pub fn cmd_evaluate(manifest: &DatasetManifest, cfg: &RunConfig, out: &Path, jobs: usize) -> Result<(EvaluationReport, RunReport)> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let results = par_map(&manifest.entries, jobs, |e| {
        e.annotation.as_ref().map(|a| evaluate_entry(manifest, cfg, e, a))
    })?;
    let mut images = Vec::new();
    let mut outcomes = Vec::new();
    for (e, res) in manifest.entries.iter().zip(results) {
        match res {
            None => outcomes.push(EntryOutcome::skipped(&e.image_id, "no annotation")),
            Some(Ok(o)) => {
                images.push(ImageAgreement {
                    image_id: e.image_id.clone(),
                    overlap: o,
                });
                outcomes.push(EntryOutcome::ok(&e.image_id, Vec::new()));
            }
            Some(Err(err)) => outcomes.push(EntryOutcome::failed(&e.image_id, &err)),
        }
    }
    let overlaps: Vec<OverlapReport> = images.iter().map(|i| i.overlap.clone()).collect();
    let report = EvaluationReport {
        config_hash: cfg.hash(),
        aggregate: aggregate(&overlaps),
        images,
    };
    write_json(&out.join("evaluation.json"), &report)?;

    let csv_path = out.join("evaluation.csv");
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record(["image_id", "intersection_px", "union_px", "jaccard_index", "dice"])?;
    for i in &report.images {
        w.write_record([
            i.image_id.clone(),
            i.overlap.intersection_px.to_string(),
            i.overlap.union_px.to_string(),
            i.overlap.jaccard_index.to_string(),
            i.overlap.dice.to_string(),
        ])?;
    }
    w.flush()?;

    let run = RunReport::new("evaluate", cfg, outcomes);
    run.write(out)?;
    Ok((report, run))
}
