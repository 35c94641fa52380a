use std::fs;
use std::path::Path;
use std::process::Command;

use octa_cli::batch::{read_features, write_features, FeatureRow};
use octa_cli::manifest::{ManifestEntry, StackRef};
use octa_cli::{
    cmd_classify, cmd_evaluate, cmd_features, cmd_phantom, cmd_process, cmd_volume, DatasetManifest, EntryStatus,
    PhantomOptions, RunConfig,
};
use octa_core::phantom::PhantomParams;
use octa_core::{save_gray, save_mask, BinaryMask, GrayImage, Label};

fn small(lesions: usize, healthy: usize, sections: usize) -> PhantomOptions {
    PhantomOptions {
        lesions,
        healthy,
        stack_sections: sections,
        params: PhantomParams {
            size: 160,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn manifest_at(dir: &Path, manifest: &DatasetManifest) -> std::path::PathBuf {
    let path = dir.join("manifest.json");
    manifest.save(&path).unwrap();
    path
}

#[test]
fn process_writes_masks_and_stage_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let m = cmd_phantom(&tmp.path().join("data"), &small(3, 0, 0), 1).unwrap();
    let out = tmp.path().join("out");
    let report = cmd_process(&m, &RunConfig::default(), &out, 2, true).unwrap();
    assert_eq!(report.failed, 0);
    assert_eq!(report.entries.len(), 3);
    for e in &m.entries {
        assert!(out.join("masks").join(format!("{}.pgm", e.image_id)).is_file());
        let stages = fs::read_dir(out.join("stages").join(&e.image_id)).unwrap().count();
        assert_eq!(stages, 8);
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("process_report.json")).unwrap()).unwrap();
    assert_eq!(json["config_hash"], RunConfig::default().hash());
}

#[test]
fn missing_file_fails_only_that_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let mut m = cmd_phantom(&tmp.path().join("data"), &small(2, 0, 0), 2).unwrap();
    m.entries.insert(
        1,
        ManifestEntry {
            image_id: "ghost".into(),
            path: tmp.path().join("nope.pgm"),
            crop: None,
            label: None,
            annotation: None,
            stack: None,
        },
    );
    let report = cmd_process(&m, &RunConfig::default(), &tmp.path().join("out"), 0, false).unwrap();
    assert_eq!(report.failed, 1);
    let status: Vec<EntryStatus> = report.entries.iter().map(|e| e.status).collect();
    assert_eq!(status, [EntryStatus::Ok, EntryStatus::Failed, EntryStatus::Ok]);
    assert_eq!(report.entries[1].image_id, "ghost");
}

#[test]
fn features_of_healthy_and_sick_batches() {
    let tmp = tempfile::tempdir().unwrap();
    let opts = PhantomOptions {
        lesions: 2,
        healthy: 2,
        ..Default::default()
    };
    let m = cmd_phantom(&tmp.path().join("data"), &opts, 3).unwrap();
    let (rows, report) = cmd_features(&m, &RunConfig::default(), &tmp.path().join("f"), 0).unwrap();
    assert_eq!(report.failed, 0);
    for r in &rows {
        match r.label {
            Some(Label::NotSick) => assert!(r.mcnv_area_mm2 < 0.001, "{r:?}"),
            Some(Label::Sick) => assert!(r.vessel_density < 1.0, "{r:?}"),
            None => unreachable!(),
        }
    }
    assert_eq!(read_features(&tmp.path().join("f/features.csv")).unwrap(), rows);
}

#[test]
fn empty_manifest_gives_header_only_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let (rows, _) = cmd_features(&DatasetManifest::default(), &RunConfig::default(), tmp.path(), 1).unwrap();
    assert!(rows.is_empty());
    let text = fs::read_to_string(tmp.path().join("features.csv")).unwrap();
    assert_eq!(
        text,
        "image_id,object_pixels,filled_pixels,mcnv_area_mm2,total_area_mm2,vessel_density,config_hash,label\n"
    );
}

#[test]
fn volume_table_and_visits() {
    let tmp = tempfile::tempdir().unwrap();
    let m = cmd_phantom(&tmp.path().join("data"), &small(0, 0, 6), 4).unwrap();
    let out = tmp.path().join("vol");
    let (rows, report) = cmd_volume(&m, &RunConfig::default(), &[], &out, 0).unwrap();
    assert_eq!(report.failed, 0);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].sections, rows[0].distance_um), (6, 25.0));
    assert!(rows[1].volume_um3 < rows[0].volume_um3);
    assert!(out.join("visit1.stl").is_file());
    let table = octa_cli::format_table(&rows);
    assert!(table.starts_with("Visit  | Sections | Distance (µm) |"));

    let (_, report) = cmd_volume(&m, &RunConfig::default(), &["nope".into()], &out, 0).unwrap();
    assert_eq!(report.failed, 1);
}

#[test]
fn empty_section_has_zero_volume_and_no_stl() {
    let tmp = tempfile::tempdir().unwrap();
    save_gray(&GrayImage::filled(32, 32, 3, 200.0).unwrap(), tmp.path().join("dark.pgm")).unwrap();
    let m = DatasetManifest {
        entries: vec![ManifestEntry {
            image_id: "dark".into(),
            path: "dark.pgm".into(),
            crop: None,
            label: None,
            annotation: None,
            stack: Some(StackRef {
                group: "v".into(),
                section: 0,
            }),
        }],
        ..Default::default()
    };
    let m = DatasetManifest::load(manifest_at(tmp.path(), &m)).unwrap();
    let out = tmp.path().join("vol");
    let (rows, report) = cmd_volume(&m, &RunConfig::default(), &["v".into()], &out, 1).unwrap();
    assert_eq!(report.failed, 0);
    assert_eq!((rows[0].pixels, rows[0].volume_um3), (0, 0.0));
    assert!(rows[0].stl.is_none());
    assert!(!out.join("v.stl").exists());
}

#[test]
fn evaluate_against_own_output_and_mismatched_annotation() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let mut m = cmd_phantom(&data, &small(2, 0, 0), 5).unwrap();
    let proc_out = tmp.path().join("proc");
    cmd_process(&m, &RunConfig::default(), &proc_out, 0, false).unwrap();
    for e in &mut m.entries {
        e.annotation = Some(proc_out.join("masks").join(format!("{}.pgm", e.image_id)));
    }
    let wrong = tmp.path().join("wrong.pgm");
    save_mask(&BinaryMask::empty(7, 7, 200.0).unwrap(), &wrong).unwrap();
    let mut bad = m.entries[0].clone();
    bad.image_id = "bad".into();
    bad.annotation = Some(wrong);
    let mut unannotated = m.entries[0].clone();
    unannotated.image_id = "plain".into();
    unannotated.annotation = None;
    m.entries.push(bad);
    m.entries.push(unannotated);

    let (eval, run) = cmd_evaluate(&m, &RunConfig::default(), &tmp.path().join("eval"), 0).unwrap();
    assert_eq!(run.failed, 1);
    assert_eq!(run.entries[2].status, EntryStatus::Failed);
    assert_eq!(run.entries[3].status, EntryStatus::Skipped);
    let agg = eval.aggregate.unwrap();
    assert_eq!(agg.images, 2);
    assert_eq!((agg.mean_jaccard, agg.pooled_dice), (1.0, 1.0));
}

fn separable_rows() -> Vec<FeatureRow> {
    (0..40)
        .map(|i| {
            let sick = i % 2 == 0;
            let m = if sick { 0.02 + i as f64 * 1e-4 } else { 0.002 + i as f64 * 1e-4 };
            FeatureRow {
                image_id: format!("r{i:02}"),
                object_pixels: 0,
                filled_pixels: 0,
                mcnv_area_mm2: m,
                total_area_mm2: m * 1.2,
                vessel_density: 1.0 / 1.2,
                config_hash: "x".into(),
                label: Some(if sick { Label::Sick } else { Label::NotSick }),
            }
        })
        .collect()
}

#[test]
fn classify_is_reproducible_and_skips_unlabeled() {
    let tmp = tempfile::tempdir().unwrap();
    let mut rows = separable_rows();
    rows[3].label = None;
    let csv = tmp.path().join("features.csv");
    write_features(&csv, &rows).unwrap();
    let cfg = RunConfig::default();
    let a = cmd_classify(&csv, &cfg, None, 9, &tmp.path().join("a")).unwrap();
    let b = cmd_classify(&csv, &cfg, None, 9, &tmp.path().join("b")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.dt_train_accuracy, 1.0);
    assert_eq!(a.skipped_unlabeled, ["r03"]);
    assert_eq!(a.train + a.test, 39);
    for f in ["classification.csv", "classify_summary.json", "rules/dt.json", "rules/svm.json", "rules/dl.json"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let report = fs::read_to_string(tmp.path().join("a/classification.csv")).unwrap();
    assert!(report.starts_with("image_id,DT,SVM,DL,ensemble,truth\n"));
}

#[test]
fn custom_rule_directory_replaces_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("features.csv");
    write_features(&csv, &separable_rows()).unwrap();
    let rules = tmp.path().join("rules");
    fs::create_dir_all(&rules).unwrap();
    fs::write(rules.join("svm.json"), r#"{"source": "SVM", "rules": []}"#).unwrap();
    let s = cmd_classify(&csv, &RunConfig::default(), Some(&rules), 1, &tmp.path().join("out")).unwrap();
    assert_eq!(s.coverage.unwrap().svm, 0.0);
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_octa");
    let data = tmp.path().join("data");
    let ok = Command::new(bin)
        .args(["--seed", "3", "phantom", "--lesions", "2", "--size", "96", "--out"])
        .arg(&data)
        .output()
        .unwrap();
    assert!(ok.status.success());
    let run = |manifest: &Path| {
        Command::new(bin)
            .args(["--jobs", "2", "process", "--manifest"])
            .arg(manifest)
            .arg("--out")
            .arg(tmp.path().join("out"))
            .output()
            .unwrap()
    };
    assert!(run(&data.join("manifest.json")).status.success());

    let mut m = DatasetManifest::load(data.join("manifest.json")).unwrap();
    m.entries[0].path = "missing.pgm".into();
    let broken = tmp.path().join("broken.json");
    m.save(&broken).unwrap();
    assert_eq!(run(&broken).status.code(), Some(1));
    assert_eq!(run(&tmp.path().join("absent.json")).status.code(), Some(2));
}
