use octa_core::phantom::{healthy_phantom, lesion_phantom, lesion_stack, PhantomParams};
use octa_core::volume::{encode_stl, parse_stl};
use octa_core::{
    load_mask, overlap, pixel_geometry, record_from_mask, run_pipeline, run_pipeline_stages, save_mask, voxel_surface,
    CropRect, PipelineConfig, SectionStack,
};

fn small() -> PhantomParams {
    PhantomParams {
        size: 256,
        ..Default::default()
    }
}

#[test]
fn lesion_phantom_segments_close_to_truth() {
    let cfg = PipelineConfig::default();
    for seed in 0..3 {
        let case = lesion_phantom(&small(), seed).unwrap();
        let mask = run_pipeline(&case.image, &cfg, &CropRect::full(&case.image)).unwrap();
        let o = overlap(&mask, &case.truth).unwrap();
        assert!(o.dice > 0.9, "seed {seed}: {o:?}");
    }
}

#[test]
fn healthy_and_sick_biomarkers() {
    let cfg = PipelineConfig::default();
    let g = pixel_geometry(200.0, 510).unwrap();
    let p = PhantomParams::default();

    let healthy = healthy_phantom(&p, 1).unwrap();
    let m = run_pipeline(&healthy.image, &cfg, &CropRect::full(&healthy.image)).unwrap();
    let r = record_from_mask("h", &m, &g).unwrap();
    assert!(r.mcnv_area_mm2 < 0.001, "{r:?}");

    let sick = lesion_phantom(&p, 1).unwrap();
    let m = run_pipeline(&sick.image, &cfg, &CropRect::full(&sick.image)).unwrap();
    let r = record_from_mask("s", &m, &g).unwrap();
    assert!(r.vessel_density < 1.0, "{r:?}");
    assert!(r.mcnv_area_mm2 > 0.001);
}

#[test]
fn stage_dump_has_eight_images() {
    let case = lesion_phantom(&small(), 4).unwrap();
    let stages = run_pipeline_stages(&case.image, &PipelineConfig::default(), &CropRect::new(10, 10, 200, 200)).unwrap();
    let dump = stages.dump_images();
    assert_eq!(dump.len(), 8);
    assert_eq!(dump[0].1.width(), 256);
    assert!(dump[1..].iter().all(|(_, img)| img.width() == 200 && img.height() == 200));
}

#[test]
fn mask_file_round_trip() {
    let case = lesion_phantom(&small(), 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mask.pgm");
    save_mask(&case.truth, &path).unwrap();
    let back = load_mask(&path, case.truth.scan_size_um()).unwrap();
    assert_eq!(back, case.truth);
}

#[test]
fn shrunk_visit_has_smaller_volume_and_stable_stl() {
    let p = PhantomParams {
        size: 48,
        ..Default::default()
    };
    let g = pixel_geometry(200.0, 510).unwrap();
    let stack = |scale| {
        let cases = lesion_stack(&p, 6, scale, 3).unwrap();
        SectionStack::new(cases.into_iter().map(|c| c.truth).collect(), 25.0).unwrap()
    };
    let (first, second) = (stack(1.0), stack(0.8));
    assert!(second.total_pixels() < first.total_pixels());
    let mesh = voxel_surface(&first, &g);
    let bytes = encode_stl(&mesh).unwrap();
    assert_eq!(bytes.len(), 84 + 50 * mesh.len());
    assert_eq!(encode_stl(&voxel_surface(&first, &g)).unwrap(), bytes);
    // STL stores f32, so the lossless direction is bytes -> mesh -> bytes
    let parsed = parse_stl(&bytes).unwrap();
    assert_eq!(parsed.len(), mesh.len());
    assert_eq!(encode_stl(&parsed).unwrap(), bytes);
}
