use octa_web::{classify_areas, rule_plane_rgba, Demo};

#[test]
fn default_settings_track_the_phantom() {
    let mut d = Demo::try_new(3, 200, false).unwrap();
    let r = d.try_segment(1.0, 170, 127).unwrap();
    assert!(r.dice > 0.9, "{r:?}");
    assert!(r.vessel_density > 0.0 && r.vessel_density <= 1.0);
    assert!(r.filled_pixels >= r.object_pixels);
    assert_eq!(d.image_rgba().len(), 200 * 200 * 4);
    assert_eq!(d.overlay_rgba().len(), 200 * 200 * 4);
}

#[test]
fn healthy_scan_has_small_lesion_area() {
    let mut d = Demo::try_new(1, 510, true).unwrap();
    let r = d.try_segment(1.0, 170, 127).unwrap();
    assert!(r.mcnv_area_mm2 < 0.001, "{r:?}");
}

#[test]
fn bad_settings_are_errors() {
    let mut d = Demo::try_new(1, 64, false).unwrap();
    assert!(d.try_segment(-1.0, 170, 127).is_err());
    assert!(d.try_segment(1.0, 0, 127).is_err());
    assert!(Demo::try_new(1, 0, false).is_err());
}

#[test]
fn rule_plane_points() {
    let v = classify_areas(0.005, 0.03);
    assert_eq!((v.dt().as_str(), v.dt_rule().as_str()), ("NotSick", "R1"));
    let v = classify_areas(0.015, 0.018);
    assert_eq!((v.dt().as_str(), v.dt_rule().as_str()), ("Sick", "R2"));
    let v = classify_areas(0.035, 0.04);
    assert_eq!(v.dt(), "Sick");
    assert!(["Sick", "NotSick"].contains(&v.ensemble().as_str()));

    let img = rule_plane_rgba(50, 40, 0.05);
    assert_eq!(img.len(), 50 * 40 * 4);
    // bottom-left corner: m = 0, v = 0 -> R1 (NotSick, blue)
    let bl = &img[(39 * 50) * 4..(39 * 50) * 4 + 4];
    assert_eq!(bl, [60, 110, 200, 255]);
    // bottom-right: v < m -> grey
    let br = &img[(39 * 50 + 49) * 4..(39 * 50 + 49) * 4 + 4];
    assert_eq!(br, [60, 60, 60, 255]);
}
