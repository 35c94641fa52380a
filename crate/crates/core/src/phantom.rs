//! Seeded synthetic data with known ground truth: OCTA-like vessel phantoms,
//! section stacks of a lesion across two visits, and labeled feature sets
//! drawn from the published decision-tree regions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::biomarkers::BiomarkerRecord;
use crate::error::Result;
use crate::image::{BinaryMask, GrayImage};
use crate::whitebox::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomParams {
    pub size: usize,
    pub scan_size_um: f64,
    /// Probability that a pixel is replaced by impulse noise.
    pub speckle: f64,
    /// Background intensity range (inclusive).
    pub background: (u8, u8),
    /// Vessel intensity range (inclusive).
    pub vessel: (u8, u8),
}

impl Default for PhantomParams {
    fn default() -> Self {
        Self {
            size: 510,
            scan_size_um: 200.0,
            speckle: 0.004,
            background: (0, 12),
            vessel: (180, 230),
        }
    }
}

/// A synthetic scan and the object mask it was rendered from.
#[derive(Debug, Clone)]
pub struct PhantomCase {
    pub image: GrayImage,
    pub truth: BinaryMask,
}

/// Thick meandering vessel blob with enclosed holes (the sponge-like lesion
/// of an active neovascular membrane).
pub fn lesion_phantom(params: &PhantomParams, seed: u64) -> Result<PhantomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.size;
    let mut truth = BinaryMask::empty(n, n, params.scan_size_um)?;

    let s = n as f64;
    let margin = 0.15 * s;
    let (mut x, mut y) = (rng.random_range(0.35 * s..0.65 * s), rng.random_range(0.35 * s..0.65 * s));
    let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut radius = rng.random_range(0.02 * s..0.03 * s);
    let steps = rng.random_range(40..70);
    let step = 0.012 * s;
    for _ in 0..steps {
        paint_disc(&mut truth, x, y, radius, true);
        heading += rng.random_range(-0.45..0.45);
        radius = (radius + rng.random_range(-0.002 * s..0.002 * s)).clamp(0.017 * s, 0.032 * s);
        let (nx, ny) = (x + step * heading.cos(), y + step * heading.sin());
        if nx < margin || nx > s - margin || ny < margin || ny > s - margin {
            // turn back towards the centre
            heading = (s / 2.0 - y).atan2(s / 2.0 - x) + rng.random_range(-0.3..0.3);
            continue;
        }
        x = nx;
        y = ny;
    }

    // Holes: small discs well inside the blob.
    let holes = rng.random_range(6..12);
    let mut placed = 0;
    for _ in 0..holes * 50 {
        if placed == holes {
            break;
        }
        let r = rng.random_range(0.005 * s..0.009 * s);
        let (hx, hy) = (rng.random_range(0.0..s), rng.random_range(0.0..s));
        if disc_inside(&truth, hx, hy, r + 0.008 * s) {
            paint_disc(&mut truth, hx, hy, r, false);
            placed += 1;
        }
    }

    let image = render(&truth, params, &mut rng)?;
    Ok(PhantomCase { image, truth })
}

/// A small compact vessel tuft, as in a healthy scan.
pub fn healthy_phantom(params: &PhantomParams, seed: u64) -> Result<PhantomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.size;
    let s = n as f64;
    let mut truth = BinaryMask::empty(n, n, params.scan_size_um)?;
    let (x, y) = (rng.random_range(0.3 * s..0.7 * s), rng.random_range(0.3 * s..0.7 * s));
    paint_disc(&mut truth, x, y, rng.random_range(0.012 * s..0.02 * s), true);
    let image = render(&truth, params, &mut rng)?;
    Ok(PhantomCase { image, truth })
}

fn paint_disc(mask: &mut BinaryMask, cx: f64, cy: f64, r: f64, value: bool) {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let x0 = ((cx - r).floor() as isize).max(0);
    let x1 = ((cx + r).ceil() as isize).min(w - 1);
    let y0 = ((cy - r).floor() as isize).max(0);
    let y1 = ((cy + r).ceil() as isize).min(h - 1);
    for py in y0..=y1 {
        for px in x0..=x1 {
            let (dx, dy) = (px as f64 + 0.5 - cx, py as f64 + 0.5 - cy);
            if dx * dx + dy * dy <= r * r {
                mask.set(px as usize, py as usize, value);
            }
        }
    }
}

fn disc_inside(mask: &BinaryMask, cx: f64, cy: f64, r: f64) -> bool {
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    if cx - r < 0.0 || cy - r < 0.0 || cx + r >= w || cy + r >= h {
        return false;
    }
    for py in (cy - r).floor() as usize..=(cy + r).ceil() as usize {
        for px in (cx - r).floor() as usize..=(cx + r).ceil() as usize {
            let (dx, dy) = (px as f64 + 0.5 - cx, py as f64 + 0.5 - cy);
            if dx * dx + dy * dy <= r * r && !mask.get(px, py) {
                return false;
            }
        }
    }
    true
}

fn render(truth: &BinaryMask, params: &PhantomParams, rng: &mut ChaCha8Rng) -> Result<GrayImage> {
    let pixels = truth
        .pixels()
        .iter()
        .map(|&on| {
            if rng.random_bool(params.speckle) {
                // impulse noise: salt on background, pepper on vessel
                return if on { rng.random_range(0..=40) } else { rng.random_range(180..=255) };
            }
            let (lo, hi) = if on { params.vessel } else { params.background };
            rng.random_range(lo..=hi)
        })
        .collect();
    GrayImage::new(truth.width(), truth.height(), pixels, truth.scan_size_um())
}

/// Sections through an ellipsoidal lesion. `scale` shrinks (< 1) or grows
/// the lesion, so two visits of the same eye differ only by `scale`.
pub fn lesion_stack(params: &PhantomParams, sections: usize, scale: f64, seed: u64) -> Result<Vec<PhantomCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = params.size as f64;
    let (cx, cy) = (s / 2.0, s / 2.0);
    let (rx, ry) = (0.3 * s * scale, 0.22 * s * scale);
    let mid = (sections as f64 - 1.0) / 2.0;
    let rz = (sections as f64 / 2.0).max(1.0);
    let mut out = Vec::with_capacity(sections);
    for k in 0..sections {
        let dz = (k as f64 - mid) / rz;
        let f = (1.0 - dz * dz).max(0.0).sqrt();
        let truth = BinaryMask::from_fn(params.size, params.size, params.scan_size_um, |x, y| {
            let ex = (x as f64 + 0.5 - cx) / (rx * f).max(1e-9);
            let ey = (y as f64 + 0.5 - cy) / (ry * f).max(1e-9);
            f > 0.0 && ex * ex + ey * ey <= 1.0
        })?;
        let image = render(&truth, params, &mut rng)?;
        out.push(PhantomCase { image, truth });
    }
    Ok(out)
}

/// Per-region sample counts for [`rule_region_dataset`], in rule order
/// (NotSick, Sick, NotSick, Sick).
pub const DEFAULT_REGION_COUNTS: [usize; 4] = [25, 28, 15, 32];

/// Labeled area pairs (mm²) drawn uniformly from the four regions of the
/// published decision-tree rules, keeping a margin around every threshold
/// and `total >= mcnv`.
pub fn rule_region_dataset(counts: [usize; 4], seed: u64) -> Vec<(BiomarkerRecord, Label)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut id = 0;
    for (region, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            let (m, v, label) = match region {
                0 => {
                    let m = rng.random_range(0.002..0.008);
                    (m, rng.random_range(m..0.045), Label::NotSick)
                }
                1 => {
                    let m = rng.random_range(0.012..0.018);
                    (m, rng.random_range(m..0.0185), Label::Sick)
                }
                2 => {
                    let m: f64 = rng.random_range(0.012..0.028);
                    (m, rng.random_range(m.max(0.022)..0.045), Label::NotSick)
                }
                _ => {
                    let m = rng.random_range(0.032..0.04);
                    (m, rng.random_range(m..0.045), Label::Sick)
                }
            };
            out.push((BiomarkerRecord::from_areas(format!("region{}_{id:03}", region + 1), m, v), label));
            id += 1;
        }
    }
    out
}
