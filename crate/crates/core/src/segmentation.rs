//! Thresholding, noise removal and component selection that turn a cleaned
//! grayscale scan into the binary vessel mask.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{crop, gaussian_blur, reflect, BinaryMask, CropRect, GrayImage};

/// Pixel adjacency used by component labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(n: u8) -> std::result::Result<Self, String> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Parameters of every pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub gaussian_kernel: usize,
    pub gaussian_sigma: f64,
    pub otsu_cap: u8,
    pub multi_cuts: Vec<u8>,
    pub binary_threshold: u8,
    pub sp_window: usize,
    pub connectivity: Connectivity,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            gaussian_kernel: 5,
            gaussian_sigma: 1.0,
            otsu_cap: 170,
            multi_cuts: vec![85, 170],
            binary_threshold: 127,
            sp_window: 3,
            connectivity: Connectivity::Eight,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.gaussian_kernel < 3 || self.gaussian_kernel % 2 == 0 {
            return bad(format!("gaussian_kernel {} must be odd and >= 3", self.gaussian_kernel));
        }
        if !(self.gaussian_sigma.is_finite() && self.gaussian_sigma > 0.0) {
            return bad(format!("gaussian_sigma {} must be positive", self.gaussian_sigma));
        }
        if self.otsu_cap == 0 {
            return bad("otsu_cap must be in (0, 255]".into());
        }
        if self.multi_cuts.iter().any(|&c| c == 0 || c == 255) {
            return bad("multi_cuts must lie strictly inside (0, 255)".into());
        }
        if !is_strictly_ascending(&self.multi_cuts) {
            return bad(format!("multi_cuts {:?} must be strictly ascending", self.multi_cuts));
        }
        if self.sp_window < 3 || self.sp_window % 2 == 0 {
            return bad(format!("sp_window {} must be odd and >= 3", self.sp_window));
        }
        Ok(())
    }
}

fn is_strictly_ascending(cuts: &[u8]) -> bool {
    cuts.windows(2).all(|w| w[0] < w[1])
}

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    hist
}

/// Between-class variance of a split, kept as the exact fraction
/// `diff^2 / den` with `diff = |N*s0 - S*n0|` and `den = n0*n1`
/// (proportional to `w0*w1*(mu0-mu1)^2`).
#[derive(Clone, Copy)]
struct SplitScore {
    diff: u128,
    den: u128,
}

impl SplitScore {
    const NONE: SplitScore = SplitScore { diff: 0, den: 0 };

    fn beats(&self, other: &SplitScore) -> bool {
        if self.den == 0 {
            return false;
        }
        if other.den == 0 {
            return self.diff > 0;
        }
        let exact = |s: &SplitScore, o: &SplitScore| {
            s.diff.checked_mul(s.diff)?.checked_mul(o.den)
        };
        match (exact(self, other), exact(other, self)) {
            (Some(a), Some(b)) => a > b,
            // Only reachable for images of several hundred megapixels.
            _ => {
                let v = |s: &SplitScore| (s.diff as f64).powi(2) / s.den as f64;
                v(self) > v(other)
            }
        }
    }
}

/// Otsu's threshold: the `t` in `0..=254` maximizing between-class variance
/// of the split `{<= t}` / `{> t}`, smallest `t` on ties. An image with a
/// single intensity returns that intensity.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    let hist = histogram(img);
    let occupied: Vec<usize> = (0..256).filter(|&v| hist[v] > 0).collect();
    if occupied.len() < 2 {
        return occupied.first().copied().unwrap_or(0) as u8;
    }
    let total: u128 = hist.iter().map(|&c| c as u128).sum();
    let sum: u128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u128 * c as u128)
        .sum();

    let mut best_t = 0u8;
    let mut best = SplitScore::NONE;
    let (mut n0, mut s0) = (0u128, 0u128);
    for t in 0..255usize {
        n0 += hist[t] as u128;
        s0 += t as u128 * hist[t] as u128;
        let n1 = total - n0;
        let score = if n0 == 0 || n1 == 0 {
            SplitScore::NONE
        } else {
            SplitScore {
                diff: (total * s0).abs_diff(sum * n0),
                den: n0 * n1,
            }
        };
        if score.beats(&best) {
            best = score;
            best_t = t as u8;
        }
    }
    best_t
}

/// Replaces every pixel brighter than the Otsu threshold by `cap`; darker
/// pixels are left as they are, so the result is still grayscale.
pub fn otsu_cap(img: &GrayImage, cap: u8) -> Result<GrayImage> {
    if cap == 0 {
        return Err(Error::InvalidParameter("otsu cap must be in (0, 255]".into()));
    }
    let t = otsu_threshold(img);
    let pixels = img
        .pixels()
        .iter()
        .map(|&p| if p > t { cap } else { p })
        .collect();
    Ok(img.with_pixels(pixels))
}

/// Quantizes into `cuts.len() + 1` bands; band `k` (values with exactly `k`
/// cuts at or below them) maps to `round(255 * k / (K - 1))`.
pub fn multi_threshold(img: &GrayImage, cuts: &[u8]) -> Result<GrayImage> {
    if !is_strictly_ascending(cuts) {
        return Err(Error::InvalidParameter(format!(
            "threshold cuts {cuts:?} must be strictly ascending"
        )));
    }
    let bands = cuts.len() + 1;
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        let k = cuts.iter().filter(|&&c| v >= c as usize).count();
        *slot = if bands == 1 {
            0
        } else {
            (255.0 * k as f64 / (bands - 1) as f64).round() as u8
        };
    }
    let pixels = img.pixels().iter().map(|&p| lut[p as usize]).collect();
    Ok(img.with_pixels(pixels))
}

/// Object pixels are those strictly brighter than `t`.
pub fn binary_threshold(img: &GrayImage, t: u8) -> BinaryMask {
    let pixels = img.pixels().iter().map(|&p| p > t).collect();
    BinaryMask::new(img.width(), img.height(), pixels, img.scan_size_um())
        .expect("dimensions come from a valid image")
}

/// Binary median: each pixel takes the majority value of its
/// `window x window` neighbourhood, with mirrored borders.
pub fn salt_pepper_filter(mask: &BinaryMask, window: usize) -> Result<BinaryMask> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "salt-and-pepper window must be odd and >= 3, got {window}"
        )));
    }
    let (w, h) = (mask.width(), mask.height());
    let r = (window / 2) as isize;
    let src = mask.pixels();

    // Horizontal run counts, then vertical sums of those counts.
    let mut row_counts = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut c = 0;
            for dx in -r..=r {
                c += src[y * w + reflect(x as isize + dx, w)] as u32;
            }
            row_counts[y * w + x] = c;
        }
    }
    let majority = (window * window / 2) as u32;
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut c = 0;
            for dy in -r..=r {
                c += row_counts[reflect(y as isize + dy, h) * w + x];
            }
            out[y * w + x] = c > majority;
        }
    }
    Ok(mask.with_pixels(out))
}

/// Connected components of a mask. Label 0 is background; labels `1..`
/// follow raster-scan discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    /// `component_sizes[k - 1]` is the pixel count of label `k`.
    pub component_sizes: Vec<usize>,
    scan_size_um: f64,
}

impl LabelMap {
    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn size_of(&self, label: u32) -> usize {
        match label {
            0 => 0,
            k => self.component_sizes[k as usize - 1],
        }
    }

    /// Label of the biggest component; earliest label wins ties.
    pub fn largest_label(&self) -> Option<u32> {
        let mut best: Option<(u32, usize)> = None;
        for (i, &size) in self.component_sizes.iter().enumerate() {
            if best.is_none_or(|(_, s)| size > s) {
                best = Some((i as u32 + 1, size));
            }
        }
        best.map(|(label, _)| label)
    }

    /// Grayscale rendering: the largest component white, the rest spread
    /// over mid-gray levels.
    pub fn to_gray(&self) -> GrayImage {
        let largest = self.largest_label();
        let pixels = self
            .labels
            .iter()
            .map(|&l| match l {
                0 => 0,
                l if Some(l) == largest => 255,
                l => 60 + ((l as u64 * 37) % 141) as u8,
            })
            .collect();
        GrayImage::new(self.width, self.height, pixels, self.scan_size_um)
            .expect("dimensions come from a valid mask")
    }
}

pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> LabelMap {
    let (w, h) = (mask.width(), mask.height());
    let src = mask.pixels();
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if !src[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32 + 1;
        labels[start] = label;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if src[j] && labels[j] == 0 {
                    labels[j] = label;
                    queue.push_back(j);
                }
            }
        }
        sizes.push(size);
    }

    LabelMap {
        width: w,
        height: h,
        labels,
        component_sizes: sizes,
        scan_size_um: mask.scan_size_um(),
    }
}

/// Keeps only the component with the most pixels.
pub fn largest_component(lm: &LabelMap) -> BinaryMask {
    let keep = lm.largest_label();
    let pixels = lm.labels.iter().map(|&l| Some(l) == keep && l != 0).collect();
    BinaryMask::new(lm.width, lm.height, pixels, lm.scan_size_um)
        .expect("dimensions come from a valid label map")
}

/// Fills background holes: background reachable from the border through
/// 4-connected background stays background, everything else becomes object.
pub fn region_fill(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let src = mask.pixels();
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();

    let seed = |i: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        if !src[i] && !outside[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    };
    for x in 0..w {
        seed(x, &mut outside, &mut queue);
        seed((h - 1) * w + x, &mut outside, &mut queue);
    }
    for y in 0..h {
        seed(y * w, &mut outside, &mut queue);
        seed(y * w + w - 1, &mut outside, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        if x > 0 {
            seed(i - 1, &mut outside, &mut queue);
        }
        if x + 1 < w {
            seed(i + 1, &mut outside, &mut queue);
        }
        if y > 0 {
            seed(i - w, &mut outside, &mut queue);
        }
        if y + 1 < h {
            seed(i + w, &mut outside, &mut queue);
        }
    }
    mask.with_pixels(outside.into_iter().map(|o| !o).collect())
}

/// Every intermediate raster of one pipeline run, in stage order.
#[derive(Debug, Clone)]
pub struct PipelineStages {
    pub original: GrayImage,
    pub cropped: GrayImage,
    pub smoothed: GrayImage,
    pub otsu_capped: GrayImage,
    pub multilevel: GrayImage,
    pub binary: BinaryMask,
    pub denoised: BinaryMask,
    pub components: LabelMap,
    pub result: BinaryMask,
}

impl PipelineStages {
    /// The eight dumpable stages with their file stems.
    pub fn dump_images(&self) -> Vec<(&'static str, GrayImage)> {
        vec![
            ("01_original", self.original.clone()),
            ("02_cropped", self.cropped.clone()),
            ("03_gaussian", self.smoothed.clone()),
            ("04_otsu_capped", self.otsu_capped.clone()),
            ("05_multilevel", self.multilevel.clone()),
            ("06_binary", self.binary.to_gray()),
            ("07_salt_pepper", self.denoised.to_gray()),
            ("08_components", self.components.to_gray()),
        ]
    }
}

pub fn run_pipeline_stages(
    img: &GrayImage,
    cfg: &PipelineConfig,
    rect: &CropRect,
) -> Result<PipelineStages> {
    cfg.validate()?;
    let cropped = crop(img, rect)?;
    let smoothed = gaussian_blur(&cropped, cfg.gaussian_kernel, cfg.gaussian_sigma)?;
    let otsu_capped = otsu_cap(&smoothed, cfg.otsu_cap)?;
    let multilevel = multi_threshold(&otsu_capped, &cfg.multi_cuts)?;
    let binary = binary_threshold(&multilevel, cfg.binary_threshold);
    let denoised = salt_pepper_filter(&binary, cfg.sp_window)?;
    let components = label_components(&denoised, cfg.connectivity);
    let result = largest_component(&components);
    if result.is_empty() {
        log::warn!("segmentation produced an empty mask");
    }
    Ok(PipelineStages {
        original: img.clone(),
        cropped,
        smoothed,
        otsu_capped,
        multilevel,
        binary,
        denoised,
        components,
        result,
    })
}

/// crop, Gaussian, capped Otsu, multilevel, binary, salt-and-pepper,
/// labeling, largest component.
pub fn run_pipeline(img: &GrayImage, cfg: &PipelineConfig, rect: &CropRect) -> Result<BinaryMask> {
    run_pipeline_stages(img, cfg, rect).map(|s| s.result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, p: Vec<u8>) -> GrayImage {
        GrayImage::new(w, h, p, 200.0).unwrap()
    }

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        BinaryMask::from_fn(w, h, 200.0, |x, y| rows[y].as_bytes()[x] == b'#').unwrap()
    }

    #[test]
    fn otsu_two_values() {
        let mut p = vec![40u8; 50];
        p.extend(vec![200u8; 50]);
        let img = gray(10, 10, p);
        let t = otsu_threshold(&img);
        assert!((40..200).contains(&t));
        assert_eq!(t, 40);
        let capped = otsu_cap(&img, 170).unwrap();
        assert_eq!(capped.pixels()[0], 40);
        assert_eq!(capped.pixels()[99], 170);
    }

    #[test]
    fn otsu_constant_images() {
        for v in [0u8, 13, 254, 255] {
            let img = GrayImage::filled(5, 4, v, 1.0).unwrap();
            assert_eq!(otsu_threshold(&img), v);
            assert_eq!(otsu_cap(&img, 170).unwrap(), img);
        }
    }

    #[test]
    fn multi_threshold_bands() {
        let img = gray(3, 1, vec![50, 100, 200]);
        let out = multi_threshold(&img, &[85, 170]).unwrap();
        assert_eq!(out.pixels(), &[0, 128, 255]);
        let edges = gray(4, 1, vec![84, 85, 169, 170]);
        assert_eq!(
            multi_threshold(&edges, &[85, 170]).unwrap().pixels(),
            &[0, 128, 128, 255]
        );
        let single = multi_threshold(&img, &[]).unwrap();
        assert!(single.pixels().iter().all(|&p| p == 0));
        assert!(multi_threshold(&img, &[170, 85]).is_err());
        assert!(multi_threshold(&img, &[85, 85]).is_err());
    }

    #[test]
    fn binary_threshold_levels() {
        let levels = gray(3, 1, vec![0, 128, 255]);
        let m = binary_threshold(&levels, 127);
        assert_eq!(m.pixels(), &[false, true, true]);
        assert!(binary_threshold(&levels, 255).is_empty());
        let white = GrayImage::filled(3, 3, 255, 1.0).unwrap();
        assert_eq!(binary_threshold(&white, 0).count(), 9);
    }

    #[test]
    fn salt_and_pepper_removed() {
        let mut salt = BinaryMask::empty(7, 7, 1.0).unwrap();
        salt.set(3, 3, true);
        assert!(salt_pepper_filter(&salt, 3).unwrap().is_empty());

        let mut pepper = BinaryMask::from_fn(7, 7, 1.0, |_, _| true).unwrap();
        pepper.set(3, 3, false);
        assert_eq!(salt_pepper_filter(&pepper, 3).unwrap().count(), 49);

        assert!(salt_pepper_filter(&salt, 4).is_err());
        assert!(salt_pepper_filter(&salt, 1).is_err());
    }

    #[test]
    fn square_keeps_edges_loses_corners() {
        let sq = BinaryMask::from_fn(20, 20, 1.0, |x, y| {
            (5..15).contains(&x) && (5..15).contains(&y)
        })
        .unwrap();
        let out = salt_pepper_filter(&sq, 3).unwrap();
        for y in 0..20 {
            for x in 0..20 {
                let corner = (x == 5 || x == 14) && (y == 5 || y == 14);
                // A square corner sees 4 of 9 object pixels.
                assert_eq!(out.get(x, y), sq.get(x, y) && !corner, "({x},{y})");
            }
        }
        assert_eq!(salt_pepper_filter(&out, 3).unwrap(), out);
    }

    #[test]
    fn diagonal_connectivity() {
        let m = mask_from(&["#.", ".#"]);
        assert_eq!(label_components(&m, Connectivity::Eight).component_count(), 1);
        assert_eq!(label_components(&m, Connectivity::Four).component_count(), 2);
        let empty = BinaryMask::empty(4, 4, 1.0).unwrap();
        let lm = label_components(&empty, Connectivity::Eight);
        assert_eq!(lm.component_count(), 0);
        assert!(largest_component(&lm).is_empty());
    }

    #[test]
    fn largest_and_ties() {
        let m = mask_from(&[
            "##.....", //
            "##...##",
            "##...##",
            "##...#.",
            "##.....",
        ]);
        let lm = label_components(&m, Connectivity::Eight);
        assert_eq!(lm.component_sizes, vec![10, 5]);
        let big = largest_component(&lm);
        assert_eq!(big.count(), 10);
        assert!(big.get(0, 0) && !big.get(5, 1));

        let tie = mask_from(&["###.###", "##...##", "##...##"]);
        let lm = label_components(&tie, Connectivity::Eight);
        assert_eq!(lm.component_sizes, vec![7, 7]);
        let first = largest_component(&lm);
        assert!(first.get(0, 0) && !first.get(6, 0));
    }

    #[test]
    fn region_fill_cases() {
        let donut = mask_from(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        let filled = region_fill(&donut);
        assert_eq!(filled.count(), 9);
        assert!(filled.get(2, 2));

        let open = mask_from(&["##...", "##...", "....#"]);
        assert_eq!(region_fill(&open), open);

        let nested = mask_from(&[
            "#######",
            "#.....#",
            "#.###.#",
            "#.#.#.#",
            "#.###.#",
            "#.....#",
            "#######",
        ]);
        assert_eq!(region_fill(&nested).count(), 49);

        // 4-connected background flood does not leak through a diagonal wall.
        let diag = mask_from(&[".#.", "#.#", ".#."]);
        assert_eq!(region_fill(&diag).count(), 5);
    }

    #[test]
    fn config_validation() {
        assert!(PipelineConfig::default().validate().is_ok());
        let bad = PipelineConfig {
            multi_cuts: vec![170, 85],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PipelineConfig {
            sp_window: 4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let json = r#"{"connectivity": 4, "otsu_cap": 160}"#;
        let cfg: PipelineConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.connectivity, Connectivity::Four);
        assert_eq!(cfg.multi_cuts, vec![85, 170]);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"connectivity": 6}"#).is_err());
    }

    #[test]
    fn black_image_gives_empty_mask() {
        let img = GrayImage::filled(32, 32, 0, 200.0).unwrap();
        let rect = CropRect::full(&img);
        let m = run_pipeline(&img, &PipelineConfig::default(), &rect).unwrap();
        assert!(m.is_empty());
    }
}
