//! Raster types, PGM/PNG I/O, physical pixel geometry and the data-cleaning
//! stage (crop + Gaussian smoothing).

use std::fs;
use std::io::{BufReader, Cursor};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default physical side length of the scanned field of view.
pub const DEFAULT_SCAN_SIZE_UM: f64 = 200.0;
/// Default number of pixels along one side of a device export.
pub const DEFAULT_PIXELS_PER_SIDE: usize = 510;

/// 8-bit single-channel raster with the physical width of its field of view.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    scan_size_um: f64,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>, scan_size_um: f64) -> Result<Self> {
        check_dims(width, height, pixels.len(), scan_size_um)?;
        Ok(Self {
            width,
            height,
            pixels,
            scan_size_um,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8, scan_size_um: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height], scan_size_um)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn scan_size_um(&self) -> f64 {
        self.scan_size_um
    }

    /// Pixel at column `x`, row `y`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Same geometry, new pixel values.
    pub(crate) fn with_pixels(&self, pixels: Vec<u8>) -> Self {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Self {
            width: self.width,
            height: self.height,
            pixels,
            scan_size_um: self.scan_size_um,
        }
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&p| p as f64).sum::<f64>() / self.pixels.len() as f64
    }
}

/// Boolean raster; `true` marks object (vessel) pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
    scan_size_um: f64,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>, scan_size_um: f64) -> Result<Self> {
        check_dims(width, height, pixels.len(), scan_size_um)?;
        Ok(Self {
            width,
            height,
            pixels,
            scan_size_um,
        })
    }

    pub fn empty(width: usize, height: usize, scan_size_um: f64) -> Result<Self> {
        Self::new(width, height, vec![false; width * height], scan_size_um)
    }

    /// Builds a mask by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        scan_size_um: f64,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels, scan_size_um)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn scan_size_um(&self) -> f64 {
        self.scan_size_um
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value;
    }

    /// Number of object pixels.
    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn with_pixels(&self, pixels: Vec<bool>) -> Self {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Self {
            width: self.width,
            height: self.height,
            pixels,
            scan_size_um: self.scan_size_um,
        }
    }

    /// Object pixels as 255, background as 0.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| if p { 255 } else { 0 }).collect(),
            scan_size_um: self.scan_size_um,
        }
    }

    /// Nonzero pixels become object pixels.
    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            pixels: img.pixels.iter().map(|&p| p != 0).collect(),
            scan_size_um: img.scan_size_um,
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize, scan_size_um: f64) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidImage(format!(
            "{len} pixels do not fill {width}x{height}"
        )));
    }
    if !(scan_size_um.is_finite() && scan_size_um > 0.0) {
        return Err(Error::InvalidImage(format!(
            "scan size must be positive, got {scan_size_um}"
        )));
    }
    Ok(())
}

/// Area and side length of a single pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelGeometry {
    pub pixel_area_mm2: f64,
    pub pixel_pitch_um: f64,
}

impl PixelGeometry {
    pub fn pixel_area_um2(&self) -> f64 {
        self.pixel_pitch_um * self.pixel_pitch_um
    }
}

/// Pixel pitch and area for a square field of view `scan_size_um` wide,
/// sampled with `pixels_per_side` pixels.
pub fn pixel_geometry(scan_size_um: f64, pixels_per_side: usize) -> Result<PixelGeometry> {
    if !(scan_size_um.is_finite() && scan_size_um > 0.0) || pixels_per_side == 0 {
        return Err(Error::InvalidParameter(format!(
            "pixel geometry needs positive arguments, got scan size {scan_size_um} and {pixels_per_side} px"
        )));
    }
    let pitch = scan_size_um / pixels_per_side as f64;
    let side_mm = pitch / 1000.0;
    Ok(PixelGeometry {
        pixel_area_mm2: side_mm * side_mm,
        pixel_pitch_um: pitch,
    })
}

/// Physical scale settings shared by every image of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub scan_size_um: f64,
    pub pixels_per_side: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            scan_size_um: DEFAULT_SCAN_SIZE_UM,
            pixels_per_side: DEFAULT_PIXELS_PER_SIDE,
        }
    }
}

impl GeometryConfig {
    pub fn pixel_geometry(&self) -> Result<PixelGeometry> {
        pixel_geometry(self.scan_size_um, self.pixels_per_side)
    }
}

/// Operator-chosen crop window, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl CropRect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn full(img: &GrayImage) -> Self {
        Self::new(0, 0, img.width, img.height)
    }

    /// The rectangle `inner`, given relative to `self`, expressed in the
    /// coordinates of the image `self` was taken from.
    pub fn compose(&self, inner: &CropRect) -> CropRect {
        CropRect::new(self.x + inner.x, self.y + inner.y, inner.w, inner.h)
    }

    fn fits(&self, width: usize, height: usize) -> bool {
        self.w > 0
            && self.h > 0
            && self.x.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= height)
    }
}

pub fn crop(img: &GrayImage, rect: &CropRect) -> Result<GrayImage> {
    if !rect.fits(img.width, img.height) {
        return Err(Error::CropOutOfBounds {
            x: rect.x,
            y: rect.y,
            w: rect.w,
            h: rect.h,
            width: img.width,
            height: img.height,
        });
    }
    let mut pixels = Vec::with_capacity(rect.w * rect.h);
    for row in rect.y..rect.y + rect.h {
        let start = row * img.width + rect.x;
        pixels.extend_from_slice(&img.pixels[start..start + rect.w]);
    }
    let scan_size_um = if rect.w == img.width {
        img.scan_size_um
    } else {
        img.scan_size_um * rect.w as f64 / img.width as f64
    };
    GrayImage::new(rect.w, rect.h, pixels, scan_size_um)
}

/// Maps any integer offset onto `0..len` by mirroring about the edges
/// (`d c b a | a b c d | d c b a`).
#[inline]
pub(crate) fn reflect(i: isize, len: usize) -> usize {
    let n = len as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Normalized 1-D Gaussian weights for offsets `-r..=r`.
pub fn gaussian_kernel(kernel_size: usize, sigma: f64) -> Result<Vec<f64>> {
    if kernel_size < 3 || kernel_size % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "Gaussian kernel size must be odd and at least 3, got {kernel_size}"
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Gaussian sigma must be positive, got {sigma}"
        )));
    }
    let r = (kernel_size / 2) as isize;
    let mut weights: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    Ok(weights)
}

/// Separable Gaussian smoothing with mirrored borders. Intermediate values
/// stay in floating point; the result is rounded once and clamped.
pub fn gaussian_blur(img: &GrayImage, kernel_size: usize, sigma: f64) -> Result<GrayImage> {
    let kernel = gaussian_kernel(kernel_size, sigma)?;
    let r = (kernel_size / 2) as isize;
    let (w, h) = (img.width, img.height);

    let mut horizontal = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &img.pixels[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in kernel.iter().enumerate() {
                let sx = reflect(x as isize + k as isize - r, w);
                acc += weight * row[sx] as f64;
            }
            horizontal[y * w + x] = acc;
        }
    }

    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in kernel.iter().enumerate() {
                let sy = reflect(y as isize + k as isize - r, h);
                acc += weight * horizontal[sy * w + x];
            }
            out[y * w + x] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(img.with_pixels(out))
}

/// Encodes a canonical binary PGM: `P5\n<w> <h>\n255\n` followed by raw bytes.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut bytes = Vec::with_capacity(header.len() + img.pixels.len());
    bytes.extend_from_slice(header.as_bytes());
    bytes.extend_from_slice(&img.pixels);
    bytes
}

/// Parses a binary (P5) PGM with maxval at most 255. Sample values are kept
/// as stored.
pub fn decode_pgm(bytes: &[u8], scan_size_um: f64) -> std::result::Result<GrayImage, String> {
    let mut pos = 0usize;

    fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_uint(bytes: &[u8], pos: &mut usize) -> std::result::Result<usize, String> {
        skip_space_and_comments(bytes, pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err("truncated PGM header".into());
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| "bad number in PGM header".to_string())
    }

    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    pos += 2;
    let width = read_uint(bytes, &mut pos)?;
    let height = read_uint(bytes, &mut pos)?;
    let maxval = read_uint(bytes, &mut pos)?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported bit depth (maxval {maxval})"));
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("truncated PGM header".into());
    }
    pos += 1;
    if width == 0 || height == 0 {
        return Err(format!("zero dimension {width}x{height}"));
    }
    let n = width * height;
    if bytes.len() - pos < n {
        return Err(format!(
            "expected {n} pixel bytes, found {}",
            bytes.len() - pos
        ));
    }
    GrayImage::new(width, height, bytes[pos..pos + n].to_vec(), scan_size_um)
        .map_err(|e| e.to_string())
}

fn decode_png(bytes: &[u8], scan_size_um: f64) -> std::result::Result<GrayImage, String> {
    let mut decoder = png::Decoder::new(BufReader::new(Cursor::new(bytes)));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    if reader.info().bit_depth == png::BitDepth::Sixteen {
        return Err("unsupported bit depth (16-bit PNG)".into());
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| "PNG too large".to_string())?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    let (w, h) = (info.width as usize, info.height as usize);
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err("palette was not expanded".into()),
    };
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = &buf[y * info.line_size..y * info.line_size + w * channels];
        for px in row.chunks_exact(channels) {
            if channels >= 3 && (px[0] != px[1] || px[1] != px[2]) {
                return Err("colour PNG is not gray-mappable".into());
            }
            pixels.push(px[0]);
        }
    }
    GrayImage::new(w, h, pixels, scan_size_um).map_err(|e| e.to_string())
}

/// Reads an 8-bit grayscale PGM (P5) or PNG. The physical field of view is
/// not stored in either format and must be supplied.
pub fn load_gray(path: impl AsRef<Path>, scan_size_um: f64) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = if bytes.starts_with(b"P5") {
        decode_pgm(&bytes, scan_size_um)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes, scan_size_um)
    } else {
        Err("expected a P5 PGM or PNG file".into())
    };
    decoded.map_err(|reason| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

/// Masks are stored as 0/255 PGMs.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    save_gray(&mask.to_gray(), path)
}

pub fn load_mask(path: impl AsRef<Path>, scan_size_um: f64) -> Result<BinaryMask> {
    load_gray(path, scan_size_um).map(|img| BinaryMask::from_gray(&img))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> GrayImage {
        let mut p = Vec::new();
        for y in 0..h {
            for x in 0..w {
                p.push(f(x, y));
            }
        }
        GrayImage::new(w, h, p, 200.0).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GrayImage::new(0, 3, vec![], 200.0).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3], 200.0).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 4], 0.0).is_err());
        assert!(BinaryMask::new(2, 1, vec![true], 1.0).is_err());
    }

    #[test]
    fn four_pixel_pgm() {
        let bytes = b"P5\n2 2\n255\n\x00\x55\xaa\xff";
        let g = decode_pgm(bytes, 200.0).unwrap();
        assert_eq!(g.pixels(), &[0, 85, 170, 255]);
    }

    #[test]
    fn pgm_header_comments_and_depth() {
        let bytes = b"P5 # made by hand\n2 1 # dims\n255\n\x07\x08";
        assert_eq!(decode_pgm(bytes, 1.0).unwrap().pixels(), &[7, 8]);
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00", 1.0)
            .unwrap_err()
            .contains("bit depth"));
        assert!(decode_pgm(b"P5\n0 1\n255\n", 1.0).is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00", 1.0).is_err());
        assert!(decode_pgm(b"P2\n1 1\n255\n0", 1.0).is_err());
    }

    #[test]
    fn all_zero_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.pgm");
        let g = GrayImage::filled(510, 510, 0, 200.0).unwrap();
        save_gray(&g, &path).unwrap();
        let back = load_gray(&path, 200.0).unwrap();
        assert_eq!(back, g);
        assert_eq!(std::fs::read(&path).unwrap(), encode_pgm(&g));
    }

    #[test]
    fn png_gray_and_rgb() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, color: png::ColorType, data: &[u8]| {
            let path = dir.path().join(name);
            let file = std::fs::File::create(&path).unwrap();
            let mut enc = png::Encoder::new(std::io::BufWriter::new(file), 2, 1);
            enc.set_color(color);
            enc.set_depth(png::BitDepth::Eight);
            enc.write_header().unwrap().write_image_data(data).unwrap();
            path
        };
        let gray = write("g.png", png::ColorType::Grayscale, &[3, 250]);
        assert_eq!(load_gray(&gray, 200.0).unwrap().pixels(), &[3, 250]);
        let rgb = write("c.png", png::ColorType::Rgb, &[9, 9, 9, 40, 40, 40]);
        assert_eq!(load_gray(&rgb, 200.0).unwrap().pixels(), &[9, 40]);
        let colour = write("x.png", png::ColorType::Rgb, &[9, 1, 9, 40, 40, 40]);
        assert!(load_gray(&colour, 200.0).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_gray("/definitely/not/here.pgm", 200.0),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn crop_inner_block() {
        let g = img(4, 4, |x, y| (y * 4 + x) as u8);
        let c = crop(&g, &CropRect::new(1, 1, 2, 2)).unwrap();
        assert_eq!((c.width(), c.height()), (2, 2));
        assert_eq!(c.pixels(), &[5, 6, 9, 10]);
        assert!((c.scan_size_um() - 100.0).abs() < 1e-12);
        assert_eq!(crop(&g, &CropRect::full(&g)).unwrap(), g);
        assert!(crop(&g, &CropRect::new(3, 0, 2, 1)).is_err());
        assert!(crop(&g, &CropRect::new(0, 0, 0, 1)).is_err());
    }

    #[test]
    fn reflect_indices() {
        let got: Vec<usize> = (-4..8).map(|i| reflect(i, 4)).collect();
        assert_eq!(got, vec![3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
        assert_eq!(reflect(-3, 1), 0);
    }

    #[test]
    fn blur_keeps_constants() {
        let g = GrayImage::filled(13, 7, 77, 200.0).unwrap();
        assert_eq!(gaussian_blur(&g, 5, 1.0).unwrap(), g);
        assert!(gaussian_blur(&g, 4, 1.0).is_err());
        assert!(gaussian_blur(&g, 1, 1.0).is_err());
        assert!(gaussian_blur(&g, 3, 0.0).is_err());
    }

    #[test]
    fn blur_impulse_center_weight() {
        let g = img(9, 9, |x, y| if x == 4 && y == 4 { 255 } else { 0 });
        let out = gaussian_blur(&g, 3, 1.0).unwrap();
        // 2-D centre weight of a normalized 3x3 Gaussian, sigma 1.
        let e = (-0.5f64).exp();
        let w1d = 1.0 / (1.0 + 2.0 * e);
        let expected = (255.0 * w1d * w1d).round() as u8;
        assert_eq!(out.get(4, 4), expected);
        assert_eq!(expected, 52);
    }

    #[test]
    fn geometry_values() {
        let g = pixel_geometry(200.0, 510).unwrap();
        assert!((g.pixel_area_um2() - 0.153787).abs() < 1e-6);
        assert!((g.pixel_area_mm2 - 1.537870e-7).abs() < 1e-12);
        let unit = pixel_geometry(1000.0, 1000).unwrap();
        assert_eq!(unit.pixel_pitch_um, 1.0);
        assert!((unit.pixel_area_mm2 - 1e-6).abs() < 1e-18);
        let g304 = pixel_geometry(304.0, 304).unwrap();
        assert_eq!(g304.pixel_pitch_um, 1.0);
        assert!(pixel_geometry(0.0, 10).is_err());
        assert!(pixel_geometry(10.0, 0).is_err());
        assert!(pixel_geometry(-1.0, 10).is_err());
    }
}
