//! Raster inputs: RGB orthomosaics, hue planes and binary plant masks.
//!
//! Hue uses the 8-bit convention of degrees halved, so values lie in
//! `[0, 179]`. Achromatic pixels (max channel == min channel) get hue 0,
//! which keeps soil and shadow outside the default vegetation band `[20, 90]`.
//! All geometry is in pixel coordinates; georeferencing tags are ignored.

use std::io::ErrorKind;
use std::path::Path;

use image::{ColorType, DynamicImage, GrayImage, ImageError, ImageFormat, RgbImage as ImgRgb};

use crate::error::{Error, Result};

pub const DEFAULT_HUE_LO: u8 = 20;
pub const DEFAULT_HUE_HI: u8 = 90;
pub const HUE_MAX: u8 = 179;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    /// Wraps row-major interleaved RGB bytes.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if data.len() != width * height * 3 {
            return Err(Error::Config(format!(
                "rgb buffer has {} bytes, expected {}",
                data.len(),
                width * height * 3
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::from_raw(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HueImage {
    width: usize,
    height: usize,
    hue: Vec<u8>,
}

impl HueImage {
    pub fn from_raw(width: usize, height: usize, hue: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if hue.len() != width * height {
            return Err(Error::Config(format!(
                "hue buffer has {} values, expected {}",
                hue.len(),
                width * height
            )));
        }
        if let Some(&bad) = hue.iter().find(|&&h| h > HUE_MAX) {
            return Err(Error::Config(format!("hue value {bad} exceeds {HUE_MAX}")));
        }
        Ok(Self { width, height, hue })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.hue[y * self.width + x]
    }

    pub fn values(&self) -> &[u8] {
        &self.hue
    }

    /// Histogram over the 180 hue bins.
    pub fn histogram(&self) -> [u64; 180] {
        let mut hist = [0u64; 180];
        for &h in &self.hue {
            hist[h as usize] += 1;
        }
        hist
    }
}

/// Binary plant mask, one byte per pixel holding 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantMask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl PlantMask {
    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        Ok(Self { width, height, bits: vec![0; width * height] })
    }

    /// Builds a mask from arbitrary bytes; any nonzero value counts as plant.
    pub fn from_raw(width: usize, height: usize, mut bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if bits.len() != width * height {
            return Err(Error::Config(format!(
                "mask buffer has {} values, expected {}",
                bits.len(),
                width * height
            )));
        }
        for b in &mut bits {
            *b = (*b != 0) as u8;
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut mask = Self::zeros(width, height)?;
        for y in 0..height {
            for x in 0..width {
                mask.bits[y * width + x] = f(x, y) as u8;
            }
        }
        Ok(mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] != 0
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value as u8;
    }

    /// Row `y` as a slice of 0/1 bytes.
    pub fn row(&self, y: usize) -> &[u8] {
        &self.bits[y * self.width..(y + 1) * self.width]
    }

    pub fn row_mut(&mut self, y: usize) -> &mut [u8] {
        &mut self.bits[y * self.width..(y + 1) * self.width]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().map(|&b| b as u64).sum()
    }

    pub fn crop(&self, roi: &RegionOfInterest) -> Result<PlantMask> {
        roi.check_inside(self.width, self.height)?;
        let mut bits = Vec::with_capacity(roi.width * roi.height);
        for y in roi.y0..roi.y0 + roi.height {
            bits.extend_from_slice(&self.row(y)[roi.x0..roi.x0 + roi.width]);
        }
        Ok(PlantMask { width: roi.width, height: roi.height, bits })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionOfInterest {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl RegionOfInterest {
    pub fn full(width: usize, height: usize) -> Self {
        Self { x0: 0, y0: 0, width, height }
    }

    fn check_inside(&self, image_width: usize, image_height: usize) -> Result<()> {
        let fits = self.width > 0
            && self.height > 0
            && self.x0.checked_add(self.width).is_some_and(|r| r <= image_width)
            && self.y0.checked_add(self.height).is_some_and(|b| b <= image_height);
        if fits {
            Ok(())
        } else {
            Err(Error::RoiOutOfBounds {
                x0: self.x0,
                y0: self.y0,
                width: self.width,
                height: self.height,
                image_width,
                image_height,
            })
        }
    }
}

fn read_image(path: &Path) -> Result<DynamicImage> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let format = image::guess_format(&bytes).map_err(|e| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Tiff | ImageFormat::Pnm) {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("{format:?} is not a lossless raster format"),
        });
    }
    image::load_from_memory_with_format(&bytes, format).map_err(|e| decode_error(path, e))
}

fn decode_error(path: &Path, err: ImageError) -> Error {
    match err {
        ImageError::IoError(e) if e.kind() == ErrorKind::UnexpectedEof => Error::Truncated(path.to_path_buf()),
        ImageError::Unsupported(e) => Error::UnsupportedFormat { path: path.to_path_buf(), detail: e.to_string() },
        other => {
            let detail = other.to_string();
            let lower = detail.to_ascii_lowercase();
            if lower.contains("eof") || lower.contains("end of") || lower.contains("truncat") {
                Error::Truncated(path.to_path_buf())
            } else {
                Error::Decode { path: path.to_path_buf(), detail }
            }
        }
    }
}

/// Decodes an 8-bit PNG or TIFF (gray, RGB or RGBA; alpha is dropped).
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = read_image(path)?;
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::Rgb8 | ColorType::Rgba8 => {}
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("expected 8-bit samples, found {other:?}"),
            })
        }
    }
    let rgb = img.into_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    RgbImage::from_raw(w, h, rgb.into_raw())
}

/// Loads a single-channel raster; any nonzero sample is plant.
pub fn load_mask(path: impl AsRef<Path>) -> Result<PlantMask> {
    let path = path.as_ref();
    let img = read_image(path)?;
    let channels = img.color().channel_count();
    if channels != 1 {
        return Err(Error::MultiChannelMask { path: path.to_path_buf(), channels });
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let bits: Vec<u8> = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw(),
        other => other.into_luma16().into_raw().into_iter().map(|v| (v != 0) as u8).collect(),
    };
    PlantMask::from_raw(w, h, bits)
}

/// Writes the mask as 0/255 grayscale; PNG or PGM depending on extension.
pub fn save_mask(path: impl AsRef<Path>, mask: &PlantMask) -> Result<()> {
    let path = path.as_ref();
    let bytes = mask.as_bytes().iter().map(|&b| b * 255).collect();
    let gray = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, bytes)
        .expect("mask buffer length matches dimensions");
    let format = ImageFormat::from_path(path).unwrap_or(ImageFormat::Png);
    gray.save_with_format(path, format).map_err(|e| match e {
        ImageError::IoError(io) => Error::io(path, io),
        other => Error::Decode { path: path.to_path_buf(), detail: other.to_string() },
    })
}

pub fn save_rgb_png(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let buf = ImgRgb::from_raw(img.width() as u32, img.height() as u32, img.as_bytes().to_vec())
        .expect("rgb buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png).map_err(|e| match e {
        ImageError::IoError(io) => Error::io(path, io),
        other => Error::Decode { path: path.to_path_buf(), detail: other.to_string() },
    })
}

pub fn crop(img: &RgbImage, roi: &RegionOfInterest) -> Result<RgbImage> {
    roi.check_inside(img.width, img.height)?;
    let mut data = Vec::with_capacity(roi.width * roi.height * 3);
    for y in roi.y0..roi.y0 + roi.height {
        let start = (y * img.width + roi.x0) * 3;
        data.extend_from_slice(&img.data[start..start + roi.width * 3]);
    }
    RgbImage::from_raw(roi.width, roi.height, data)
}

/// Hexcone hue of one pixel on the halved-degree scale.
pub fn rgb_to_hue(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(|c| c as f64);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    if delta == 0.0 {
        return 0;
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let half_degrees = (sector * 30.0).round() as u32;
    (half_degrees % 180) as u8
}

pub fn to_hue(img: &RgbImage) -> HueImage {
    let hue = img.data.chunks_exact(3).map(|p| rgb_to_hue([p[0], p[1], p[2]])).collect();
    HueImage { width: img.width, height: img.height, hue }
}

/// Plant where `lo <= hue <= hi`.
pub fn segment_hue_threshold(h: &HueImage, lo: u8, hi: u8) -> Result<PlantMask> {
    if lo > hi || hi > HUE_MAX {
        return Err(Error::InvalidHueBand { lo, hi });
    }
    let bits = h.hue.iter().map(|&v| (lo <= v && v <= hi) as u8).collect();
    Ok(PlantMask { width: h.width, height: h.height, bits })
}

/// Otsu threshold over the hue histogram. Class 0 is `hue <= t`.
/// Returns `None` when the image holds a single hue value.
pub fn otsu_threshold(hist: &[u64; 180]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let mut w_lo = 0u64;
    let mut sum_lo = 0f64;
    let mut best: Option<(f64, u8)> = None;
    for (t, &count) in hist.iter().enumerate() {
        w_lo += count;
        sum_lo += t as f64 * count as f64;
        let w_hi = total - w_lo;
        if w_lo == 0 || w_hi == 0 {
            continue;
        }
        let mean_lo = sum_lo / w_lo as f64;
        let mean_hi = (sum_all - sum_lo) / w_hi as f64;
        let between = w_lo as f64 * w_hi as f64 * (mean_lo - mean_hi).powi(2);
        if best.is_none_or(|(v, _)| between > v) {
            best = Some((between, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

/// Plant where hue is above the Otsu threshold. A constant image yields an
/// all-zero mask.
pub fn segment_otsu(h: &HueImage) -> PlantMask {
    let bits = match otsu_threshold(&h.histogram()) {
        Some(t) => h.hue.iter().map(|&v| (v > t) as u8).collect(),
        None => vec![0; h.hue.len()],
    };
    PlantMask { width: h.width, height: h.height, bits }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_png_rgb(path: &Path, w: u32, h: u32, data: Vec<u8>) {
        ImgRgb::from_raw(w, h, data).unwrap().save(path).unwrap();
    }

    #[test]
    fn load_png_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("px.png");
        let bytes = vec![1, 2, 3, 250, 251, 252, 0, 128, 255, 17, 34, 51];
        write_png_rgb(&path, 2, 2, bytes.clone());
        let img = load_image(&path).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.as_bytes(), &bytes[..]);
        assert_eq!(img.pixel(1, 1), [17, 34, 51]);
    }

    #[test]
    fn load_tiff_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("px.tif");
        let bytes: Vec<u8> = (0..4 * 3 * 3).map(|v| v as u8 * 7).collect();
        ImgRgb::from_raw(4, 3, bytes.clone()).unwrap().save(&path).unwrap();
        assert_eq!(load_image(&path).unwrap().as_bytes(), &bytes[..]);
    }

    #[test]
    fn load_errors_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.png");
        assert!(matches!(load_image(&missing), Err(Error::FileNotFound(_))));

        let text = dir.path().join("fake.png");
        std::fs::write(&text, "this is not an image").unwrap();
        assert!(matches!(load_image(&text), Err(Error::UnsupportedFormat { .. })));

        let good = dir.path().join("good.png");
        write_png_rgb(&good, 64, 64, (0..64 * 64 * 3).map(|v| (v * 31 % 251) as u8).collect());
        let full = std::fs::read(&good).unwrap();
        let cut = dir.path().join("cut.png");
        std::fs::write(&cut, &full[..full.len() / 2]).unwrap();
        assert!(matches!(load_image(&cut), Err(Error::Truncated(_))), "{:?}", load_image(&cut));
    }

    #[test]
    fn crop_examples() {
        let img = RgbImage::from_fn(8, 7, |x, y| [x as u8, y as u8, (x * y) as u8]).unwrap();
        assert_eq!(crop(&img, &RegionOfInterest::full(8, 7)).unwrap(), img);

        let one = crop(&img, &RegionOfInterest { x0: 3, y0: 5, width: 1, height: 1 }).unwrap();
        assert_eq!(one.pixel(0, 0), img.pixel(3, 5));

        let err = crop(&img, &RegionOfInterest { x0: 6, y0: 0, width: 3, height: 2 });
        assert!(matches!(err, Err(Error::RoiOutOfBounds { .. })));
    }

    #[test]
    fn hue_examples() {
        assert_eq!(rgb_to_hue([0, 255, 0]), 60);
        assert_eq!(rgb_to_hue([255, 0, 0]), 0);
        assert_eq!(rgb_to_hue([128, 128, 128]), 0);
        assert_eq!(rgb_to_hue([0, 0, 255]), 120);
        // 359 degrees rounds to 180 and wraps to 0.
        assert_eq!(rgb_to_hue([255, 0, 4]), 0);
    }

    #[test]
    fn hue_threshold_examples() {
        let h = HueImage::from_raw(3, 1, vec![60, 0, 90]).unwrap();
        let m = segment_hue_threshold(&h, DEFAULT_HUE_LO, DEFAULT_HUE_HI).unwrap();
        assert_eq!(m.as_bytes(), &[1, 0, 1]);
        assert!(matches!(segment_hue_threshold(&h, 50, 40), Err(Error::InvalidHueBand { .. })));

        let red = RgbImage::from_fn(5, 4, |_, _| [255, 0, 0]).unwrap();
        let m = segment_hue_threshold(&to_hue(&red), 20, 90).unwrap();
        assert_eq!(m.count_ones(), 0);
    }

    #[test]
    fn otsu_two_level_picks_high_half() {
        let hue: Vec<u8> = (0..100).map(|i| if i % 2 == 0 { 10 } else { 170 }).collect();
        let h = HueImage::from_raw(10, 10, hue.clone()).unwrap();
        let t = otsu_threshold(&h.histogram()).unwrap();
        assert!((10..170).contains(&t));
        let m = segment_otsu(&h);
        for (v, b) in hue.iter().zip(m.as_bytes()) {
            assert_eq!(*b, (*v == 170) as u8);
        }
    }

    #[test]
    fn otsu_constant_image_is_empty() {
        let h = HueImage::from_raw(4, 4, vec![77; 16]).unwrap();
        assert_eq!(segment_otsu(&h).count_ones(), 0);
    }

    /// Brute-force between-class variance for every threshold, computed from
    /// raw pixel lists rather than running sums.
    fn brute_force_best_variance(values: &[u8]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for t in 0..180u16 {
            let lo: Vec<f64> = values.iter().filter(|&&v| v as u16 <= t).map(|&v| v as f64).collect();
            let hi: Vec<f64> = values.iter().filter(|&&v| v as u16 > t).map(|&v| v as f64).collect();
            if lo.is_empty() || hi.is_empty() {
                continue;
            }
            let n = values.len() as f64;
            let (wl, wh) = (lo.len() as f64 / n, hi.len() as f64 / n);
            let ml = lo.iter().sum::<f64>() / lo.len() as f64;
            let mh = hi.iter().sum::<f64>() / hi.len() as f64;
            best = best.max(wl * wh * (ml - mh).powi(2));
        }
        best
    }

    #[test]
    fn otsu_matches_brute_force_on_bimodal() {
        // Values 0..=255 folded into hue, split into two lumps.
        let values: Vec<u8> = (0..=255u32)
            .map(|v| if v < 128 { (v * 40 / 128 + 15) as u8 } else { ((v - 128) * 50 / 128 + 110) as u8 })
            .collect();
        let h = HueImage::from_raw(16, 16, values.clone()).unwrap();
        let t = otsu_threshold(&h.histogram()).unwrap();
        let lo: Vec<f64> = values.iter().filter(|&&v| v <= t).map(|&v| v as f64).collect();
        let hi: Vec<f64> = values.iter().filter(|&&v| v > t).map(|&v| v as f64).collect();
        let n = values.len() as f64;
        let ml = lo.iter().sum::<f64>() / lo.len() as f64;
        let mh = hi.iter().sum::<f64>() / hi.len() as f64;
        let got = (lo.len() as f64 / n) * (hi.len() as f64 / n) * (ml - mh).powi(2);
        let best = brute_force_best_variance(&values);
        assert!((got - best).abs() <= 1e-9 * best, "{got} vs {best}");
    }

    #[test]
    fn load_mask_examples() {
        let dir = tempfile::tempdir().unwrap();
        let p255 = dir.path().join("m255.png");
        GrayImage::from_raw(3, 2, vec![0, 255, 0, 255, 255, 0]).unwrap().save(&p255).unwrap();
        assert_eq!(load_mask(&p255).unwrap().as_bytes(), &[0, 1, 0, 1, 1, 0]);

        let p1 = dir.path().join("m1.pgm");
        GrayImage::from_raw(3, 2, vec![0, 1, 1, 0, 0, 1]).unwrap().save(&p1).unwrap();
        assert_eq!(load_mask(&p1).unwrap().as_bytes(), &[0, 1, 1, 0, 0, 1]);

        let rgb = dir.path().join("rgb.png");
        write_png_rgb(&rgb, 2, 2, vec![0; 12]);
        assert!(matches!(load_mask(&rgb), Err(Error::MultiChannelMask { channels: 3, .. })));
    }

    #[test]
    fn save_mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mask = PlantMask::from_fn(9, 5, |x, y| (x + y) % 3 == 0).unwrap();
        for name in ["m.png", "m.pgm"] {
            let p = dir.path().join(name);
            save_mask(&p, &mask).unwrap();
            assert_eq!(load_mask(&p).unwrap(), mask);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn hue_image() -> impl Strategy<Value = HueImage> {
            (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
                proptest::collection::vec(0u8..=HUE_MAX, w * h)
                    .prop_map(move |v| HueImage::from_raw(w, h, v).unwrap())
            })
        }

        proptest! {
            #[test]
            fn count_equals_histogram_mass(img in hue_image(), a in 0u8..=HUE_MAX, b in 0u8..=HUE_MAX) {
                let (lo, hi) = (a.min(b), a.max(b));
                let mask = segment_hue_threshold(&img, lo, hi).unwrap();
                let hist = img.histogram();
                let mass: u64 = hist[lo as usize..=hi as usize].iter().sum();
                prop_assert_eq!(mask.count_ones(), mass);
            }

            #[test]
            fn rethreshold_is_idempotent(img in hue_image(), a in 0u8..=HUE_MAX, b in 0u8..=HUE_MAX) {
                let (lo, hi) = (a.min(b), a.max(b));
                let mask = segment_hue_threshold(&img, lo, hi).unwrap();
                // Plant pixels map to a hue inside the band, others outside it.
                let outside = if lo > 0 { 0 } else if hi < HUE_MAX { HUE_MAX } else { return Ok(()) };
                let hue: Vec<u8> = mask.as_bytes().iter().map(|&b| if b == 1 { lo } else { outside }).collect();
                let again = segment_hue_threshold(&HueImage::from_raw(img.width(), img.height(), hue).unwrap(), lo, hi).unwrap();
                prop_assert_eq!(again, mask);
            }

            #[test]
            fn crop_commutes_with_segmentation(
                w in 1usize..16, h in 1usize..16, seed in any::<u64>(),
                fx in 0.0f64..1.0, fy in 0.0f64..1.0, fw in 0.0f64..1.0, fh in 0.0f64..1.0,
            ) {
                let img = RgbImage::from_fn(w, h, |x, y| {
                    let v = seed.wrapping_mul(6364136223846793005).wrapping_add(((y * w + x) as u64).wrapping_mul(1442695040888963407));
                    [(v >> 8) as u8, (v >> 24) as u8, (v >> 40) as u8]
                }).unwrap();
                let x0 = (fx * w as f64) as usize % w;
                let y0 = (fy * h as f64) as usize % h;
                let rw = 1 + (fw * (w - x0 - 1) as f64) as usize;
                let rh = 1 + (fh * (h - y0 - 1) as f64) as usize;
                let roi = RegionOfInterest { x0, y0, width: rw, height: rh };
                let a = segment_hue_threshold(&to_hue(&crop(&img, &roi).unwrap()), 20, 90).unwrap();
                let b = segment_hue_threshold(&to_hue(&img), 20, 90).unwrap().crop(&roi).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
