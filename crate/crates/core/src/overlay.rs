//! Color-coded plot overlay.

use crate::plotio::PlotRecord;
use crate::raster::{PlantMask, RgbImage};

pub const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
];

const FILL_ALPHA: f32 = 0.3;
const BORDER: i64 = 2;

pub fn mask_to_rgb(mask: &PlantMask) -> RgbImage {
    let data = mask.as_bytes().iter().flat_map(|&b| [b * 255; 3]).collect();
    RgbImage::from_raw(mask.width(), mask.height(), data).expect("mask dimensions are positive")
}

/// Tints each plot with `PALETTE[(row + range) % 8]` and outlines it.
/// When `use_source` is set the records' source-image rectangles are drawn.
pub fn render_overlay(base: &RgbImage, records: &[PlotRecord], use_source: bool) -> RgbImage {
    let (w, h) = (base.width() as i64, base.height() as i64);
    let mut data = base.as_bytes().to_vec();
    for r in records {
        let [x0, x1, y0, y1] = match (use_source, r.source) {
            (true, Some(s)) => [s.x_left, s.x_right, s.y_top, s.y_bot],
            _ => r.rect(),
        };
        let color = PALETTE[(r.row + r.range) % PALETTE.len()];
        for y in y0.max(0)..y1.min(h) {
            for x in x0.max(0)..x1.min(w) {
                let edge = x - x0 < BORDER || x1 - 1 - x < BORDER || y - y0 < BORDER || y1 - 1 - y < BORDER;
                let alpha = if edge { 1.0 } else { FILL_ALPHA };
                let i = ((y * w + x) * 3) as usize;
                for c in 0..3 {
                    let v = data[i + c] as f32 * (1.0 - alpha) + color[c] as f32 * alpha;
                    data[i + c] = v.round() as u8;
                }
            }
        }
    }
    RgbImage::from_raw(base.width(), base.height(), data).expect("same dimensions as base")
}
