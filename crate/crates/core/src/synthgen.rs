//! Synthetic grid-planted fields with known plot boundaries.
//!
//! Plants are i.i.d. pixels: `plant_density` inside each planted rectangle,
//! `noise_density` everywhere else. Randomness comes from ChaCha8
//! (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`) on three fixed streams:
//!
//! * stream 0, per plot in range-major then row order: one `u64` for the
//!   empty-plot draw, then one `u64` for the jitter draw;
//! * stream 1, per pixel in row-major order: one `u64`;
//! * stream 2, used only by [`SynthConfig::regular`]: one `u64` per crop set.
//!
//! A Bernoulli(p) draw is `x < floor(p·2^64)` (always true for `p >= 1`);
//! a jitter draw is `x % (germination_jitter + 1)`. The same seed and
//! config therefore give byte-identical masks on every platform.
//!
//! Ground-truth boundaries sit at gap centers: midway between the planted
//! edges of neighbouring plots. Outer field edges sit half a range gap (or
//! half a plot gap) outside the planted area, ignoring jitter.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::comb::PlanterSpec;
use crate::error::{Error, Result};
use crate::metrics::{GroundTruthGrid, Rect};
use crate::plotio::PlotRecord;
use crate::raster::PlantMask;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub spec: PlanterSpec,
    pub m_rows: usize,
    pub n_ranges: usize,
    pub width: usize,
    pub height: usize,
    /// True `Δx` per range, `M/C` values each.
    pub crop_set_offsets: Vec<Vec<i64>>,
    /// Planted `[top, bottom)` rows per range, before jitter.
    pub range_positions: Vec<(usize, usize)>,
    pub plant_density: f64,
    pub noise_density: f64,
    pub empty_plot_fraction: f64,
    pub germination_jitter: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthPlot {
    pub row: usize,
    pub range: usize,
    /// Rectangle that receives plants (after jitter).
    pub planted: Rect,
    pub empty: bool,
    pub jitter: usize,
}

#[derive(Debug, Clone)]
pub struct SynthField {
    pub mask: PlantMask,
    pub truth: GroundTruthGrid,
    /// Same order as `truth.plots`.
    pub plots: Vec<SynthPlot>,
}

fn bernoulli_threshold(p: f64) -> Option<u64> {
    // None means "always".
    (p < 1.0).then(|| (p.max(0.0) * 18_446_744_073_709_551_616.0) as u64)
}

#[inline]
fn draw(rng: &mut ChaCha8Rng, threshold: Option<u64>) -> bool {
    let x = rng.next_u64();
    threshold.is_none_or(|t| x < t)
}

impl SynthConfig {
    /// Evenly pitched field: ranges of `range_pitch` rows separated by
    /// `range_gap`, with half a gap of margin above the first and below the
    /// last range. Crop-set offsets are drawn once per planter pass and shared
    /// by all ranges: the first in `[0, max_offset]`, the rest in
    /// `[-max_offset, max_offset]`. Densities default to a clean field.
    pub fn regular(
        spec: PlanterSpec,
        m_rows: usize,
        n_ranges: usize,
        range_pitch: usize,
        range_gap: usize,
        max_offset: usize,
        seed: u64,
    ) -> Self {
        let sets = m_rows / spec.c_rows.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        let span = 2 * max_offset as u64 + 1;
        let offsets: Vec<i64> = (0..sets)
            .map(|i| {
                let x = rng.next_u64();
                if i == 0 {
                    (x % (max_offset as u64 + 1)) as i64
                } else {
                    (x % span) as i64 - max_offset as i64
                }
            })
            .collect();
        let field_end: i64 = offsets.iter().sum::<i64>() + (sets * spec.d_crop) as i64;
        let half = range_gap / 2;
        let range_positions = (0..n_ranges)
            .map(|z| (z * range_pitch + half, (z + 1) * range_pitch - (range_gap - half)))
            .collect();
        Self {
            spec,
            m_rows,
            n_ranges,
            width: field_end.max(1) as usize + 1,
            height: n_ranges * range_pitch + 1,
            crop_set_offsets: vec![offsets; n_ranges],
            range_positions,
            plant_density: 0.6,
            noise_density: 0.01,
            empty_plot_fraction: 0.0,
            germination_jitter: 0,
            seed,
        }
    }

    /// 20 rows x 5 ranges at 1 px ≈ 1 cm: 4-row planter, 200 px plot pitch,
    /// 40 px plot gaps, 600 px range pitch with 60 px range gaps.
    pub fn example_field(seed: u64) -> Self {
        let spec = PlanterSpec { c_rows: 4, d_crop: 800, d_row: 200, d_gap: 40, d_ran_gap: 100 };
        Self::regular(spec, 20, 5, 600, 60, 8, seed)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("synth config serializes")
    }

    fn validate(&self) -> Result<()> {
        let overflow = |msg: String| Err(Error::GeometryOverflow(msg));
        for (name, p) in [
            ("plant_density", self.plant_density),
            ("noise_density", self.noise_density),
            ("empty_plot_fraction", self.empty_plot_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.noise_density > 0.0 && self.noise_density >= self.plant_density {
            return Err(Error::Config("noise_density must be below plant_density".into()));
        }
        self.spec.validate()?;
        if self.m_rows == 0 || !self.m_rows.is_multiple_of(self.spec.c_rows) {
            return Err(Error::RowsNotDivisible { rows: self.m_rows, c_rows: self.spec.c_rows });
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::EmptyImage { width: self.width, height: self.height });
        }
        let sets = self.m_rows / self.spec.c_rows;
        if self.crop_set_offsets.len() != self.n_ranges || self.crop_set_offsets.iter().any(|o| o.len() != sets) {
            return Err(Error::Config(format!("crop_set_offsets must hold {} lists of {sets} offsets", self.n_ranges)));
        }
        if self.range_positions.len() != self.n_ranges || self.n_ranges == 0 {
            return Err(Error::Config(format!("range_positions must hold {} entries", self.n_ranges)));
        }
        for (z, &(top, bot)) in self.range_positions.iter().enumerate() {
            if top + self.germination_jitter >= bot {
                return overflow(format!("range {z} rows [{top}, {bot}) leave no room for jitter"));
            }
            if bot > self.height {
                return overflow(format!("range {z} ends at row {bot} past height {}", self.height));
            }
            if z > 0 && self.range_positions[z - 1].1 > top {
                return overflow(format!("range {z} overlaps range {}", z - 1));
            }
        }
        Ok(())
    }

    /// Per range: `(cell_left, cell_right)` of every plot, in row order.
    fn cells(&self, z: usize) -> Vec<(i64, i64)> {
        let s = &self.spec;
        let mut cells = Vec::with_capacity(self.m_rows);
        let mut x_off = 0i64;
        for &dx in &self.crop_set_offsets[z] {
            let start = x_off + dx;
            for k in 0..s.c_rows {
                let cl = start + (k * s.d_row) as i64;
                let cr = if k + 1 == s.c_rows { start + s.d_crop as i64 } else { cl + s.d_row as i64 };
                cells.push((cl, cr));
            }
            x_off = start + s.d_crop as i64;
        }
        cells
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthField> {
    cfg.validate()?;
    let s = cfg.spec;
    let (m, n) = (cfg.m_rows, cfg.n_ranges);
    let (width, height) = (cfg.width as i64, cfg.height as i64);
    let gap_lo = (s.d_gap / 2) as i64;
    let gap_hi = s.d_gap as i64 - gap_lo;

    let mut layout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    layout_rng.set_stream(0);
    let empty_t = bernoulli_threshold(cfg.empty_plot_fraction);
    let jitter_span = cfg.germination_jitter as u64 + 1;
    // (empty, jitter) per plot, range-major.
    let attrs: Vec<(bool, usize)> = (0..n * m)
        .map(|_| {
            let empty = draw(&mut layout_rng, empty_t);
            let jitter = (layout_rng.next_u64() % jitter_span) as usize;
            (empty, if empty { 0 } else { jitter })
        })
        .collect();

    let cells: Vec<Vec<(i64, i64)>> = (0..n).map(|z| cfg.cells(z)).collect();
    let mut plots = Vec::with_capacity(n * m);
    for (z, range_cells) in cells.iter().enumerate() {
        let (top, bot) = cfg.range_positions[z];
        for (row, &(cl, cr)) in range_cells.iter().enumerate() {
            let (empty, jitter) = attrs[z * m + row];
            let planted = Rect { x_left: cl + gap_lo, x_right: cr - gap_hi, y_top: (top + jitter) as i64, y_bot: bot as i64 };
            if planted.x_left < 0 || planted.x_right > width || planted.x_left >= planted.x_right {
                return Err(Error::GeometryOverflow(format!(
                    "plot (row {row}, range {z}) spans columns [{}, {}) outside width {width}",
                    planted.x_left, planted.x_right
                )));
            }
            plots.push(SynthPlot { row, range: z, planted, empty, jitter });
        }
    }

    // Row-wise density map: per range, the plot index owning each column.
    let mut owner: Vec<Vec<Option<usize>>> = vec![vec![None; cfg.width]; n];
    for p in &plots {
        for x in p.planted.x_left..p.planted.x_right {
            owner[p.range][x as usize] = Some(p.row);
        }
    }
    let plant_t = bernoulli_threshold(cfg.plant_density);
    let noise_t = bernoulli_threshold(cfg.noise_density);
    let mut pixel_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    pixel_rng.set_stream(1);
    let mut mask = PlantMask::zeros(cfg.width, cfg.height)?;
    for y in 0..cfg.height {
        let z = cfg.range_positions.iter().position(|&(t, b)| t <= y && y < b);
        let row = mask.row_mut(y);
        for (x, px) in row.iter_mut().enumerate() {
            let planted = z.and_then(|z| owner[z][x].map(|r| &plots[z * m + r])).is_some_and(|p| {
                !p.empty && (p.planted.y_top as usize) <= y
            });
            *px = draw(&mut pixel_rng, if planted { plant_t } else { noise_t }) as u8;
        }
    }

    let truth = truth_grid(cfg, &cells, &plots, width, height);
    Ok(SynthField { mask, truth, plots })
}

fn truth_grid(cfg: &SynthConfig, cells: &[Vec<(i64, i64)>], plots: &[SynthPlot], width: i64, height: i64) -> GroundTruthGrid {
    let (m, n, c) = (cfg.m_rows, cfg.n_ranges, cfg.spec.c_rows);
    let pos = |z: usize| (cfg.range_positions[z].0 as i64, cfg.range_positions[z].1 as i64);
    let outer_top = if n > 1 { (pos(1).0 - pos(0).1) / 2 } else { 0 };
    let outer_bot = if n > 1 { (pos(n - 1).0 - pos(n - 2).1) / 2 } else { 0 };
    let jitter = |z: usize, row: usize| plots[z * m + row].jitter as i64;

    let mut records = Vec::with_capacity(n * m);
    for (z, cells) in cells.iter().enumerate() {
        let (top, bot) = pos(z);
        for (row, &(cl, cr)) in cells.iter().enumerate() {
            let k = row % c;
            let x_left = if k == 0 && row > 0 { (cells[row - 1].1 + cl).div_euclid(2) } else { cl };
            let x_right = if k + 1 == c && row + 1 < m { (cr + cells[row + 1].0).div_euclid(2) } else { cr };
            let y_top = if z == 0 { top - outer_top } else { (pos(z - 1).1 + top + jitter(z, row)).div_euclid(2) };
            let y_bot = if z + 1 == n { bot + outer_bot } else { (bot + pos(z + 1).0 + jitter(z + 1, row)).div_euclid(2) };
            records.push(PlotRecord {
                row,
                range: z,
                x_left: x_left.clamp(0, width),
                x_right: x_right.clamp(0, width),
                y_top: y_top.clamp(0, height),
                y_bot: y_bot.clamp(0, height),
                source: None,
                flagged: false,
            });
        }
    }
    GroundTruthGrid { plots: records }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthConfig {
        let spec = PlanterSpec { c_rows: 2, d_crop: 40, d_row: 20, d_gap: 6, d_ran_gap: 20 };
        SynthConfig::regular(spec, 4, 3, 50, 10, 3, seed)
    }

    #[test]
    fn dense_clean_field_is_union_of_planted_rects() {
        let cfg = SynthConfig { plant_density: 1.0, noise_density: 0.0, ..small(3) };
        let f = generate(&cfg).unwrap();
        let inside = |x: usize, y: usize| {
            f.plots.iter().any(|p| {
                let r = p.planted;
                (r.x_left..r.x_right).contains(&(x as i64)) && (r.y_top..r.y_bot).contains(&(y as i64))
            })
        };
        for y in 0..cfg.height {
            for x in 0..cfg.width {
                assert_eq!(f.mask.get(x, y), inside(x, y), "({x},{y})");
            }
        }
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SynthConfig::example_field(9);
        assert_eq!(SynthConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert!(SynthConfig::from_toml("seed = 1").unwrap_err().is_validation());
    }

    #[test]
    fn all_empty_field() {
        let cfg = SynthConfig { empty_plot_fraction: 1.0, noise_density: 0.0, ..small(4) };
        let f = generate(&cfg).unwrap();
        assert_eq!(f.mask.count_ones(), 0);
        assert_eq!(f.truth.plots.len(), 4 * 3);
    }

    #[test]
    fn example_field_dimensions() {
        let cfg = SynthConfig::example_field(1);
        assert_eq!((cfg.m_rows, cfg.n_ranges), (20, 5));
        let f = generate(&cfg).unwrap();
        assert_eq!(f.truth.plots.len(), 100);
        assert!(cfg.width.abs_diff(4000) < 50 && cfg.height == 3001);
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = SynthConfig { germination_jitter: 4, empty_plot_fraction: 0.2, ..small(99) };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.mask.as_bytes(), b.mask.as_bytes());
        let c = generate(&SynthConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.mask.as_bytes(), c.mask.as_bytes());
    }

    #[test]
    fn noiseless_pixels_fall_in_truth() {
        let cfg = SynthConfig { noise_density: 0.0, germination_jitter: 5, ..small(7) };
        let f = generate(&cfg).unwrap();
        for y in 0..cfg.height {
            for x in 0..cfg.width {
                if f.mask.get(x, y) {
                    let (x, y) = (x as i64, y as i64);
                    assert!(f.truth.plots.iter().any(|t| t.x_left <= x && x < t.x_right && t.y_top <= y && y < t.y_bot));
                }
            }
        }
    }

    #[test]
    fn truth_tiles_the_field() {
        let f = generate(&small(11)).unwrap();
        let m = 4;
        for z in 0..3 {
            let row: Vec<&PlotRecord> = f.truth.plots.iter().filter(|p| p.range == z).collect();
            assert_eq!(row.len(), m);
            for w in row.windows(2) {
                assert_eq!(w[0].x_right, w[1].x_left);
            }
        }
        // Vertical neighbours share the boundary.
        for p in f.truth.plots.iter().filter(|p| p.range < 2) {
            let below = f.truth.plots.iter().find(|q| q.range == p.range + 1 && q.row == p.row).unwrap();
            assert_eq!(p.y_bot, below.y_top);
        }
    }

    #[test]
    fn geometry_overflow_reported() {
        let cfg = SynthConfig { width: 30, ..small(1) };
        assert!(matches!(generate(&cfg), Err(Error::GeometryOverflow(_))));
    }
}
