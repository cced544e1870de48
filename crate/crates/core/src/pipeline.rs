//! End-to-end extraction: segmentation, energy profiles, range separation,
//! crop-set layout and boundary fine-tuning, plus the run configuration and
//! the artifacts written for each run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::comb::{build_comb, build_triangle, modify_comb, CombFunction, PlanterSpec};
use crate::error::{Error, Result};
use crate::finetune::{finetune_grid, PlotGrid, Provenance};
use crate::overlay::{mask_to_rgb, render_overlay};
use crate::plotio::{self, grid_records, PlotRecord};
use crate::profile::{global_row_energy, normalize, range_energy, EnergyProfile, NormalizedProfile};
use crate::range_sep::{separate_ranges, RangeSeparation, SearchBounds};
use crate::raster::{
    crop, load_image, load_mask, save_rgb_png, segment_hue_threshold, segment_otsu, to_hue, PlantMask,
    RegionOfInterest, RgbImage, DEFAULT_HUE_HI, DEFAULT_HUE_LO,
};
use crate::row_sep::{CropSetLayout, RowSepConfig, RowSeparator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Rgb,
    Mask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    pub kind: InputKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum Segmentation {
    Hue {
        #[serde(default = "default_hue_lo")]
        lo: u8,
        #[serde(default = "default_hue_hi")]
        hi: u8,
    },
    Otsu,
}

fn default_hue_lo() -> u8 {
    DEFAULT_HUE_LO
}

fn default_hue_hi() -> u8 {
    DEFAULT_HUE_HI
}

impl Default for Segmentation {
    fn default() -> Self {
        Segmentation::Hue { lo: DEFAULT_HUE_LO, hi: DEFAULT_HUE_HI }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSize {
    /// Plot columns `M`.
    pub rows: usize,
    /// Plot ranges `N`.
    pub ranges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default)]
    pub overlay: bool,
}

/// Run configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    #[serde(default)]
    pub roi: Option<RegionOfInterest>,
    #[serde(default)]
    pub segmentation: Segmentation,
    pub planter: PlanterSpec,
    pub field: FieldSize,
    #[serde(default)]
    pub weights: RowSepConfig,
    #[serde(default)]
    pub range_search: Option<SearchBounds>,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
            _ => Error::io(path, e),
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if let Some(roi) = &self.roi {
            if roi.width == 0 || roi.height == 0 {
                return Err(Error::Config("roi width and height must be positive".into()));
            }
        }
        if let Segmentation::Hue { lo, hi } = self.segmentation {
            if lo > hi || hi > crate::raster::HUE_MAX {
                return Err(Error::InvalidHueBand { lo, hi });
            }
        }
        Ok(())
    }

    pub fn params(&self) -> ExtractParams {
        ExtractParams {
            spec: self.planter,
            m_rows: self.field.rows,
            n_ranges: self.field.ranges,
            weights: self.weights,
            range_bounds: self.range_search,
        }
    }
}

/// Geometry and tuning knobs for extraction from a mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractParams {
    pub spec: PlanterSpec,
    pub m_rows: usize,
    pub n_ranges: usize,
    pub weights: RowSepConfig,
    /// Defaults to [`SearchBounds::default_for`] the mask height.
    pub range_bounds: Option<SearchBounds>,
}

impl ExtractParams {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.m_rows == 0 || self.n_ranges == 0 {
            return Err(Error::Config("field rows and ranges must be positive".into()));
        }
        if !self.m_rows.is_multiple_of(self.spec.c_rows) {
            return Err(Error::RowsNotDivisible { rows: self.m_rows, c_rows: self.spec.c_rows });
        }
        self.weights.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub millis: f64,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    /// Grid after fine-tuning; untuned bounds are kept alongside.
    pub grid: PlotGrid,
    pub ranges: RangeSeparation,
    pub layouts: Vec<CropSetLayout>,
    pub range_energy: EnergyProfile,
    pub global_energy: EnergyProfile,
    pub timings: Vec<StageTiming>,
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.at_stage(stage))?;
    timings.push(StageTiming { stage, millis: start.elapsed().as_secs_f64() * 1e3 });
    Ok(out)
}

/// Modified comb for a planter spec.
pub fn modified_comb(spec: &PlanterSpec) -> Result<CombFunction> {
    Ok(modify_comb(&build_comb(spec)?, &build_triangle(spec.d_gap)?))
}

/// Runs every stage after segmentation on an already binary mask.
pub fn extract_mask(mask: &PlantMask, params: &ExtractParams) -> Result<Extraction> {
    params.validate().map_err(|e| e.at_stage("config"))?;
    let mut timings = Vec::new();
    let spec = params.spec;
    let bounds = params.range_bounds.unwrap_or_else(|| SearchBounds::default_for(mask.height(), params.n_ranges));

    let (h_ra, h_gl, g_norm) = timed(&mut timings, "profiles", || {
        let h_ra = range_energy(mask);
        let h_gl = global_row_energy(mask);
        let g_norm = normalize(&h_gl);
        Ok((h_ra, h_gl, g_norm))
    })?;
    let ranges = timed(&mut timings, "range_sep", || separate_ranges(&h_ra, params.n_ranges, &bounds, spec.d_ran_gap))?;
    let layouts = timed(&mut timings, "row_sep", || {
        let comb = modified_comb(&spec)?;
        let sep = RowSeparator { global: &g_norm, comb: &comb, spec, m_rows: params.m_rows, cfg: params.weights };
        sep.layout_field(mask, &ranges)
    })?;
    let grid = timed(&mut timings, "finetune", || {
        let provenance = Provenance { row_sep: params.weights, range_bounds: bounds };
        let grid = PlotGrid::from_layouts(&layouts, &ranges, spec, params.m_rows, mask.width(), provenance)?;
        finetune_grid(mask, &grid)
    })?;
    Ok(Extraction { grid, ranges, layouts, range_energy: h_ra, global_energy: h_gl, timings })
}

/// Source raster after ROI cropping, and its plant mask.
pub struct Segmented {
    pub mask: PlantMask,
    /// Cropped RGB input, absent in mask mode.
    pub rgb: Option<RgbImage>,
    pub roi: RegionOfInterest,
}

pub fn load_and_segment(cfg: &RunConfig) -> Result<Segmented> {
    let path = &cfg.input.path;
    match cfg.input.kind {
        InputKind::Rgb => {
            let img = load_image(path).map_err(|e| e.at_stage("load"))?;
            let roi = cfg.roi.unwrap_or(RegionOfInterest::full(img.width(), img.height()));
            let img = crop(&img, &roi).map_err(|e| e.at_stage("roi"))?;
            let hue = to_hue(&img);
            let mask = match cfg.segmentation {
                Segmentation::Hue { lo, hi } => segment_hue_threshold(&hue, lo, hi),
                Segmentation::Otsu => Ok(segment_otsu(&hue)),
            }
            .map_err(|e| e.at_stage("segment"))?;
            Ok(Segmented { mask, rgb: Some(img), roi })
        }
        InputKind::Mask => {
            let mask = load_mask(path).map_err(|e| e.at_stage("load"))?;
            let roi = cfg.roi.unwrap_or(RegionOfInterest::full(mask.width(), mask.height()));
            let mask = mask.crop(&roi).map_err(|e| e.at_stage("roi"))?;
            Ok(Segmented { mask, rgb: None, roi })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub roi: RegionOfInterest,
    pub timings: Vec<StageTiming>,
    pub range_lines_equidistant: Vec<usize>,
    pub range_lines_adjusted: Vec<usize>,
    pub range_pitch: f64,
    /// `Δx` per crop set, one list per range.
    pub crop_set_offsets: Vec<Vec<i64>>,
    pub flagged_plots: Vec<(usize, usize)>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub extraction: Extraction,
    pub records: Vec<PlotRecord>,
    pub report: RunReport,
}

/// Files written by [`run`] into the output directory.
pub const PLOTS_JSON: &str = "plots.json";
pub const PLOTS_CSV: &str = "plots.csv";
pub const RANGE_LINES_CSV: &str = "range_lines.csv";
pub const LAYOUTS_CSV: &str = "layouts.csv";
pub const REPORT_JSON: &str = "report.json";
pub const OVERLAY_PNG: &str = "overlay.png";

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let seg = load_and_segment(cfg)?;
    let segment_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut extraction = extract_mask(&seg.mask, &cfg.params())?;
    extraction.timings.insert(0, StageTiming { stage: "segment", millis: segment_ms });
    let records = grid_records(&extraction.grid, (seg.roi.x0, seg.roi.y0));

    let out = &cfg.output.dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e).at_stage("output"))?;
    let write = |name: &str, text: &str| plotio::write_text(out.join(name), text).map_err(|e| e.at_stage("output"));
    write(PLOTS_JSON, &plotio::to_json(&records))?;
    write(PLOTS_CSV, &plotio::to_csv(&records))?;
    write(RANGE_LINES_CSV, &extraction.ranges.to_csv())?;
    let mut layouts_csv = CropSetLayout::csv_header().to_string();
    for l in &extraction.layouts {
        layouts_csv.push_str(&l.to_csv_rows(cfg.planter.c_rows));
    }
    write(LAYOUTS_CSV, &layouts_csv)?;

    if cfg.output.overlay {
        let base = seg.rgb.clone().unwrap_or_else(|| mask_to_rgb(&seg.mask));
        save_rgb_png(out.join(OVERLAY_PNG), &render_overlay(&base, &records, false)).map_err(|e| e.at_stage("output"))?;
    }

    let report = RunReport {
        config: cfg.clone(),
        roi: seg.roi,
        timings: extraction.timings.clone(),
        range_lines_equidistant: extraction.ranges.equidistant.clone(),
        range_lines_adjusted: extraction.ranges.adjusted.clone(),
        range_pitch: extraction.ranges.delta_y,
        crop_set_offsets: extraction.layouts.iter().map(|l| l.offsets.clone()).collect(),
        flagged_plots: extraction.grid.flagged().map(|p| (p.row, p.range)).collect(),
    };
    let mut report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    report_json.push('\n');
    write(REPORT_JSON, &report_json)?;
    Ok(RunOutput { extraction, records, report })
}

/// Writes the energy profiles and comb functions as `index,value` CSVs.
pub fn dump_profiles(cfg: &RunConfig, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let seg = load_and_segment(cfg)?;
    let h_ra = range_energy(&seg.mask);
    let h_gl = global_row_energy(&seg.mask);
    let comb = build_comb(&cfg.planter)?;
    let modified = modify_comb(&comb, &build_triangle(cfg.planter.d_gap)?);
    let files: [(&str, String); 6] = [
        ("range_energy.csv", h_ra.to_csv()),
        ("range_energy_normalized.csv", normalize(&h_ra).to_csv()),
        ("global_row_energy.csv", h_gl.to_csv()),
        ("global_row_energy_normalized.csv", normalized_csv(&normalize(&h_gl))),
        ("comb.csv", comb.to_csv()),
        ("modified_comb.csv", modified.to_csv()),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let p = dir.join(name);
        plotio::write_text(&p, &text)?;
        written.push(p);
    }
    Ok(written)
}

fn normalized_csv(p: &NormalizedProfile) -> String {
    p.to_csv()
}
