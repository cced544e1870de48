//! Per-plot range boundary fine-tuning and the extracted plot grid.
//!
//! Every plot in a range starts with the range's shared top and bottom lines.
//! Each line is then moved, independently per plot, to the minimum of the
//! plot's local range energy after normalization and triangle smoothing.
//! The local energy only counts the plot's own columns, within
//! `[y_top - d_ran_gap, y_bot + d_ran_gap]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::comb::{build_triangle, PlanterSpec, TriangleKernel};
use crate::error::{Error, Result};
use crate::profile::{normalize, Axis, EnergyProfile};
use crate::range_sep::{RangeSeparation, SearchBounds};
use crate::raster::PlantMask;
use crate::row_sep::{CropSetLayout, RowSepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlotBoundary {
    pub row: usize,
    pub range: usize,
    pub x_left: i64,
    pub x_right: i64,
    pub y_top: i64,
    pub y_bot: i64,
    pub y_top_tuned: i64,
    pub y_bot_tuned: i64,
    /// Tuning produced an inverted box and was reverted.
    pub flagged: bool,
}

/// Settings the grid was produced with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub row_sep: RowSepConfig,
    pub range_bounds: SearchBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotGrid {
    pub plots: Vec<PlotBoundary>,
    pub spec: PlanterSpec,
    pub m_rows: usize,
    pub n_ranges: usize,
    pub provenance: Provenance,
}

impl PlotGrid {
    /// Assembles the untuned grid. Row boundaries are clamped to
    /// `[0, width]`, so edge plots never extend past the raster.
    pub fn from_layouts(
        layouts: &[CropSetLayout],
        ranges: &RangeSeparation,
        spec: PlanterSpec,
        m_rows: usize,
        width: usize,
        provenance: Provenance,
    ) -> Result<PlotGrid> {
        let mut plots = Vec::with_capacity(m_rows * layouts.len());
        for layout in layouts {
            let z = layout.range_index;
            let (top, bot) = (ranges.adjusted[z] as i64, ranges.adjusted[z + 1] as i64);
            for row in 0..m_rows {
                let x_left = layout.plot_boundaries[row].clamp(0, width as i64);
                let x_right = layout.plot_boundaries[row + 1].clamp(0, width as i64);
                if x_left >= x_right {
                    return Err(Error::DegeneratePlot { row, range: z });
                }
                plots.push(PlotBoundary {
                    row,
                    range: z,
                    x_left,
                    x_right,
                    y_top: top,
                    y_bot: bot,
                    y_top_tuned: top,
                    y_bot_tuned: bot,
                    flagged: false,
                });
            }
        }
        Ok(PlotGrid { plots, spec, m_rows, n_ranges: layouts.len(), provenance })
    }

    pub fn get(&self, row: usize, range: usize) -> Option<&PlotBoundary> {
        self.plots.iter().find(|p| p.row == row && p.range == range)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &PlotBoundary> {
        self.plots.iter().filter(|p| p.flagged)
    }
}

/// Plant pixels per row over the plot's columns `x_left..=x_right`, for rows
/// `y_top - d_ran_gap ..= y_bot + d_ran_gap`, both clamped to the mask.
pub fn local_range_energy(mask: &PlantMask, plot: &PlotBoundary, d_ran_gap: usize) -> Result<EnergyProfile> {
    if plot.x_left >= plot.x_right {
        return Err(Error::DegeneratePlot { row: plot.row, range: plot.range });
    }
    let w = mask.width() as i64;
    let h = mask.height() as i64;
    let d = d_ran_gap as i64;
    let x0 = plot.x_left.clamp(0, w - 1) as usize;
    let x1 = plot.x_right.clamp(0, w - 1) as usize;
    let y0 = (plot.y_top - d).clamp(0, h - 1) as usize;
    let y1 = (plot.y_bot + d).clamp(0, h - 1) as usize;
    let values = (y0..=y1)
        .map(|y| mask.row(y)[x0..=x1].iter().map(|&b| b as u32).sum())
        .collect();
    Ok(EnergyProfile { axis: Axis::AlongY, values, origin: y0 })
}

/// Moves `y` to the minimum of the normalized, triangle-smoothed profile
/// within `±d_ran_gap`. Smoothing zero-pads outside the profile and only
/// positions inside the profile are candidates. Ties prefer the smallest
/// shift, then the upward one.
pub fn tune_boundary(local: &EnergyProfile, y: i64, d_ran_gap: usize, tri: &TriangleKernel) -> i64 {
    let norm = normalize(local);
    let half = tri.half() as i64;
    let smoothed = |pos: i64| -> f64 {
        tri.samples
            .iter()
            .enumerate()
            .map(|(k, &t)| t * norm.at_or_zero(pos + k as i64 - half))
            .sum()
    };
    let lo = local.origin as i64;
    let hi = lo + local.len() as i64;
    let inside = |p: i64| p >= lo && p < hi;

    let mut best: Option<(i64, f64)> = inside(y).then(|| (0, smoothed(y)));
    for k in 1..=d_ran_gap as i64 {
        for dy in [-k, k] {
            let p = y + dy;
            if !inside(p) {
                continue;
            }
            let v = smoothed(p);
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((dy, v));
            }
        }
    }
    y + best.map_or(0, |(dy, _)| dy)
}

/// Tunes top and bottom of every plot independently. A plot whose tuned box
/// would be empty keeps its untuned bounds and is flagged.
pub fn finetune_grid(mask: &PlantMask, grid: &PlotGrid) -> Result<PlotGrid> {
    let d = grid.spec.d_ran_gap;
    let tri = build_triangle(d.max(1))?;
    let plots = grid
        .plots
        .par_iter()
        .map(|plot| {
            let local = local_range_energy(mask, plot, d)?;
            let top = tune_boundary(&local, plot.y_top, d, &tri);
            let bot = tune_boundary(&local, plot.y_bot, d, &tri);
            let mut tuned = *plot;
            if top < bot {
                tuned.y_top_tuned = top;
                tuned.y_bot_tuned = bot;
            } else {
                tuned.y_top_tuned = plot.y_top;
                tuned.y_bot_tuned = plot.y_bot;
                tuned.flagged = true;
            }
            Ok(tuned)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlotGrid { plots, ..grid.clone() })
}
