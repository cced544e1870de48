//! Intersection-over-union scoring of extracted plots against ground truth.
//!
//! Rectangles are half-open pixel intervals: width is `x_right - x_left`.
//! Plots are paired by `(row, range)` index, never by spatial matching.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finetune::PlotGrid;
use crate::plotio::{grid_records, PlotRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x_left: i64,
    pub x_right: i64,
    pub y_top: i64,
    pub y_bot: i64,
}

impl Rect {
    pub fn new(x_left: i64, y_top: i64, x_right: i64, y_bot: i64) -> Self {
        Self { x_left, x_right, y_top, y_bot }
    }

    pub fn area(&self) -> i64 {
        (self.x_right - self.x_left).max(0) * (self.y_bot - self.y_top).max(0)
    }

    fn check(&self) -> Result<()> {
        if self.area() == 0 {
            Err(Error::ZeroArea([self.x_left, self.x_right, self.y_top, self.y_bot]))
        } else {
            Ok(())
        }
    }
}

impl From<&PlotRecord> for Rect {
    fn from(r: &PlotRecord) -> Self {
        Rect { x_left: r.x_left, x_right: r.x_right, y_top: r.y_top, y_bot: r.y_bot }
    }
}

pub fn iou(a: &Rect, b: &Rect) -> Result<f64> {
    a.check()?;
    b.check()?;
    let w = (a.x_right.min(b.x_right) - a.x_left.max(b.x_left)).max(0);
    let h = (a.y_bot.min(b.y_bot) - a.y_top.max(b.y_top)).max(0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    Ok(inter as f64 / union as f64)
}

/// Ground-truth plots keyed by `(row, range)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthGrid {
    pub plots: Vec<PlotRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlotScore {
    pub row: usize,
    pub range: usize,
    pub iou: f64,
}

/// IoU per ground-truth plot, in ground-truth order.
pub fn score_records(extracted: &[PlotRecord], truth: &[PlotRecord]) -> Result<Vec<PlotScore>> {
    let by_key: HashMap<(usize, usize), &PlotRecord> = extracted.iter().map(|r| (r.key(), r)).collect();
    let missing: Vec<(usize, usize)> = truth.iter().map(|t| t.key()).filter(|k| !by_key.contains_key(k)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingPlots(missing));
    }
    truth
        .iter()
        .map(|t| {
            let e = by_key[&t.key()];
            Ok(PlotScore { row: t.row, range: t.range, iou: iou(&e.into(), &t.into())? })
        })
        .collect()
}

fn mean(scores: &[PlotScore]) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().map(|s| s.iou).sum::<f64>() / scores.len() as f64
}

/// Mean IoU of the tuned grid over all ground-truth plots.
pub fn mean_iou(grid: &PlotGrid, gt: &GroundTruthGrid) -> Result<f64> {
    Ok(mean(&score_records(&grid_records(grid, (0, 0)), &gt.plots)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub plots: usize,
    pub mean_iou: f64,
    /// Counts of IoU in `[0, 0.1), [0.1, 0.2), …, [0.9, 1.0]`.
    pub deciles: [usize; 10],
    pub below_half: usize,
    pub scores: Vec<PlotScore>,
}

pub fn evaluate(extracted: &[PlotRecord], truth: &[PlotRecord]) -> Result<EvaluationReport> {
    let scores = score_records(extracted, truth)?;
    let mut deciles = [0usize; 10];
    for s in &scores {
        deciles[((s.iou * 10.0) as usize).min(9)] += 1;
    }
    Ok(EvaluationReport {
        plots: scores.len(),
        mean_iou: mean(&scores),
        deciles,
        below_half: scores.iter().filter(|s| s.iou < 0.5).count(),
        scores,
    })
}
