//! Plot interchange format shared by extraction output, ground truth and
//! evaluation.
//!
//! JSON: a top-level array of objects
//!
//! | field     | type    | meaning                                        |
//! |-----------|---------|------------------------------------------------|
//! | `row`     | integer | plot column index `m`, `0..M`                  |
//! | `range`   | integer | plot range index `z`, `0..N`                   |
//! | `x_left`  | integer | left edge, inclusive, ROI pixels               |
//! | `x_right` | integer | right edge, exclusive, ROI pixels              |
//! | `y_top`   | integer | top edge, inclusive, ROI pixels                |
//! | `y_bot`   | integer | bottom edge, exclusive, ROI pixels             |
//! | `source`  | object  | optional; the same four edges in source pixels |
//! | `flagged` | bool    | optional; fine-tuning was reverted             |
//!
//! CSV carries the same columns flattened as
//! `row,range,x_left,x_right,y_top,y_bot,src_x_left,src_x_right,src_y_top,src_y_bot,flagged`;
//! the `src_*` and `flagged` columns may be omitted or left empty.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finetune::PlotGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRect {
    pub x_left: i64,
    pub x_right: i64,
    pub y_top: i64,
    pub y_bot: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotRecord {
    pub row: usize,
    pub range: usize,
    pub x_left: i64,
    pub x_right: i64,
    pub y_top: i64,
    pub y_bot: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceRect>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub flagged: bool,
}

impl PlotRecord {
    pub fn key(&self) -> (usize, usize) {
        (self.row, self.range)
    }

    pub fn rect(&self) -> [i64; 4] {
        [self.x_left, self.x_right, self.y_top, self.y_bot]
    }
}

/// Records from the tuned grid, ordered by range then row. `offset` is the
/// ROI origin in the source raster.
pub fn grid_records(grid: &PlotGrid, offset: (usize, usize)) -> Vec<PlotRecord> {
    let (ox, oy) = (offset.0 as i64, offset.1 as i64);
    let mut records: Vec<PlotRecord> = grid
        .plots
        .iter()
        .map(|p| PlotRecord {
            row: p.row,
            range: p.range,
            x_left: p.x_left,
            x_right: p.x_right,
            y_top: p.y_top_tuned,
            y_bot: p.y_bot_tuned,
            source: Some(SourceRect {
                x_left: p.x_left + ox,
                x_right: p.x_right + ox,
                y_top: p.y_top_tuned + oy,
                y_bot: p.y_bot_tuned + oy,
            }),
            flagged: p.flagged,
        })
        .collect();
    records.sort_by_key(|r| (r.range, r.row));
    records
}

pub fn to_json(records: &[PlotRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("plot records serialize");
    s.push('\n');
    s
}

pub fn to_csv(records: &[PlotRecord]) -> String {
    let mut out = String::from("row,range,x_left,x_right,y_top,y_bot,src_x_left,src_x_right,src_y_top,src_y_bot,flagged\n");
    for r in records {
        let src = r
            .source
            .map(|s| format!("{},{},{},{}", s.x_left, s.x_right, s.y_top, s.y_bot))
            .unwrap_or_else(|| ",,,".into());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.row, r.range, r.x_left, r.x_right, r.y_top, r.y_bot, src, r.flagged
        ));
    }
    out
}

#[derive(Deserialize)]
struct CsvRow {
    row: usize,
    range: usize,
    x_left: i64,
    x_right: i64,
    y_top: i64,
    y_bot: i64,
    #[serde(default)]
    src_x_left: Option<i64>,
    #[serde(default)]
    src_x_right: Option<i64>,
    #[serde(default)]
    src_y_top: Option<i64>,
    #[serde(default)]
    src_y_bot: Option<i64>,
    #[serde(default)]
    flagged: Option<bool>,
}

pub fn parse_csv(text: &str) -> std::result::Result<Vec<PlotRecord>, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let r = row.map_err(|e| e.to_string())?;
            let source = match (r.src_x_left, r.src_x_right, r.src_y_top, r.src_y_bot) {
                (Some(x_left), Some(x_right), Some(y_top), Some(y_bot)) => {
                    Some(SourceRect { x_left, x_right, y_top, y_bot })
                }
                _ => None,
            };
            Ok(PlotRecord {
                row: r.row,
                range: r.range,
                x_left: r.x_left,
                x_right: r.x_right,
                y_top: r.y_top,
                y_bot: r.y_bot,
                source,
                flagged: r.flagged.unwrap_or(false),
            })
        })
        .collect()
}

/// Reads a plot file; `.csv` is parsed as CSV, anything else as JSON.
/// Duplicate `(row, range)` keys are rejected.
pub fn read_plots(path: impl AsRef<Path>) -> Result<Vec<PlotRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let records = if is_csv {
        parse_csv(&text)
    } else {
        serde_json::from_str::<Vec<PlotRecord>>(&text).map_err(|e| e.to_string())
    }
    .map_err(|detail| Error::PlotFormat { path: path.to_path_buf(), detail })?;

    let mut seen = HashSet::new();
    for r in &records {
        if !seen.insert(r.key()) {
            return Err(Error::PlotFormat {
                path: path.to_path_buf(),
                detail: format!("duplicate plot (row {}, range {})", r.row, r.range),
            });
        }
    }
    Ok(records)
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
