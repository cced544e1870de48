//! Comb matched filter over one crop set.
//!
//! A crop set is the `C` rows a planter sows in one pass. Its comb has `C+1`
//! unit spikes at the gap centers (multiples of the plot pitch, starting at the
//! crop-set left edge). The modified comb widens every spike with a unit-height
//! triangle of the plot-gap width so the spikes can only settle inside gaps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planting geometry in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanterSpec {
    /// Rows sown per planter pass (`C`).
    pub c_rows: usize,
    /// Crop-set width.
    pub d_crop: usize,
    /// Plot pitch inside a crop set.
    pub d_row: usize,
    /// Gap width between plots of one crop set.
    pub d_gap: usize,
    /// Maximum correction applied to range boundaries.
    pub d_ran_gap: usize,
}

impl PlanterSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.c_rows < 1 {
            return bad("c_rows must be at least 1".into());
        }
        if self.d_crop == 0 || self.d_row == 0 || self.d_gap == 0 {
            return bad(format!(
                "d_crop, d_row and d_gap must be positive (got {}, {}, {})",
                self.d_crop, self.d_row, self.d_gap
            ));
        }
        if self.d_gap >= self.d_row {
            return bad(format!("d_gap ({}) must be smaller than d_row ({})", self.d_gap, self.d_row));
        }
        if self.c_rows * self.d_row > self.d_crop {
            return bad(format!(
                "last comb spike at {} lies past the crop set width {}",
                self.c_rows * self.d_row,
                self.d_crop
            ));
        }
        if self.d_crop.abs_diff(self.c_rows * self.d_row) > self.d_gap {
            log::warn!(
                "crop set width {} differs from {} rows x pitch {} by more than the gap width {}",
                self.d_crop,
                self.c_rows,
                self.d_row,
                self.d_gap
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombFunction {
    pub samples: Vec<f64>,
    pub spike_positions: Vec<usize>,
}

impl CombFunction {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("offset,value\n");
        for (i, v) in self.samples.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }
}

/// Odd-length triangle with peak 1 at the center.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleKernel {
    pub samples: Vec<f64>,
}

impl TriangleKernel {
    pub fn width(&self) -> usize {
        self.samples.len()
    }

    /// Samples on each side of the center.
    pub fn half(&self) -> usize {
        self.samples.len() / 2
    }
}

pub fn build_comb(spec: &PlanterSpec) -> Result<CombFunction> {
    spec.validate()?;
    let last = spec.d_crop - 1;
    let spike_positions: Vec<usize> = (0..=spec.c_rows).map(|k| (k * spec.d_row).min(last)).collect();
    let mut samples = vec![0.0; spec.d_crop];
    for &p in &spike_positions {
        samples[p] = 1.0;
    }
    Ok(CombFunction { samples, spike_positions })
}

/// Linear ramp from the edges to a peak of 1. Even widths round up to the
/// next odd sample count; the outermost samples stay above zero.
pub fn build_triangle(width: usize) -> Result<TriangleKernel> {
    if width < 1 {
        return Err(Error::InvalidSpec("triangle width must be at least 1".into()));
    }
    let n = width | 1;
    let half = n / 2;
    let samples = (0..n)
        .map(|i| 1.0 - i.abs_diff(half) as f64 / (half + 1) as f64)
        .collect();
    Ok(TriangleKernel { samples })
}

/// Center-aligned convolution of the comb with the triangle, trimmed to the
/// crop-set width and clipped at 1 where widened spikes overlap.
pub fn modify_comb(comb: &CombFunction, tri: &TriangleKernel) -> CombFunction {
    let len = comb.samples.len() as i64;
    let half = tri.half() as i64;
    let mut out = vec![0.0; comb.samples.len()];
    for (j, &c) in comb.samples.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (k, &t) in tri.samples.iter().enumerate() {
            let i = j as i64 + k as i64 - half;
            if (0..len).contains(&i) {
                out[i as usize] += c * t;
            }
        }
    }
    for v in &mut out {
        *v = v.min(1.0);
    }
    CombFunction { samples: out, spike_positions: comb.spike_positions.clone() }
}
