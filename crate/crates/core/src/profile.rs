//! Energy profiles: plant-pixel counts projected onto one image axis.
//!
//! Gaps between plots show up as local minima of these profiles. Counts are
//! integers, so strip-parallel summation is bit-identical to a serial pass.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::PlantMask;

/// Rows per parallel strip when projecting onto x.
const STRIP_ROWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    /// Indexed by x (column sums).
    AlongX,
    /// Indexed by y (row sums).
    AlongY,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyProfile {
    pub axis: Axis,
    pub values: Vec<u32>,
    /// Mask coordinate of `values[0]`.
    pub origin: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedProfile {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub origin: usize,
}

impl EnergyProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at mask coordinate `pos`, or `None` outside the profile.
    pub fn at(&self, pos: i64) -> Option<u32> {
        let idx = pos - self.origin as i64;
        (idx >= 0).then(|| self.values.get(idx as usize).copied()).flatten()
    }

    pub fn total(&self) -> u64 {
        self.values.iter().map(|&v| v as u64).sum()
    }

    /// `index,value` lines with a header, coordinates in mask space.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.origin + i, v));
        }
        out
    }
}

impl NormalizedProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at mask coordinate `pos`; zero outside the profile.
    pub fn at_or_zero(&self, pos: i64) -> f64 {
        let idx = pos - self.origin as i64;
        if idx < 0 {
            return 0.0;
        }
        self.values.get(idx as usize).copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.origin + i, v));
        }
        out
    }
}

/// Plant pixels per mask row.
pub fn range_energy(mask: &PlantMask) -> EnergyProfile {
    let values = (0..mask.height())
        .into_par_iter()
        .map(|y| mask.row(y).iter().map(|&b| b as u32).sum())
        .collect();
    EnergyProfile { axis: Axis::AlongY, values, origin: 0 }
}

/// Plant pixels per mask column over all rows.
pub fn global_row_energy(mask: &PlantMask) -> EnergyProfile {
    column_sums(mask, 0, mask.height() - 1)
}

/// Plant pixels per column restricted to rows `y_lo..=y_hi`.
pub fn local_row_energy(mask: &PlantMask, y_lo: usize, y_hi: usize) -> Result<EnergyProfile> {
    if y_lo > y_hi || y_hi >= mask.height() {
        return Err(Error::BandOutOfRange { y_lo, y_hi, height: mask.height() });
    }
    Ok(column_sums(mask, y_lo, y_hi))
}

fn column_sums(mask: &PlantMask, y_lo: usize, y_hi: usize) -> EnergyProfile {
    let width = mask.width();
    let rows: Vec<usize> = (y_lo..=y_hi).collect();
    let values = rows
        .par_chunks(STRIP_ROWS)
        .map(|strip| {
            let mut acc = vec![0u32; width];
            for &y in strip {
                for (a, &b) in acc.iter_mut().zip(mask.row(y)) {
                    *a += b as u32;
                }
            }
            acc
        })
        .reduce(
            || vec![0u32; width],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    EnergyProfile { axis: Axis::AlongX, values, origin: 0 }
}

/// Clips the profile at its mean `K`: values `>= K` become 1, the rest
/// `value / K`. The mean covers the full profile extent. An all-zero profile
/// normalizes to all zeros.
pub fn normalize(p: &EnergyProfile) -> NormalizedProfile {
    let n = p.values.len() as u64;
    let sum = p.total();
    let values = if sum == 0 {
        vec![0.0; p.values.len()]
    } else {
        // v >= sum/n  <=>  v*n >= sum, and v/K = v*n/sum, both done on integers.
        p.values
            .iter()
            .map(|&v| {
                let scaled = v as u64 * n;
                if scaled >= sum {
                    1.0
                } else {
                    scaled as f64 / sum as f64
                }
            })
            .collect()
    };
    NormalizedProfile { axis: p.axis, values, origin: p.origin }
}
