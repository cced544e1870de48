//! Horizontal range separation lines.
//!
//! The N+1 lines are first fit as an equidistant family `y0 + n·Δy` by
//! exhaustive search over `(y0, Δy)`, then each line is moved independently
//! to the lowest point of the range energy within `±d_ran_gap`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::EnergyProfile;

/// Search box for the equidistant fit. `Δy` is scanned in half-pixel steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBounds {
    pub y0_min: usize,
    pub y0_max: usize,
    pub dy_min: f64,
    pub dy_max: f64,
}

impl SearchBounds {
    /// `y0 ∈ [0, H/(N+1)]`, `Δy ∈ [0.5·H/(N+1), 1.5·H/N]`.
    pub fn default_for(height: usize, n_ranges: usize) -> Self {
        let h = height as f64;
        let n = n_ranges.max(1) as f64;
        Self {
            y0_min: 0,
            y0_max: height / (n_ranges + 1),
            dy_min: 0.5 * h / (n + 1.0),
            dy_max: 1.5 * h / n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquidistantFit {
    pub y0: usize,
    pub delta_y: f64,
    pub objective: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeSeparation {
    pub y0: usize,
    pub delta_y: f64,
    pub equidistant: Vec<usize>,
    pub adjusted: Vec<usize>,
}

impl RangeSeparation {
    pub fn n_ranges(&self) -> usize {
        self.adjusted.len() - 1
    }

    /// Inclusive row band `[ŷ_z, ŷ_{z+1}]` of range `z`.
    pub fn band(&self, z: usize) -> (usize, usize) {
        (self.adjusted[z], self.adjusted[z + 1])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,y_equidistant,y_adjusted\n");
        for (i, (e, a)) in self.equidistant.iter().zip(&self.adjusted).enumerate() {
            out.push_str(&format!("{i},{e},{a}\n"));
        }
        out
    }
}

/// Nearest pixel to `y0 + n·(dy_half/2)`, halves rounding up.
#[inline]
fn line_at(y0: usize, n: usize, dy_half: usize) -> usize {
    (2 * y0 + n * dy_half).div_ceil(2)
}

/// Equidistant line family minimizing the summed range energy at the lines.
/// Ties go to the smallest `y0`, then the smallest `Δy`.
pub fn fit_equidistant(h_ra: &EnergyProfile, n_ranges: usize, bounds: &SearchBounds) -> Result<EquidistantFit> {
    if n_ranges == 0 {
        return Err(Error::EmptyFeasibleSet("need at least one range".into()));
    }
    if !(bounds.dy_min.is_finite() && bounds.dy_max.is_finite()) {
        return Err(Error::EmptyFeasibleSet("non-finite Δy bounds".into()));
    }
    // Δy below one pixel would make rounded lines coincide.
    let dh_lo = (bounds.dy_min * 2.0).ceil().max(2.0) as usize;
    let dh_hi = (bounds.dy_max * 2.0).floor().max(0.0) as usize;
    let origin = h_ra.origin;
    let end = origin + h_ra.len();
    let y0_lo = bounds.y0_min.max(origin);
    if dh_lo > dh_hi || y0_lo > bounds.y0_max {
        return Err(Error::EmptyFeasibleSet(format!("empty search box {bounds:?}")));
    }

    let best = (y0_lo..=bounds.y0_max)
        .into_par_iter()
        .filter_map(|y0| {
            let mut best: Option<(u64, usize)> = None;
            for dh in dh_lo..=dh_hi {
                if line_at(y0, n_ranges, dh) >= end {
                    break;
                }
                let obj: u64 = (0..=n_ranges)
                    .map(|n| h_ra.values[line_at(y0, n, dh) - origin] as u64)
                    .sum();
                if best.is_none_or(|(b, _)| obj < b) {
                    best = Some((obj, dh));
                }
            }
            best.map(|(obj, dh)| (obj, y0, dh))
        })
        .min_by_key(|&key| key);

    match best {
        Some((objective, y0, dh)) => Ok(EquidistantFit { y0, delta_y: dh as f64 / 2.0, objective }),
        None => Err(Error::EmptyFeasibleSet(format!(
            "no line family of {n_ranges} ranges fits in profile [{origin}, {end}) within {bounds:?}"
        ))),
    }
}

/// Lines of an equidistant fit, rounded to pixels.
pub fn equidistant_lines(fit: &EquidistantFit, n_ranges: usize) -> Vec<usize> {
    let dh = (fit.delta_y * 2.0).round() as usize;
    (0..=n_ranges).map(|n| line_at(fit.y0, n, dh)).collect()
}

/// Moves each line to the minimum of `h_ra` within `±d_ran_gap`. Ties prefer
/// the smallest shift, then the upward (negative) one. Lines and candidates
/// are clamped to the profile extent.
pub fn adjust_lines(h_ra: &EnergyProfile, equidistant: &[usize], d_ran_gap: usize) -> Vec<usize> {
    if h_ra.is_empty() {
        return equidistant.to_vec();
    }
    let lo = h_ra.origin as i64;
    let hi = (h_ra.origin + h_ra.len() - 1) as i64;
    equidistant
        .iter()
        .map(|&line| {
            let line = (line as i64).clamp(lo, hi);
            let mut best = line;
            let mut best_val = h_ra.at(line).unwrap_or(u32::MAX);
            for k in 1..=d_ran_gap as i64 {
                for cand in [line - k, line + k] {
                    if let Some(v) = h_ra.at(cand) {
                        if v < best_val {
                            best = cand;
                            best_val = v;
                        }
                    }
                }
            }
            best as usize
        })
        .collect()
}

/// Full range separation: equidistant fit, per-line adjustment, and a strict
/// monotonicity check on the adjusted lines.
pub fn separate_ranges(
    h_ra: &EnergyProfile,
    n_ranges: usize,
    bounds: &SearchBounds,
    d_ran_gap: usize,
) -> Result<RangeSeparation> {
    let fit = fit_equidistant(h_ra, n_ranges, bounds)?;
    let equidistant = equidistant_lines(&fit, n_ranges);
    let adjusted = adjust_lines(h_ra, &equidistant, d_ran_gap);
    if let Some(z) = adjusted.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotonicRanges { range: z });
    }
    Ok(RangeSeparation { y0: fit.y0, delta_y: fit.delta_y, equidistant, adjusted })
}
