//! Vertical plot boundaries within each range.
//!
//! Each range is modeled as `M/C` crop sets laid side by side. Crop sets are
//! located left to right: the offset `Δx_i` of set `i` minimizes a quadratic
//! drift penalty plus the overlap of the modified comb with the local and
//! global normalized row energies. Plot boundaries inside a crop set then
//! follow at fixed pitch.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comb::{CombFunction, PlanterSpec};
use crate::error::{Error, Result};
use crate::profile::{local_row_energy, normalize, NormalizedProfile};
use crate::range_sep::RangeSeparation;
use crate::raster::PlantMask;

/// Weights of the offset objective: drift penalty, local overlap, global overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RowSepConfig {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
}

impl Default for RowSepConfig {
    fn default() -> Self {
        Self { w0: 1.0, w1: 1.0, w2: 1.0 }
    }
}

impl RowSepConfig {
    pub fn validate(&self) -> Result<()> {
        let ws = [self.w0, self.w1, self.w2];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!("weights must be finite and nonnegative, got {ws:?}")));
        }
        if ws.iter().all(|&w| w == 0.0) {
            return Err(Error::Config("at least one weight must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CropSetLayout {
    pub range_index: usize,
    /// `Δx_i` per crop set.
    pub offsets: Vec<i64>,
    /// Accumulated crop-set start before the offset is applied.
    pub x_off: Vec<i64>,
    /// `M/C + 1` crop-set boundary lines.
    pub set_boundaries: Vec<i64>,
    /// `M + 1` plot boundary lines.
    pub plot_boundaries: Vec<i64>,
}

impl CropSetLayout {
    pub fn csv_header() -> &'static str {
        "range,crop_set,delta_x,x_off,set_left,set_right,plot_boundaries\n"
    }

    /// One CSV line per crop set; the set's plot boundaries are `;`-joined.
    pub fn to_csv_rows(&self, c_rows: usize) -> String {
        let mut out = String::new();
        for (i, (dx, xo)) in self.offsets.iter().zip(&self.x_off).enumerate() {
            let plots: Vec<String> = self.plot_boundaries[i * c_rows..=(i + 1) * c_rows]
                .iter()
                .map(|b| b.to_string())
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.range_index,
                i,
                dx,
                xo,
                self.set_boundaries[i],
                self.set_boundaries[i + 1],
                plots.join(";")
            ));
        }
        out
    }
}

/// Overlap of the comb placed at `start` with a profile; samples outside the
/// profile count as zero.
fn comb_dot(taps: &[(i64, f64)], profile: &NormalizedProfile, start: i64) -> f64 {
    taps.iter().map(|&(t, w)| w * profile.at_or_zero(start + t)).sum()
}

/// Integer offset in `[-d_gap, d_gap]` minimizing
/// `w0·Δx²/d_row² + w1·(2/d_gap)·⟨f̂, ĥ_local⟩ + w2·(2/d_gap)·⟨f̂, ĥ_global⟩`
/// with the comb's first sample at `x_off + Δx`. Ties prefer the smallest
/// `|Δx|`, then the negative offset.
pub fn optimize_offset(
    local: &NormalizedProfile,
    global: &NormalizedProfile,
    comb: &CombFunction,
    spec: &PlanterSpec,
    cfg: &RowSepConfig,
    x_off: i64,
) -> Result<i64> {
    let d_gap = spec.d_gap as i64;
    let lo = local.origin as i64;
    let hi = lo + local.len() as i64;
    if x_off - d_gap >= hi || x_off + d_gap + comb.len() as i64 <= lo {
        return Err(Error::WindowOutsideProfile { x_off });
    }
    // Zero taps contribute exactly +0.0 to the sums, so skipping them is exact.
    let taps: Vec<(i64, f64)> = comb
        .samples
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(t, &v)| (t as i64, v))
        .collect();
    let scale = 2.0 / spec.d_gap as f64;
    let pitch_sq = (spec.d_row * spec.d_row) as f64;
    let objective = |dx: i64| -> f64 {
        let start = x_off + dx;
        cfg.w0 * (dx * dx) as f64 / pitch_sq
            + cfg.w1 * scale * comb_dot(&taps, local, start)
            + cfg.w2 * scale * comb_dot(&taps, global, start)
    };
    let mut best = 0;
    let mut best_val = objective(0);
    for k in 1..=d_gap {
        for dx in [-k, k] {
            let v = objective(dx);
            if v < best_val {
                best = dx;
                best_val = v;
            }
        }
    }
    Ok(best)
}

/// Crop-set boundary lines from offsets and accumulated starts.
/// Interior lines sit midway between the previous set's end and the current
/// set's start.
pub fn set_boundaries(offsets: &[i64], x_off: &[i64], d_crop: usize) -> Vec<i64> {
    let sets = offsets.len();
    let mut s = Vec::with_capacity(sets + 1);
    for j in 0..sets {
        if j == 0 {
            s.push(x_off[0] + offsets[0]);
        } else {
            s.push(x_off[j] + offsets[j].div_euclid(2));
        }
    }
    if sets > 0 {
        s.push(x_off[sets - 1] + offsets[sets - 1] + d_crop as i64);
    }
    s
}

/// Plot boundary lines: every `C`-th line is a crop-set boundary, the lines
/// between follow at `d_row` pitch from it.
pub fn plot_boundaries(set_bounds: &[i64], c_rows: usize, d_row: usize, m_rows: usize) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::with_capacity(m_rows + 1);
    for m in 0..=m_rows {
        let k = m % c_rows;
        if k == 0 {
            out.push(set_bounds[m / c_rows]);
        } else {
            out.push(out[m - k] + (k * d_row) as i64);
        }
    }
    out
}

/// Everything needed to lay out crop sets, shared by all ranges.
#[derive(Debug, Clone)]
pub struct RowSeparator<'a> {
    pub global: &'a NormalizedProfile,
    /// Modified comb.
    pub comb: &'a CombFunction,
    pub spec: PlanterSpec,
    pub m_rows: usize,
    pub cfg: RowSepConfig,
}

impl RowSeparator<'_> {
    fn check(&self) -> Result<()> {
        if self.m_rows == 0 || !self.m_rows.is_multiple_of(self.spec.c_rows) {
            return Err(Error::RowsNotDivisible { rows: self.m_rows, c_rows: self.spec.c_rows });
        }
        self.cfg.validate()
    }

    /// Lays out range `z` whose rows span `band` (inclusive).
    pub fn layout_range(&self, mask: &PlantMask, band: (usize, usize), z: usize) -> Result<CropSetLayout> {
        self.check()?;
        let local = normalize(&local_row_energy(mask, band.0, band.1)?);
        let sets = self.m_rows / self.spec.c_rows;
        let mut offsets = Vec::with_capacity(sets);
        let mut x_off = Vec::with_capacity(sets);
        let mut cursor = 0i64;
        for _ in 0..sets {
            let dx = optimize_offset(&local, self.global, self.comb, &self.spec, &self.cfg, cursor)?;
            offsets.push(dx);
            x_off.push(cursor);
            cursor += dx + self.spec.d_crop as i64;
        }
        let set_bounds = set_boundaries(&offsets, &x_off, self.spec.d_crop);
        let plot_bounds = plot_boundaries(&set_bounds, self.spec.c_rows, self.spec.d_row, self.m_rows);
        let increasing = |v: &[i64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&set_bounds) || !increasing(&plot_bounds) {
            return Err(Error::NonMonotonicBoundaries { range: z });
        }
        Ok(CropSetLayout { range_index: z, offsets, x_off, set_boundaries: set_bounds, plot_boundaries: plot_bounds })
    }

    /// One layout per range; ranges run in parallel, the first failing range
    /// (by index) is reported.
    pub fn layout_field(&self, mask: &PlantMask, ranges: &RangeSeparation) -> Result<Vec<CropSetLayout>> {
        self.check()?;
        let results: Vec<Result<CropSetLayout>> = (0..ranges.n_ranges())
            .into_par_iter()
            .map(|z| {
                self.layout_range(mask, ranges.band(z), z).map_err(|e| match e {
                    e @ Error::NonMonotonicBoundaries { .. } => e,
                    other => Error::InRange { range: z, source: Box::new(other) },
                })
            })
            .collect();
        results.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{build_comb, build_triangle, modify_comb};
    use crate::profile::Axis;

    fn norm(values: Vec<f64>) -> NormalizedProfile {
        NormalizedProfile { axis: Axis::AlongX, values, origin: 0 }
    }

    fn spec() -> PlanterSpec {
        PlanterSpec { c_rows: 2, d_crop: 20, d_row: 10, d_gap: 4, d_ran_gap: 10 }
    }

    fn modified(spec: &PlanterSpec) -> CombFunction {
        modify_comb(&build_comb(spec).unwrap(), &build_triangle(spec.d_gap).unwrap())
    }

    /// Zero within `±2` of any listed center, one elsewhere.
    fn gaps_at(len: usize, centers: &[i64]) -> Vec<f64> {
        (0..len as i64).map(|x| if centers.iter().any(|c| (x - c).abs() <= 2) { 0.0 } else { 1.0 }).collect()
    }

    #[test]
    fn offset_lands_on_gaps() {
        let s = spec();
        let comb = modified(&s);
        let spikes: Vec<i64> = comb.spike_positions.iter().map(|&p| p as i64 + 3).collect();
        let p = norm(gaps_at(60, &spikes));
        let cfg = RowSepConfig::default();
        assert_eq!(optimize_offset(&p, &p, &comb, &s, &cfg, 0).unwrap(), 3);
    }

    #[test]
    fn offset_seven_with_wide_gap_window() {
        let s = PlanterSpec { d_gap: 8, d_row: 12, d_crop: 24, ..spec() };
        let comb = modify_comb(&build_comb(&s).unwrap(), &build_triangle(s.d_gap).unwrap());
        let spikes: Vec<i64> = comb.spike_positions.iter().map(|&p| p as i64 + 27).collect();
        let values: Vec<f64> =
            (0..100i64).map(|x| if spikes.iter().any(|c| (x - c).abs() <= 4) { 0.0 } else { 1.0 }).collect();
        let p = norm(values);
        let cfg = RowSepConfig::default();
        // -5 aligns the two right spikes too, but puts the left one on plants.
        assert_eq!(optimize_offset(&p, &p, &comb, &s, &cfg, 20).unwrap(), 7);
    }

    #[test]
    fn flat_profile_returns_zero() {
        let s = spec();
        let p = norm(vec![1.0; 50]);
        let got = optimize_offset(&p, &p, &modified(&s), &s, &RowSepConfig::default(), 10).unwrap();
        assert_eq!(got, 0);
    }

    #[test]
    fn symmetric_minima_prefer_negative() {
        let s = spec();
        let comb = modified(&s);
        let mut centers = Vec::new();
        for shift in [-3i64, 3] {
            centers.extend(comb.spike_positions.iter().map(|&p| 10 + p as i64 + shift));
        }
        let p = norm(gaps_at(60, &centers));
        let cfg = RowSepConfig { w0: 0.0, w1: 1.0, w2: 1.0 };
        assert_eq!(optimize_offset(&p, &p, &comb, &s, &cfg, 10).unwrap(), -3);
    }

    #[test]
    fn penalty_only_returns_zero() {
        let s = spec();
        let p = norm((0..50).map(|x| (x % 7) as f64 / 7.0).collect());
        let cfg = RowSepConfig { w0: 1.0, w1: 0.0, w2: 0.0 };
        assert_eq!(optimize_offset(&p, &p, &modified(&s), &s, &cfg, 5).unwrap(), 0);
    }

    #[test]
    fn window_outside_profile_errors() {
        let s = spec();
        let p = norm(vec![1.0; 10]);
        let err = optimize_offset(&p, &p, &modified(&s), &s, &RowSepConfig::default(), 100).unwrap_err();
        assert!(matches!(err, Error::WindowOutsideProfile { x_off: 100 }));
    }

    #[test]
    fn boundary_arithmetic() {
        assert_eq!(plot_boundaries(&[0, 20], 2, 10, 2), vec![0, 10, 20]);
        // Two sets with offsets (5, -3) and width 20.
        let offsets = [5, -3];
        let x_off = [0, 25];
        let s = set_boundaries(&offsets, &x_off, 20);
        // set 0 ends at 25, set 1 starts at 22 -> midpoint 23 (floor of 23.5).
        assert_eq!(s, vec![5, 23, 42]);
        assert_eq!(plot_boundaries(&s, 2, 10, 4), vec![5, 15, 23, 33, 42]);
    }

    #[test]
    fn weights_validation() {
        assert!(RowSepConfig { w0: 0.0, w1: 0.0, w2: 0.0 }.validate().is_err());
        assert!(RowSepConfig { w0: -1.0, w1: 1.0, w2: 0.0 }.validate().is_err());
        assert!(RowSepConfig::default().validate().is_ok());
    }

    #[test]
    fn rows_must_divide() {
        let s = spec();
        let comb = modified(&s);
        let g = norm(vec![1.0; 40]);
        let sep = RowSeparator { global: &g, comb: &comb, spec: s, m_rows: 3, cfg: RowSepConfig::default() };
        let mask = PlantMask::zeros(40, 10).unwrap();
        assert!(matches!(sep.layout_range(&mask, (0, 9), 0), Err(Error::RowsNotDivisible { rows: 3, c_rows: 2 })));
    }
}
