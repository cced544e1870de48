//! Plot extraction from grid-planted field orthomosaics.
//!
//! A plant mask is projected onto both image axes. Range separation lines are
//! fit to the minima of the row-wise projection; within each range, crop sets
//! are located by sliding a triangle-widened comb over the column-wise
//! projection; finally each plot's top and bottom edges are refined on its own
//! local projection.
//!
//! ```no_run
//! use plotgrid::{pipeline, synthgen};
//!
//! let field = synthgen::generate(&synthgen::SynthConfig::example_field(7))?;
//! let cfg = synthgen::SynthConfig::example_field(7);
//! let params = pipeline::ExtractParams {
//!     spec: cfg.spec,
//!     m_rows: cfg.m_rows,
//!     n_ranges: cfg.n_ranges,
//!     weights: Default::default(),
//!     range_bounds: None,
//! };
//! let out = pipeline::extract_mask(&field.mask, &params)?;
//! println!("{:.3}", plotgrid::metrics::mean_iou(&out.grid, &field.truth)?);
//! # Ok::<(), plotgrid::Error>(())
//! ```

pub mod comb;
pub mod error;
pub mod finetune;
pub mod metrics;
pub mod overlay;
pub mod pipeline;
pub mod plotio;
pub mod profile;
pub mod range_sep;
pub mod raster;
pub mod row_sep;
pub mod synthgen;

pub use comb::{build_comb, build_triangle, modify_comb, CombFunction, PlanterSpec, TriangleKernel};
pub use error::{Error, Result};
pub use finetune::{PlotBoundary, PlotGrid};
pub use metrics::{iou, mean_iou, GroundTruthGrid, Rect};
pub use pipeline::{extract_mask, run, ExtractParams, RunConfig};
pub use plotio::PlotRecord;
pub use profile::{EnergyProfile, NormalizedProfile};
pub use range_sep::{RangeSeparation, SearchBounds};
pub use raster::{PlantMask, RegionOfInterest, RgbImage};
pub use row_sep::{CropSetLayout, RowSepConfig};
pub use synthgen::{SynthConfig, SynthField};
