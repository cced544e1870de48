use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("unsupported or corrupt image format in {}: {detail}", .path.display())]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("truncated image data in {}", .0.display())]
    Truncated(PathBuf),

    #[error("failed to decode {}: {detail}", .path.display())]
    Decode { path: PathBuf, detail: String },

    #[error("mask must be single-channel, {} has {channels} channels", .path.display())]
    MultiChannelMask { path: PathBuf, channels: u8 },

    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("region {x0},{y0} {width}x{height} exceeds image bounds {image_width}x{image_height}")]
    RoiOutOfBounds {
        x0: usize,
        y0: usize,
        width: usize,
        height: usize,
        image_width: usize,
        image_height: usize,
    },

    #[error("invalid hue band [{lo}, {hi}]: need 0 <= lo <= hi <= 179")]
    InvalidHueBand { lo: u8, hi: u8 },

    #[error("row band [{y_lo}, {y_hi}] is invalid for mask height {height}")]
    BandOutOfRange { y_lo: usize, y_hi: usize, height: usize },

    #[error("range line search has no feasible candidate: {0}")]
    EmptyFeasibleSet(String),

    #[error("range separation lines are not strictly increasing at range {range}")]
    NonMonotonicRanges { range: usize },

    #[error("invalid planter spec: {0}")]
    InvalidSpec(String),

    #[error("field has {rows} rows, not divisible by {c_rows} rows per crop set")]
    RowsNotDivisible { rows: usize, c_rows: usize },

    #[error("offset search window around x_off={x_off} lies fully outside the profile")]
    WindowOutsideProfile { x_off: i64 },

    #[error("plot boundaries are not strictly increasing in range {range}")]
    NonMonotonicBoundaries { range: usize },

    #[error("range {range}: {source}")]
    InRange {
        range: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("plot (row {row}, range {range}) has zero width")]
    DegeneratePlot { row: usize, range: usize },

    #[error("rectangle has zero area: {0:?}")]
    ZeroArea([i64; 4]),

    #[error("plots missing from extracted grid: {}", format_keys(.0))]
    MissingPlots(Vec<(usize, usize)>),

    #[error("synthetic field geometry does not fit the raster: {0}")]
    GeometryOverflow(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed plot file {}: {detail}", .path.display())]
    PlotFormat { path: PathBuf, detail: String },
}

fn format_keys(keys: &[(usize, usize)]) -> String {
    keys.iter()
        .map(|(row, range)| format!("(row {row}, range {range})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad user input (config, geometry, file shape)
    /// rather than a failure while processing a valid input.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Stage { source, .. } | Error::InRange { source, .. } => source.is_validation(),
            Error::RoiOutOfBounds { .. }
            | Error::InvalidHueBand { .. }
            | Error::InvalidSpec(_)
            | Error::RowsNotDivisible { .. }
            | Error::GeometryOverflow(_)
            | Error::Config(_)
            | Error::FileNotFound(_)
            | Error::MultiChannelMask { .. }
            | Error::UnsupportedFormat { .. }
            | Error::Truncated(_)
            | Error::Decode { .. }
            | Error::EmptyImage { .. }
            | Error::NonMonotonicRanges { .. }
            | Error::NonMonotonicBoundaries { .. }
            | Error::PlotFormat { .. }
            | Error::MissingPlots(_) => true,
            _ => false,
        }
    }

    /// The innermost error, past any stage or range context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } | Error::InRange { source, .. } => source.root(),
            e => e,
        }
    }
}
