//! Statistics and spatial aggregates over loaded sessions.
//!
//! Everything here is a pure function of [`LoadedSession`]s.

mod export;
mod grids;
mod scoring;
mod trends;

pub use export::{
    export_analysis, read_grid, write_grid, BundleEntry, ExportOptions, KnnAttribution, Manifest,
    MANIFEST_FILE,
};
pub use grids::{density_heatmap, knn_score_map, GridKind, ScoreGrid, KNN_EPSILON};
pub use scoring::{fraction_below, mean_scores, trial_rows, ConditionFilter, Dimension, GroupRow};
pub use trends::{
    is_improving, learning_slope, normalized_time_curves, participant_slopes, search_paths,
    CurveBin, PathPoint, SlopeRow, LEARNING_THRESHOLD,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no trials match the selection")]
    EmptySelection,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Log(#[from] crate::logging::LogError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
