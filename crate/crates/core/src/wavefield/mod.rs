//! Monochromatic wave field synthesis for a square loudspeaker array.
//!
//! Every operation here is a pure function of its inputs.

mod array;
mod driving;
mod export;
mod field;
mod zone;

pub use array::{build_square_array, SideId, Speaker, SpeakerArray, SIDE_COUNT};
pub use driving::{
    classify_source, driving_functions, edge_taper, DrivingEntry, DrivingSet, RenderConfig,
    RenderMode, SourceKind, StaticSubarray, VirtualSource,
};
pub use export::{error_map, write_error_map_csv, write_speaker_listing_csv, ErrorCell, ErrorMap};
pub use field::{
    grid_points, ideal_field, reconstruction_error, synthesize_field, FieldSample,
    SINGULARITY_RADIUS,
};
pub use zone::{best_aligned_side, select_subarray, valid_zone, ValidZone};

use thiserror::Error;

use crate::geometry::P3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WavefieldError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("evaluation point {point:?} is {distance:.4} m from speaker {speaker}")]
    Singularity {
        point: P3,
        speaker: usize,
        distance: f64,
    },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("no sub-array has a valid zone containing the listener")]
    NoValidZone,
}
