//! Experimental design, the trial state machine and whole-session runs.

mod cohort;
mod design;
mod plan_file;
mod scene;
mod trial;

pub use cohort::{
    participant_id, run_cohort, run_session, trial_seed, CohortConfig, ParticipantSummary,
    SessionConfig, SessionOutcome,
};
pub use design::{
    generate_session, random_point, random_trajectory, trajectory_from, Environment, Movement,
    PlanGeometry, SessionPlan, Sound, System, Trajectory, TrialSpec, DYNAMIC_BLOCK_LEN,
    DYNAMIC_REPEATS, STATIC_BLOCK_LEN, STATIC_REPEATS, TRAJECTORY_LENGTH, TRAJECTORY_MAX_DURATION,
    TRAJECTORY_MIN_DURATION, TRIALS_PER_SESSION, TUTORIAL_TRIALS,
};
pub use plan_file::{load_plan, read_plan, save_plan, write_plan, PLAN_HEADER};
pub use scene::{Scene, StereoScene, WfsScene};
pub use trial::{
    run_trial, HandPose, TrackingSample, TrialPhase, TrialRecord, TrialResult, TrialTiming,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("placement failed: {0}")]
    Placement(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Wavefield(#[from] crate::wavefield::WavefieldError),
    #[error(transparent)]
    Log(#[from] crate::logging::LogError),
    #[error("participant {participant}: {source}")]
    Participant {
        participant: String,
        #[source]
        source: Box<SessionError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
