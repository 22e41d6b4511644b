//! Simulation config files: `[section]` headers and `key = value` lines.
//!
//! ```text
//! [cohort]
//! participants = 6
//! base_seed = 1000
//! wfs_first = 4
//!
//! [agent]
//! cue_noise_itd = 20e-6
//! ```
//!
//! `#` starts a comment. Unknown sections or keys are errors, as are repeated
//! keys. Angles are given in degrees.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{Rect, P2};
use crate::listener::WfsCueModel;
use crate::session::{CohortConfig, SessionError};
use crate::wavefield::{RenderMode, StaticSubarray, SIDE_COUNT};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Syntax {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A parsed config: the cohort plus where its logs go.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationConfig {
    pub cohort: CohortConfig,
    pub out_dir: Option<PathBuf>,
}

fn value<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("{v:?}: {e}"))
}

fn flag(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{v:?} is not a boolean")),
    }
}

fn degrees(v: &str) -> Result<f64, String> {
    value::<f64>(v).map(f64::to_radians)
}

impl SimulationConfig {
    fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), String> {
        let c = &mut self.cohort;
        let s = &mut c.session;
        let a = &mut s.agent;
        match (section, key) {
            ("cohort", "participants") => c.participants = value(v)?,
            ("cohort", "base_seed") => c.base_seed = value(v)?,
            ("cohort", "wfs_first") => c.wfs_first = value(v)?,
            ("cohort", "tutorial") => s.tutorial = flag(v)?,
            ("cohort", "out") => self.out_dir = Some(PathBuf::from(v)),

            ("array", "side") => {
                let side: f64 = value(v)?;
                s.geometry.area = Rect::square(P2::origin(), side);
            }
            ("array", "speakers_per_side") => s.speakers_per_side = value(v)?,
            ("array", "height") => s.geometry.height = value(v)?,
            ("array", "source_margin") => s.geometry.source_margin = value(v)?,
            ("array", "body_margin") => s.body_margin = value(v)?,

            ("render", "mode") => {
                s.mode = match v {
                    "static" => RenderMode::Static,
                    "user_dependent" => RenderMode::UserDependent,
                    _ => return Err(format!("{v:?}: expected static or user_dependent")),
                }
            }
            ("render", "static_subarray") => {
                s.render.static_subarray = Some(match v {
                    "nearest" => StaticSubarray::NearestToSource,
                    _ => {
                        let side: usize = value(v)?;
                        if side >= SIDE_COUNT {
                            return Err(format!("side {side} does not exist"));
                        }
                        StaticSubarray::Fixed(side)
                    }
                })
            }
            ("render", "cue_model") => {
                s.cue_model = match v {
                    "coherent" => WfsCueModel::Coherent,
                    "earliest_arrival" => WfsCueModel::EarliestArrival,
                    _ => return Err(format!("{v:?}: expected coherent or earliest_arrival")),
                }
            }
            ("render", "speed_of_sound") => s.render.speed_of_sound = value(v)?,
            ("render", "half_aperture_deg") => s.render.half_aperture = degrees(v)?,
            ("render", "reference_frequency") => s.render.reference_frequency = value(v)?,

            ("agent", "walk_speed") => a.walk_speed = value(v)?,
            ("agent", "turn_rate") => a.turn_rate = value(v)?,
            ("agent", "probe_step") => a.probe_step = value(v)?,
            ("agent", "cue_noise_itd") => a.cue_noise_itd = value(v)?,
            ("agent", "cue_noise_level") => a.cue_noise_level = value(v)?,
            ("agent", "commit_threshold") => a.commit_threshold = value(v)?,
            ("agent", "max_search_time") => a.max_search_time = value(v)?,
            ("agent", "hand_dropout") => a.hand_dropout = value(v)?,
            ("agent", "reach") => a.reach = value(v)?,
            ("agent", "lean_back") => a.lean_back = value(v)?,
            ("agent", "reach_duration") => a.reach_duration = value(v)?,
            ("agent", "learning_decay") => a.learning_decay = value(v)?,

            ("misalignment", "sigma_translation") => s.misalignment.sigma_translation = value(v)?,
            ("misalignment", "sigma_rotation_deg") => s.misalignment.sigma_rotation = degrees(v)?,

            ("rolloff", "min_distance") => s.rolloff.min_distance = value(v)?,
            ("rolloff", "max_distance") => s.rolloff.max_distance = value(v)?,

            ("trial", "dt") => s.timing.dt = value(v)?,
            ("trial", "idle") => s.timing.idle = value(v)?,
            ("trial", "guess_timeout") => s.timing.guess_timeout = value(v)?,
            ("trial", "feedback") => s.timing.feedback = value(v)?,

            ("demographics", "age") => c.age = value(v)?,
            ("demographics", "gender") => c.gender = v.to_string(),
            ("demographics", "vr_experience") => c.vr_experience = value(v)?,

            _ => return Err(format!("unknown key {key:?} in section [{section}]")),
        }
        Ok(())
    }

    /// Parses and validates config text. `path` only labels errors.
    pub fn parse(path: &Path, text: &str) -> Result<Self, ConfigError> {
        let label = path.display().to_string();
        let syntax = |line: usize, message: String| ConfigError::Syntax {
            path: label.clone(),
            line,
            message,
        };
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let ln = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(ln, format!("malformed section header {line:?}")))?
                    .trim();
                section = Some(name.to_string());
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| syntax(ln, format!("expected key = value, found {line:?}")))?;
            let (key, v) = (key.trim(), v.trim());
            let sec = section
                .as_deref()
                .ok_or_else(|| syntax(ln, format!("key {key:?} outside any section")))?;
            if !seen.insert((sec.to_string(), key.to_string())) {
                return Err(syntax(ln, format!("repeated key {key:?} in [{sec}]")));
            }
            cfg.set(sec, key, v).map_err(|m| syntax(ln, m))?;
        }
        cfg.validate().map_err(|e| ConfigError::Invalid {
            path: label.clone(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(path, &text)
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        let c = &self.cohort;
        if c.participants == 0 {
            return Err(SessionError::Config("participants must be ≥ 1".into()));
        }
        if c.wfs_first > c.participants {
            return Err(SessionError::Config(
                "wfs_first exceeds participants".into(),
            ));
        }
        let s = &c.session;
        if !(s.misalignment.sigma_translation >= 0.0 && s.misalignment.sigma_rotation >= 0.0) {
            return Err(SessionError::Config(
                "misalignment sigmas must be ≥ 0".into(),
            ));
        }
        if !(s.rolloff.min_distance > 0.0 && s.rolloff.max_distance > s.rolloff.min_distance) {
            return Err(SessionError::Config(
                "rolloff needs 0 < min_distance < max_distance".into(),
            ));
        }
        s.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SimulationConfig, ConfigError> {
        SimulationConfig::parse(Path::new("sim.ini"), text)
    }

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(parse("").unwrap(), SimulationConfig::default());
    }

    #[test]
    fn values_are_applied() {
        let c = parse(
            "[cohort]\nparticipants = 3  # small\nwfs_first = 1\nout = logs\n\
             [agent]\ncue_noise_itd = 0\n[render]\nmode = user_dependent\nstatic_subarray = 2\n\
             [misalignment]\nsigma_rotation_deg = 2\n",
        )
        .unwrap();
        assert_eq!(c.cohort.participants, 3);
        assert_eq!(c.out_dir, Some(PathBuf::from("logs")));
        assert_eq!(c.cohort.session.agent.cue_noise_itd, 0.0);
        assert_eq!(c.cohort.session.mode, RenderMode::UserDependent);
        assert_eq!(
            c.cohort.session.render.static_subarray,
            Some(StaticSubarray::Fixed(2))
        );
        assert!((c.cohort.session.misalignment.sigma_rotation - 2f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn unknown_and_malformed_keys_name_the_line() {
        let e = parse("[cohort]\nparticipants = 2\nparticipnts = 3\n").unwrap_err();
        assert!(e.to_string().starts_with("sim.ini:3:"), "{e}");
        assert!(parse("[cohort]\nparticipants = six\n").is_err());
        assert!(parse("participants = 2\n").is_err());
        assert!(parse("[bogus]\nx = 1\n").is_err());
        assert!(parse("[cohort]\nbase_seed = 1\nbase_seed = 2\n").is_err());
    }

    #[test]
    fn semantic_errors_are_rejected() {
        assert!(matches!(
            parse("[cohort]\nparticipants = 2\nwfs_first = 3\n"),
            Err(ConfigError::Invalid { .. })
        ));
        assert!(parse("[agent]\nwalk_speed = -1\n").is_err());
        assert!(parse("[render]\nstatic_subarray = 4\n").is_err());
    }
}
