use std::path::Path;

use super::codec::{OscArg, OscMessage};
use super::OscError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionCommand {
    pub source_id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryCommand {
    pub source_id: u32,
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub duration: f64,
}

/// Address templates; `{id}` is replaced by the source id.
///
/// Loaded from a `key = value` file with keys `position` and `trajectory`;
/// `#` starts a comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressSchema {
    pub position: String,
    pub trajectory: String,
}

impl Default for AddressSchema {
    fn default() -> Self {
        Self {
            position: "/source/{id}/position".into(),
            trajectory: "/source/{id}/trajectory".into(),
        }
    }
}

impl AddressSchema {
    pub fn parse(text: &str) -> Result<Self, OscError> {
        let mut schema = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| OscError::Schema(format!("line {}: expected key = value", n + 1)))?;
            let value = value.trim().to_string();
            if !value.starts_with('/') || !value.is_ascii() {
                return Err(OscError::Schema(format!(
                    "line {}: address must be ASCII and start with '/'",
                    n + 1
                )));
            }
            match key.trim() {
                "position" => schema.position = value,
                "trajectory" => schema.trajectory = value,
                other => {
                    return Err(OscError::Schema(format!(
                        "line {}: unknown key {other:?}",
                        n + 1
                    )))
                }
            }
        }
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self, OscError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn address(template: &str, id: u32) -> String {
        template.replace("{id}", &id.to_string())
    }

    pub fn position_message(&self, cmd: &PositionCommand) -> Result<OscMessage, OscError> {
        if !(cmd.x.is_finite() && cmd.y.is_finite()) {
            return Err(OscError::Precondition("coordinates must be finite".into()));
        }
        Ok(OscMessage::new(
            Self::address(&self.position, cmd.source_id),
            vec![OscArg::Float(cmd.x as f32), OscArg::Float(cmd.y as f32)],
        ))
    }

    pub fn trajectory_message(&self, cmd: &TrajectoryCommand) -> Result<OscMessage, OscError> {
        if !(cmd.duration > 0.0 && cmd.duration.is_finite()) {
            return Err(OscError::Precondition(format!(
                "trajectory duration must be positive, got {}",
                cmd.duration
            )));
        }
        let coords = [cmd.start.0, cmd.start.1, cmd.end.0, cmd.end.1];
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(OscError::Precondition("coordinates must be finite".into()));
        }
        let mut args: Vec<OscArg> = coords.iter().map(|&c| OscArg::Float(c as f32)).collect();
        args.push(OscArg::Float(cmd.duration as f32));
        Ok(OscMessage::new(
            Self::address(&self.trajectory, cmd.source_id),
            args,
        ))
    }
}
