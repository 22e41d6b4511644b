use std::collections::BTreeMap;

use super::AnalysisError;
use crate::logging::{LoadedSession, SessionLogRow};
use crate::session::{Environment, Movement, Sound, System};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Participant,
    System,
    Environment,
    Sound,
    Movement,
}

impl Dimension {
    pub fn name(&self) -> &'static str {
        match self {
            Dimension::Participant => "participant",
            Dimension::System => "system",
            Dimension::Environment => "environment",
            Dimension::Sound => "sound",
            Dimension::Movement => "movement",
        }
    }

    fn value(&self, participant: &str, row: &SessionLogRow) -> String {
        match self {
            Dimension::Participant => participant.to_string(),
            Dimension::System => row.system.to_string(),
            Dimension::Environment => row.environment.to_string(),
            Dimension::Sound => row.sound.to_string(),
            Dimension::Movement => row.movement.to_string(),
        }
    }
}

/// Conjunction of optional condition predicates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConditionFilter {
    pub system: Option<System>,
    pub environment: Option<Environment>,
    pub sound: Option<Sound>,
    pub movement: Option<Movement>,
}

impl ConditionFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn system(system: System) -> Self {
        Self {
            system: Some(system),
            ..Self::default()
        }
    }

    pub fn matches(&self, row: &SessionLogRow) -> bool {
        self.system.is_none_or(|s| s == row.system)
            && self.environment.is_none_or(|e| e == row.environment)
            && self.sound.is_none_or(|s| s == row.sound)
            && self.movement.is_none_or(|m| m == row.movement)
    }
}

/// `(participant, row)` for every trial passing `filter`, in session order.
pub fn trial_rows<'a>(
    sessions: &'a [LoadedSession],
    filter: &ConditionFilter,
) -> Vec<(&'a str, &'a SessionLogRow)> {
    sessions
        .iter()
        .flat_map(|s| {
            s.trials
                .iter()
                .map(move |t| (s.participant.as_str(), &t.row))
        })
        .filter(|(_, r)| filter.matches(r))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupRow {
    /// One value per grouping dimension, in `group_by` order.
    pub key: Vec<String>,
    pub mean_score: f64,
    pub mean_guess_time: f64,
    pub n: usize,
}

/// Mean score and guess time per group; groups sorted by key.
pub fn mean_scores(
    sessions: &[LoadedSession],
    group_by: &[Dimension],
    filter: &ConditionFilter,
) -> Vec<GroupRow> {
    let mut acc: BTreeMap<Vec<String>, (f64, f64, usize)> = BTreeMap::new();
    for (participant, row) in trial_rows(sessions, filter) {
        let key = group_by.iter().map(|d| d.value(participant, row)).collect();
        let e = acc.entry(key).or_insert((0.0, 0.0, 0));
        e.0 += row.score;
        e.1 += row.guess_time;
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(key, (s, t, n))| GroupRow {
            key,
            mean_score: s / n as f64,
            mean_guess_time: t / n as f64,
            n,
        })
        .collect()
}

/// Share of selected trials with `score < threshold`.
pub fn fraction_below(
    sessions: &[LoadedSession],
    threshold: f64,
    filter: &ConditionFilter,
) -> Result<f64, AnalysisError> {
    if !(threshold > 0.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let rows = trial_rows(sessions, filter);
    if rows.is_empty() {
        return Err(AnalysisError::EmptySelection);
    }
    let below = rows.iter().filter(|(_, r)| r.score < threshold).count();
    Ok(below as f64 / rows.len() as f64)
}
