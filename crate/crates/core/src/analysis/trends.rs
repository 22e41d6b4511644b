use super::AnalysisError;
use crate::geometry::{horizontal, P2};
use crate::logging::{LoadedSession, LoadedTrial, Tracker};
use crate::session::{Movement, System};

/// Slopes below this (m per trial) count as improvement.
pub const LEARNING_THRESHOLD: f64 = -0.1;

/// Ordinary least squares slope of `scores` against their 0-based index.
pub fn learning_slope(scores: &[f64]) -> Result<f64, AnalysisError> {
    let n = scores.len();
    if n < 2 {
        return Err(AnalysisError::InsufficientData(format!(
            "a slope needs at least 2 trials, got {n}"
        )));
    }
    let xm = (n - 1) as f64 / 2.0;
    let ym = scores.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in scores.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

pub fn is_improving(slope: f64) -> bool {
    slope < LEARNING_THRESHOLD
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow {
    pub participant: String,
    pub system: System,
    pub slope: f64,
    pub improving: bool,
    /// Scores in trial order.
    pub scores: Vec<f64>,
}

/// One learning slope per participant and system over that system's trials.
/// Pairs with fewer than two trials are skipped.
pub fn participant_slopes(sessions: &[LoadedSession]) -> Vec<SlopeRow> {
    let mut out = Vec::new();
    for s in sessions {
        for &system in System::ALL {
            let scores: Vec<f64> = s
                .trials
                .iter()
                .filter(|t| t.row.system == system)
                .map(|t| t.row.score)
                .collect();
            if let Ok(slope) = learning_slope(&scores) {
                out.push(SlopeRow {
                    participant: s.participant.clone(),
                    system,
                    slope,
                    improving: is_improving(slope),
                    scores,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveBin {
    /// Bin centre on the normalized time axis `[0, 1]`.
    pub t_norm: f64,
    /// Mean over trials of the per-trial bin mean; `None` if no trial
    /// had a sample in the bin.
    pub mean_distance: Option<f64>,
    pub n_trials: usize,
}

/// Per-trial bin means of horizontal tracker-to-target distance.
fn trial_curve(trial: &LoadedTrial, tracker: Tracker, bins: usize) -> Option<Vec<Option<f64>>> {
    let row = &trial.row;
    if !(row.guess_time > 0.0) {
        return None;
    }
    let target = row.target();
    let samples: Vec<(f64, f64)> = trial
        .positions(tracker)
        .into_iter()
        .map(|(t, p)| {
            (
                (t - row.onset_time) / row.guess_time,
                (horizontal(&p) - target).norm(),
            )
        })
        .filter(|(tau, _)| (0.0..=1.0).contains(tau))
        .collect();
    if samples.len() < 2 {
        return None;
    }
    let mut sums = vec![(0.0, 0usize); bins];
    for (tau, d) in samples {
        let b = ((tau * bins as f64) as usize).min(bins - 1);
        sums[b].0 += d;
        sums[b].1 += 1;
    }
    Some(
        sums.into_iter()
            .map(|(s, n)| (n > 0).then(|| s / n as f64))
            .collect(),
    )
}

/// Distance to the target over normalized trial time, pooled over the
/// selected trials. Trials need at least two samples between onset and guess.
pub fn normalized_time_curves<'a, I>(
    trials: I,
    tracker: Tracker,
    bins: usize,
) -> Result<Vec<CurveBin>, AnalysisError>
where
    I: IntoIterator<Item = &'a LoadedTrial>,
{
    if bins == 0 {
        return Err(AnalysisError::InvalidArgument("bins must be ≥ 1".into()));
    }
    let mut acc = vec![(0.0, 0usize); bins];
    let mut any = false;
    for trial in trials {
        if let Some(curve) = trial_curve(trial, tracker, bins) {
            any = true;
            for (a, v) in acc.iter_mut().zip(curve) {
                if let Some(v) = v {
                    a.0 += v;
                    a.1 += 1;
                }
            }
        }
    }
    if !any {
        return Err(AnalysisError::InsufficientData(
            "no trial has two samples in its search window".into(),
        ));
    }
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(i, (s, n))| CurveBin {
            t_norm: (i as f64 + 0.5) / bins as f64,
            mean_distance: (n > 0).then(|| s / n as f64),
            n_trials: n,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub participant: String,
    pub trial: usize,
    pub system: System,
    /// Seconds since onset.
    pub t: f64,
    pub position: P2,
    pub target: P2,
    pub guess: P2,
}

/// Head paths from onset to guess for the first static trial of `system` in
/// every session.
pub fn search_paths(sessions: &[LoadedSession], system: System) -> Vec<PathPoint> {
    let mut out = Vec::new();
    for s in sessions {
        let Some(trial) = s
            .trials
            .iter()
            .find(|t| t.row.system == system && t.row.movement == Movement::Static)
        else {
            continue;
        };
        let row = &trial.row;
        let end = row.onset_time + row.guess_time;
        for (t, p) in trial.positions(Tracker::Hmd) {
            if t < row.onset_time || t > end {
                continue;
            }
            out.push(PathPoint {
                participant: s.participant.clone(),
                trial: row.trial,
                system,
                t: t - row.onset_time,
                position: horizontal(&p),
                target: row.target(),
                guess: row.guess_xy(),
            });
        }
    }
    out
}
