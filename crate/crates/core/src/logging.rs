//! Log files of one session directory.
//!
//! * `session.csv`: one row per trial ([`SESSION_HEADER`])
//! * `pos_round_<N>.csv`: 50 Hz tracking of trial `N` ([`TRACKING_HEADER`])
//! * `dems.csv`: demographics ([`DEMS_HEADER`])
//! * `tutorial.csv`, `pos_tutorial_<N>.csv`: warm-up trials, same schemas,
//!   ignored by [`read_session`]
//!
//! Reals are written in shortest round-trip form, lines end in `\n`.
//! Lost hands are written as position `0,0,0` with quaternion `1,0,0,0`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Quaternion;
use thiserror::Error;

use crate::geometry::{P2, P3};
use crate::session::{
    Environment, HandPose, Movement, SessionPlan, Sound, System, TrackingSample, TrialRecord,
    TrialSpec,
};

pub const SESSION_FILE: &str = "session.csv";
pub const TUTORIAL_FILE: &str = "tutorial.csv";
pub const DEMS_FILE: &str = "dems.csv";

pub const SESSION_HEADER: &str = "trial,block,system,environment,sound,movement,source_x,source_y,source_z,end_x,end_y,traj_duration,rendered_x,rendered_y,guess_x,guess_y,guess_z,onset_time,guess_time,score";
pub const TRACKING_HEADER: &str = "t,hmd_x,hmd_y,hmd_z,hmd_qw,hmd_qx,hmd_qy,hmd_qz,lh_x,lh_y,lh_z,lh_qw,lh_qx,lh_qy,lh_qz,rh_x,rh_y,rh_z,rh_qw,rh_qx,rh_qy,rh_qz";
pub const DEMS_HEADER: &str = "participant,age,gender,vr_experience";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}: missing")]
    Missing(PathBuf),
    #[error("{0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LogError + '_ {
    move |source| LogError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VrExperience {
    None,
    Casual,
    Regular,
    Enthusiast,
}

impl VrExperience {
    pub fn as_str(&self) -> &'static str {
        match self {
            VrExperience::None => "none",
            VrExperience::Casual => "casual",
            VrExperience::Regular => "regular",
            VrExperience::Enthusiast => "enthusiast",
        }
    }
}

impl FromStr for VrExperience {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "none" => Ok(VrExperience::None),
            "casual" => Ok(VrExperience::Casual),
            "regular" => Ok(VrExperience::Regular),
            "enthusiast" => Ok(VrExperience::Enthusiast),
            other => Err(format!("unknown vr_experience {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demographics {
    pub participant: String,
    pub age: u32,
    pub gender: String,
    pub vr_experience: VrExperience,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLogRow {
    pub trial: usize,
    pub block: usize,
    pub system: System,
    pub environment: Environment,
    pub sound: Sound,
    pub movement: Movement,
    pub source: P3,
    /// Trajectory end and duration, dynamic trials only.
    pub trajectory: Option<(P2, f64)>,
    pub rendered: P2,
    pub guess: P3,
    /// Session time of sound onset.
    pub onset_time: f64,
    /// Seconds after onset.
    pub guess_time: f64,
    pub score: f64,
}

impl SessionLogRow {
    pub fn from_trial(spec: &TrialSpec, rec: &TrialRecord) -> Self {
        Self {
            trial: spec.index,
            block: spec.block,
            system: spec.system,
            environment: spec.environment,
            sound: spec.sound,
            movement: spec.movement,
            source: P3::new(spec.source_start.x, spec.source_start.y, spec.source_height),
            trajectory: spec.trajectory.map(|t| (t.end, t.duration)),
            rendered: rec.rendered_target,
            guess: rec.result.guess,
            onset_time: rec.onset_time,
            guess_time: rec.result.guess_time,
            score: rec.result.score,
        }
    }

    /// Static: source; dynamic: trajectory end.
    pub fn target(&self) -> P2 {
        self.trajectory
            .map_or(P2::new(self.source.x, self.source.y), |(end, _)| end)
    }

    pub fn guess_xy(&self) -> P2 {
        P2::new(self.guess.x, self.guess.y)
    }

    pub fn recomputed_score(&self) -> f64 {
        (self.guess_xy() - self.target()).norm()
    }
}

pub fn format_session_rows(rows: &[SessionLogRow]) -> String {
    let mut out = String::new();
    out.push_str(SESSION_HEADER);
    out.push('\n');
    for r in rows {
        let (ex, ey, ed) = match r.trajectory {
            Some((end, d)) => (end.x.to_string(), end.y.to_string(), d.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{ex},{ey},{ed},{},{},{},{},{},{},{},{}",
            r.trial,
            r.block,
            r.system,
            r.environment,
            r.sound,
            r.movement,
            r.source.x,
            r.source.y,
            r.source.z,
            r.rendered.x,
            r.rendered.y,
            r.guess.x,
            r.guess.y,
            r.guess.z,
            r.onset_time,
            r.guess_time,
            r.score
        );
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), LogError> {
    fs::write(path, text).map_err(io_err(path))
}

fn rows_for(specs: &[TrialSpec], records: &[TrialRecord]) -> Result<Vec<SessionLogRow>, LogError> {
    if specs.len() != records.len() {
        return Err(LogError::Invalid(format!(
            "{} trials but {} results",
            specs.len(),
            records.len()
        )));
    }
    Ok(specs
        .iter()
        .zip(records)
        .map(|(s, r)| SessionLogRow::from_trial(s, r))
        .collect())
}

/// Writes `session.csv`; returns its path.
pub fn write_session_log(
    plan: &SessionPlan,
    records: &[TrialRecord],
    dir: &Path,
) -> Result<PathBuf, LogError> {
    let rows = rows_for(&plan.trials, records)?;
    let path = dir.join(SESSION_FILE);
    write_file(&path, &format_session_rows(&rows))?;
    Ok(path)
}

pub fn write_tutorial_log(
    plan: &SessionPlan,
    records: &[TrialRecord],
    dir: &Path,
) -> Result<(), LogError> {
    let rows = rows_for(&plan.tutorial, records)?;
    write_file(&dir.join(TUTORIAL_FILE), &format_session_rows(&rows))?;
    for (spec, rec) in plan.tutorial.iter().zip(records) {
        let path = dir.join(format!("pos_tutorial_{}.csv", spec.index));
        write_file(&path, &format_tracking(&rec.samples))?;
    }
    Ok(())
}

fn push_pose(out: &mut String, p: &P3, q: &Quaternion<f64>) {
    let _ = write!(
        out,
        ",{},{},{},{},{},{},{}",
        p.x, p.y, p.z, q.w, q.i, q.j, q.k
    );
}

pub fn format_tracking(samples: &[TrackingSample]) -> String {
    let mut out = String::with_capacity(samples.len() * 160);
    out.push_str(TRACKING_HEADER);
    out.push('\n');
    for s in samples {
        let _ = write!(out, "{}", s.t);
        push_pose(&mut out, &s.hmd_pos, &s.hmd_rot);
        for h in [&s.left_hand, &s.right_hand] {
            let h = if h.valid { *h } else { HandPose::SENTINEL };
            push_pose(&mut out, &h.pos, &h.rot);
        }
        out.push('\n');
    }
    out
}

pub fn tracking_path(dir: &Path, trial_nr: usize) -> PathBuf {
    dir.join(format!("pos_round_{trial_nr}.csv"))
}

/// Writes `pos_round_<trial_nr>.csv`.
pub fn write_tracking(
    trial_nr: usize,
    samples: &[TrackingSample],
    dir: &Path,
) -> Result<PathBuf, LogError> {
    if samples.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(LogError::Invalid(
            "tracking samples must be time-ordered".into(),
        ));
    }
    let path = tracking_path(dir, trial_nr);
    write_file(&path, &format_tracking(samples))?;
    Ok(path)
}

pub fn write_demographics(rows: &[Demographics], dir: &Path) -> Result<PathBuf, LogError> {
    let mut out = String::from(DEMS_HEADER);
    out.push('\n');
    for d in rows {
        if d.gender.contains([',', '\n', '\r']) {
            return Err(LogError::Invalid(format!(
                "gender {:?} contains a separator",
                d.gender
            )));
        }
        let _ = writeln!(
            out,
            "{},{},{},{}",
            d.participant,
            d.age,
            d.gender,
            d.vr_experience.as_str()
        );
    }
    let path = dir.join(DEMS_FILE);
    write_file(&path, &out)?;
    Ok(path)
}

/// Writes every file of a finished session into `dir` (created if needed).
pub fn write_session_dir(
    plan: &SessionPlan,
    records: &[TrialRecord],
    tutorial: &[TrialRecord],
    demographics: &Demographics,
    dir: &Path,
) -> Result<(), LogError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_session_log(plan, records, dir)?;
    for (spec, rec) in plan.trials.iter().zip(records) {
        write_tracking(spec.index, &rec.samples, dir)?;
    }
    if !plan.tutorial.is_empty() {
        write_tutorial_log(plan, tutorial, dir)?;
    }
    write_demographics(std::slice::from_ref(demographics), dir)?;
    Ok(())
}

// ---------------------------------------------------------------- reading

struct Cursor<'a> {
    path: &'a Path,
    line: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> LogError {
        LogError::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, tok: &str, column: &str) -> Result<T, LogError> {
        tok.parse()
            .map_err(|_| self.err(format!("column {column}: cannot parse {tok:?}")))
    }
}

/// Splits a file into header-checked data rows of `width` fields.
fn data_rows<'a>(
    path: &'a Path,
    text: &'a str,
    header: &str,
) -> Result<Vec<(Cursor<'a>, Vec<&'a str>)>, LogError> {
    let columns: Vec<&str> = header.split(',').collect();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == header => {}
        _ => {
            return Err(LogError::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "unexpected header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, raw) in lines {
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let cur = Cursor { path, line: i + 1 };
        let toks: Vec<&str> = raw.split(',').collect();
        if toks.len() != columns.len() {
            return Err(cur.err(format!(
                "expected {} fields, found {}",
                columns.len(),
                toks.len()
            )));
        }
        out.push((cur, toks));
    }
    Ok(out)
}

fn read_text(path: &Path) -> Result<String, LogError> {
    if !path.exists() {
        return Err(LogError::Missing(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn parse_session_rows(path: &Path, text: &str) -> Result<Vec<SessionLogRow>, LogError> {
    let mut rows = Vec::new();
    for (c, t) in data_rows(path, text, SESSION_HEADER)? {
        let f = |i: usize, name: &str| c.parse::<f64>(t[i], name);
        let trajectory = if t[9].is_empty() && t[10].is_empty() && t[11].is_empty() {
            None
        } else {
            Some((
                P2::new(f(9, "end_x")?, f(10, "end_y")?),
                f(11, "traj_duration")?,
            ))
        };
        rows.push(SessionLogRow {
            trial: c.parse(t[0], "trial")?,
            block: c.parse(t[1], "block")?,
            system: c.parse(t[2], "system")?,
            environment: c.parse(t[3], "environment")?,
            sound: c.parse(t[4], "sound")?,
            movement: c.parse(t[5], "movement")?,
            source: P3::new(f(6, "source_x")?, f(7, "source_y")?, f(8, "source_z")?),
            trajectory,
            rendered: P2::new(f(12, "rendered_x")?, f(13, "rendered_y")?),
            guess: P3::new(f(14, "guess_x")?, f(15, "guess_y")?, f(16, "guess_z")?),
            onset_time: f(17, "onset_time")?,
            guess_time: f(18, "guess_time")?,
            score: f(19, "score")?,
        });
    }
    Ok(rows)
}

pub fn parse_tracking(path: &Path, text: &str) -> Result<Vec<TrackingSample>, LogError> {
    let names: Vec<&str> = TRACKING_HEADER.split(',').collect();
    let mut out = Vec::new();
    for (c, t) in data_rows(path, text, TRACKING_HEADER)? {
        let mut v = [0.0; 22];
        for (i, tok) in t.iter().enumerate() {
            v[i] = c.parse(tok, names[i])?;
        }
        let pose = |o: usize| {
            (
                P3::new(v[o], v[o + 1], v[o + 2]),
                Quaternion::new(v[o + 3], v[o + 4], v[o + 5], v[o + 6]),
            )
        };
        let hand = |o: usize| {
            let (p, q) = pose(o);
            if HandPose::is_sentinel_pose(&p, &q) {
                HandPose::SENTINEL
            } else {
                HandPose::tracked(p, q)
            }
        };
        let (hmd_pos, hmd_rot) = pose(1);
        out.push(TrackingSample {
            t: v[0],
            hmd_pos,
            hmd_rot,
            left_hand: hand(8),
            right_hand: hand(15),
        });
    }
    Ok(out)
}

pub fn parse_demographics(path: &Path, text: &str) -> Result<Vec<Demographics>, LogError> {
    let mut out = Vec::new();
    for (c, t) in data_rows(path, text, DEMS_HEADER)? {
        out.push(Demographics {
            participant: t[0].to_string(),
            age: c.parse(t[1], "age")?,
            gender: t[2].to_string(),
            vr_experience: t[3].parse().map_err(|e: String| c.err(e))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tracker {
    Hmd,
    RightHand,
    LeftHand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTrial {
    pub row: SessionLogRow,
    pub tracking: Vec<TrackingSample>,
}

impl LoadedTrial {
    /// `(t, position)` pairs for a tracker; lost hand samples are dropped.
    pub fn positions(&self, tracker: Tracker) -> Vec<(f64, P3)> {
        self.tracking
            .iter()
            .filter_map(|s| match tracker {
                Tracker::Hmd => Some((s.t, s.hmd_pos)),
                Tracker::RightHand => s.right_hand.valid.then_some((s.t, s.right_hand.pos)),
                Tracker::LeftHand => s.left_hand.valid.then_some((s.t, s.left_hand.pos)),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSession {
    pub dir: PathBuf,
    pub participant: String,
    pub demographics: Option<Demographics>,
    pub trials: Vec<LoadedTrial>,
}

impl LoadedSession {
    /// System used in the first trial.
    pub fn first_system(&self) -> Option<System> {
        self.trials.first().map(|t| t.row.system)
    }
}

/// Loads `session.csv`, every `pos_round_N.csv` it references and `dems.csv`
/// when present.
pub fn read_session(dir: &Path) -> Result<LoadedSession, LogError> {
    let session_path = dir.join(SESSION_FILE);
    let rows = parse_session_rows(&session_path, &read_text(&session_path)?)?;
    let mut trials = Vec::with_capacity(rows.len());
    for row in rows {
        let path = tracking_path(dir, row.trial);
        let tracking = parse_tracking(&path, &read_text(&path)?)?;
        trials.push(LoadedTrial { row, tracking });
    }
    let dems_path = dir.join(DEMS_FILE);
    let demographics = if dems_path.exists() {
        parse_demographics(&dems_path, &read_text(&dems_path)?)?
            .into_iter()
            .next()
    } else {
        None
    };
    let participant = demographics
        .as_ref()
        .map(|d| d.participant.clone())
        .or_else(|| {
            dir.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.split('_').next().unwrap_or(n).to_string())
        })
        .unwrap_or_default();
    Ok(LoadedSession {
        dir: dir.to_path_buf(),
        participant,
        demographics,
        trials,
    })
}

/// Every session directory (one containing `session.csv`) directly under `root`,
/// sorted by name.
pub fn read_cohort(root: &Path) -> Result<Vec<LoadedSession>, LogError> {
    if !root.is_dir() {
        return Err(LogError::Missing(root.to_path_buf()));
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(io_err(root))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(SESSION_FILE).is_file())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| read_session(d)).collect()
}
