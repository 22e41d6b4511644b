//! Plain-text session definitions.
//!
//! ```text
//! # participant=P01
//! # seed=1000
//! # first_system=wfs
//! # height=1.6
//! index,block,sound,environment,system,movement,x,y,end_x,end_y,duration
//! 1,1,piano,blank,wfs,static,0.12,-0.4,,,
//! ```
//!
//! Block 0 rows are tutorial trials.

use std::io::{BufRead, Write};
use std::path::Path;

use super::design::{Movement, SessionPlan, System, Trajectory, TrialSpec};
use super::SessionError;
use crate::geometry::P2;

pub const PLAN_HEADER: &str =
    "index,block,sound,environment,system,movement,x,y,end_x,end_y,duration";

pub fn write_plan<W: Write>(plan: &SessionPlan, mut w: W) -> std::io::Result<()> {
    let height = plan
        .trials
        .first()
        .or(plan.tutorial.first())
        .map_or(0.0, |t| t.source_height);
    writeln!(w, "# participant={}", plan.participant_id)?;
    writeln!(w, "# seed={}", plan.seed)?;
    writeln!(w, "# first_system={}", plan.first_system)?;
    writeln!(w, "# height={height}")?;
    writeln!(w, "{PLAN_HEADER}")?;
    for t in plan.tutorial.iter().chain(&plan.trials) {
        write!(
            w,
            "{},{},{},{},{},{},{},{}",
            t.index,
            t.block,
            t.sound,
            t.environment,
            t.system,
            t.movement,
            t.source_start.x,
            t.source_start.y
        )?;
        match &t.trajectory {
            Some(traj) => writeln!(w, ",{},{},{}", traj.end.x, traj.end.y, traj.duration)?,
            None => writeln!(w, ",,,")?,
        }
    }
    Ok(())
}

pub fn save_plan(plan: &SessionPlan, path: &Path) -> Result<(), SessionError> {
    let mut buf = Vec::new();
    write_plan(plan, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn field<T: std::str::FromStr>(tok: &str, what: &str, line: usize) -> Result<T, SessionError> {
    tok.trim()
        .parse()
        .map_err(|_| SessionError::Parse(format!("line {line}: bad {what} {tok:?}")))
}

pub fn read_plan<R: BufRead>(r: R) -> Result<SessionPlan, SessionError> {
    let mut participant = None;
    let mut seed = None;
    let mut first_system = None;
    let mut height = None;
    let mut trials = Vec::new();
    let mut tutorial = Vec::new();
    let mut seen_header = false;

    for (i, line) in r.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let (k, v) = meta
                .split_once('=')
                .ok_or_else(|| SessionError::Parse(format!("line {n}: expected # key=value")))?;
            match k.trim() {
                "participant" => participant = Some(v.trim().to_string()),
                "seed" => seed = Some(field::<u64>(v, "seed", n)?),
                "first_system" => first_system = Some(field::<System>(v, "system", n)?),
                "height" => height = Some(field::<f64>(v, "height", n)?),
                other => {
                    return Err(SessionError::Parse(format!(
                        "line {n}: unknown key {other:?}"
                    )))
                }
            }
            continue;
        }
        if !seen_header {
            if line.trim() != PLAN_HEADER {
                return Err(SessionError::Parse(format!("line {n}: expected header")));
            }
            seen_header = true;
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 11 {
            return Err(SessionError::Parse(format!(
                "line {n}: expected 11 fields, got {}",
                toks.len()
            )));
        }
        let movement: Movement = field(toks[5], "movement", n)?;
        let start = P2::new(field(toks[6], "x", n)?, field(toks[7], "y", n)?);
        let trajectory = match movement {
            Movement::Static => None,
            Movement::Dynamic => Some(Trajectory {
                start,
                end: P2::new(field(toks[8], "end_x", n)?, field(toks[9], "end_y", n)?),
                duration: field(toks[10], "duration", n)?,
            }),
        };
        let spec = TrialSpec {
            index: field(toks[0], "index", n)?,
            block: field(toks[1], "block", n)?,
            sound: field(toks[2], "sound", n)?,
            environment: field(toks[3], "environment", n)?,
            system: field(toks[4], "system", n)?,
            movement,
            source_start: start,
            source_height: height
                .ok_or_else(|| SessionError::Parse(format!("line {n}: height not set")))?,
            trajectory,
        };
        if spec.block == 0 {
            tutorial.push(spec);
        } else {
            trials.push(spec);
        }
    }

    let missing = |k: &str| SessionError::Parse(format!("missing # {k}="));
    Ok(SessionPlan {
        participant_id: participant.ok_or_else(|| missing("participant"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        first_system: first_system.ok_or_else(|| missing("first_system"))?,
        trials,
        tutorial,
    })
}

pub fn load_plan(path: &Path) -> Result<SessionPlan, SessionError> {
    let f = std::fs::File::open(path)?;
    read_plan(std::io::BufReader::new(f))
}
