use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SessionError;
use crate::geometry::{heading_vector, Rect, P2};

macro_rules! labelled_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self { $($name::$variant => $label),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = SessionError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($label => Ok($name::$variant),)+
                    other => Err(SessionError::Parse(format!(
                        "unknown {} {:?}", stringify!($name), other
                    ))),
                }
            }
        }
    };
}

labelled_enum!(
    /// The three recordings used in the experiment.
    Sound { Telephone => "telephone", Piano => "piano", Birdsong => "birdsong" }
);
labelled_enum!(System { Wfs => "wfs", Stereo => "stereo" });
labelled_enum!(Environment { Blank => "blank", Indoors => "indoors", Outdoors => "outdoors" });
labelled_enum!(Movement { Static => "static", Dynamic => "dynamic" });

impl Sound {
    /// Playback length in seconds.
    pub fn duration(&self) -> f64 {
        match self {
            Sound::Telephone => 6.12,
            Sound::Piano => 6.861,
            Sound::Birdsong => 159.362,
        }
    }
}

impl System {
    pub fn other(&self) -> System {
        match self {
            System::Wfs => System::Stereo,
            System::Stereo => System::Wfs,
        }
    }
}

pub const TRAJECTORY_LENGTH: f64 = 2.0;
pub const TRAJECTORY_MIN_DURATION: f64 = 1.0;
pub const TRAJECTORY_MAX_DURATION: f64 = 3.0;
const MAX_TRAJECTORY_ATTEMPTS: usize = 1000;

pub const STATIC_REPEATS: usize = 2;
pub const DYNAMIC_REPEATS: usize = 3;
pub const STATIC_BLOCK_LEN: usize = 6;
pub const DYNAMIC_BLOCK_LEN: usize = 9;
pub const TRIALS_PER_SESSION: usize = 54;
pub const TUTORIAL_TRIALS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub start: P2,
    pub end: P2,
    pub duration: f64,
}

impl Trajectory {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    /// Position at `t` seconds after onset; rests at `end` afterwards.
    pub fn position_at(&self, t: f64) -> P2 {
        let u = (t / self.duration).clamp(0.0, 1.0);
        self.start + (self.end - self.start) * u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    /// 1-based position in the session (tutorial trials are numbered separately).
    pub index: usize,
    /// 1-based block number; 0 for tutorial trials.
    pub block: usize,
    pub system: System,
    pub environment: Environment,
    pub sound: Sound,
    pub movement: Movement,
    pub source_start: P2,
    pub source_height: f64,
    pub trajectory: Option<Trajectory>,
}

impl TrialSpec {
    /// Where the participant should place the guess.
    pub fn target(&self) -> P2 {
        self.trajectory.map_or(self.source_start, |t| t.end)
    }

    pub fn source_at(&self, t: f64) -> P2 {
        self.trajectory
            .map_or(self.source_start, |traj| traj.position_at(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionPlan {
    pub participant_id: String,
    pub seed: u64,
    pub first_system: System,
    pub trials: Vec<TrialSpec>,
    /// Warm-up trials, excluded from analysis.
    pub tutorial: Vec<TrialSpec>,
}

/// Geometry needed to place sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanGeometry {
    /// Walkable square.
    pub area: Rect,
    /// Sources keep this distance from the square's edge (speaker line).
    pub source_margin: f64,
    pub height: f64,
}

impl Default for PlanGeometry {
    fn default() -> Self {
        Self {
            area: Rect::square(P2::origin(), 2.0),
            source_margin: 0.05,
            height: 1.6,
        }
    }
}

impl PlanGeometry {
    pub fn source_area(&self) -> Rect {
        self.area.shrink(self.source_margin)
    }
}

pub fn random_point<R: Rng>(rng: &mut R, area: &Rect) -> P2 {
    P2::new(
        rng.random_range(area.min.x..area.max.x),
        rng.random_range(area.min.y..area.max.y),
    )
}

/// A 2 m straight trajectory starting at `start` and ending inside `area`.
pub fn trajectory_from<R: Rng>(
    rng: &mut R,
    area: &Rect,
    start: P2,
) -> Result<Trajectory, SessionError> {
    for _ in 0..MAX_TRAJECTORY_ATTEMPTS {
        let heading = rng.random_range(0.0..std::f64::consts::TAU);
        let end = start + heading_vector(heading) * TRAJECTORY_LENGTH;
        if area.contains(&end) {
            let duration = rng.random_range(TRAJECTORY_MIN_DURATION..=TRAJECTORY_MAX_DURATION);
            return Ok(Trajectory {
                start,
                end,
                duration,
            });
        }
    }
    Err(SessionError::Placement(format!(
        "no {TRAJECTORY_LENGTH} m trajectory from {start:?} stays inside the area"
    )))
}

/// A 2 m trajectory with both ends inside `area`.
///
/// Start and direction are drawn together and rejected jointly: from
/// points near the middle of a 2 m square no 2 m segment fits at all.
pub fn random_trajectory<R: Rng>(rng: &mut R, area: &Rect) -> Result<Trajectory, SessionError> {
    for _ in 0..MAX_TRAJECTORY_ATTEMPTS {
        let start = random_point(rng, area);
        let heading = rng.random_range(0.0..std::f64::consts::TAU);
        let end = start + heading_vector(heading) * TRAJECTORY_LENGTH;
        if area.contains(&end) {
            let duration = rng.random_range(TRAJECTORY_MIN_DURATION..=TRAJECTORY_MAX_DURATION);
            return Ok(Trajectory {
                start,
                end,
                duration,
            });
        }
    }
    Err(SessionError::Placement(format!(
        "no {TRAJECTORY_LENGTH} m trajectory fits inside the area"
    )))
}

/// The full 54-trial design for one participant.
///
/// Each system half holds three static blocks (blank, indoors, outdoors;
/// every sound twice) followed by one dynamic block (every sound three
/// times, blank environment). Order is shuffled only within blocks.
pub fn generate_session(
    participant_id: &str,
    seed: u64,
    first_system: System,
    geometry: &PlanGeometry,
    with_tutorial: bool,
) -> Result<SessionPlan, SessionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = geometry.source_area();
    let mut trials = Vec::with_capacity(TRIALS_PER_SESSION);
    let mut block = 0;

    for system in [first_system, first_system.other()] {
        for environment in Environment::ALL {
            block += 1;
            let mut sounds: Vec<Sound> = Sound::ALL
                .iter()
                .flat_map(|s| std::iter::repeat_n(*s, STATIC_REPEATS))
                .collect();
            sounds.shuffle(&mut rng);
            for sound in sounds {
                let start = random_point(&mut rng, &area);
                trials.push(TrialSpec {
                    index: trials.len() + 1,
                    block,
                    system,
                    environment: *environment,
                    sound,
                    movement: Movement::Static,
                    source_start: start,
                    source_height: geometry.height,
                    trajectory: None,
                });
            }
        }
        block += 1;
        let mut sounds: Vec<Sound> = Sound::ALL
            .iter()
            .flat_map(|s| std::iter::repeat_n(*s, DYNAMIC_REPEATS))
            .collect();
        sounds.shuffle(&mut rng);
        for sound in sounds {
            let traj = random_trajectory(&mut rng, &area)?;
            trials.push(TrialSpec {
                index: trials.len() + 1,
                block,
                system,
                environment: Environment::Blank,
                sound,
                movement: Movement::Dynamic,
                source_start: traj.start,
                source_height: geometry.height,
                trajectory: Some(traj),
            });
        }
    }

    let tutorial = if with_tutorial {
        // one instructed trial, then one per sound
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7475_746f_7269_616c);
        [
            Sound::Telephone,
            Sound::Telephone,
            Sound::Piano,
            Sound::Birdsong,
        ]
        .iter()
        .enumerate()
        .map(|(i, sound)| TrialSpec {
            index: i + 1,
            block: 0,
            system: first_system,
            environment: Environment::Blank,
            sound: *sound,
            movement: Movement::Static,
            source_start: random_point(&mut rng, &area),
            source_height: geometry.height,
            trajectory: None,
        })
        .collect()
    } else {
        Vec::new()
    };

    Ok(SessionPlan {
        participant_id: participant_id.to_string(),
        seed,
        first_system,
        trials,
        tutorial,
    })
}

type StaticKey = (System, Environment, Sound);
type DynamicKey = (System, Sound);

impl SessionPlan {
    pub fn static_condition_counts(&self) -> BTreeMap<StaticKey, usize> {
        let mut m = BTreeMap::new();
        for t in self
            .trials
            .iter()
            .filter(|t| t.movement == Movement::Static)
        {
            *m.entry((t.system, t.environment, t.sound)).or_insert(0) += 1;
        }
        m
    }

    pub fn dynamic_condition_counts(&self) -> BTreeMap<DynamicKey, usize> {
        let mut m = BTreeMap::new();
        for t in self
            .trials
            .iter()
            .filter(|t| t.movement == Movement::Dynamic)
        {
            *m.entry((t.system, t.sound)).or_insert(0) += 1;
        }
        m
    }

    /// Trials grouped by block number, in session order.
    pub fn blocks(&self) -> Vec<Vec<&TrialSpec>> {
        let mut out: Vec<Vec<&TrialSpec>> = Vec::new();
        for t in &self.trials {
            if out.last().is_none_or(|b| b[0].block != t.block) {
                out.push(Vec::new());
            }
            out.last_mut().unwrap().push(t);
        }
        out
    }

    /// Checks every structural invariant of the design.
    pub fn validate(&self, geometry: &PlanGeometry) -> Result<(), SessionError> {
        let fail = |msg: String| Err(SessionError::InvalidPlan(msg));
        if self.trials.len() != TRIALS_PER_SESSION {
            return fail(format!("{} trials instead of 54", self.trials.len()));
        }
        for (i, t) in self.trials.iter().enumerate() {
            if t.index != i + 1 {
                return fail(format!("trial {} carries index {}", i + 1, t.index));
            }
        }

        let statics = self.static_condition_counts();
        if statics.len() != 18 || statics.values().any(|&n| n != STATIC_REPEATS) {
            return fail(format!("static condition counts {statics:?}"));
        }
        let dynamics = self.dynamic_condition_counts();
        if dynamics.len() != 6 || dynamics.values().any(|&n| n != DYNAMIC_REPEATS) {
            return fail(format!("dynamic condition counts {dynamics:?}"));
        }

        let blocks = self.blocks();
        let expected_lens = [6, 6, 6, 9, 6, 6, 6, 9];
        if blocks.len() != 8 {
            return fail(format!("{} blocks instead of 8", blocks.len()));
        }
        for (b, (block, &len)) in blocks.iter().zip(&expected_lens).enumerate() {
            if block.len() != len || block[0].block != b + 1 {
                return fail(format!("block {} malformed", b + 1));
            }
            let first = block[0];
            let system = if b < 4 {
                self.first_system
            } else {
                self.first_system.other()
            };
            for t in block {
                if t.system != system || t.movement != first.movement {
                    return fail(format!("block {} mixes conditions", b + 1));
                }
                if t.movement == Movement::Static && t.environment != first.environment {
                    return fail(format!("block {} mixes environments", b + 1));
                }
            }
            let mut sounds: BTreeMap<Sound, usize> = BTreeMap::new();
            for t in block {
                *sounds.entry(t.sound).or_insert(0) += 1;
            }
            let per_sound = if first.movement == Movement::Static {
                STATIC_REPEATS
            } else {
                DYNAMIC_REPEATS
            };
            if sounds.len() != 3 || sounds.values().any(|&n| n != per_sound) {
                return fail(format!("block {} sound multiset {sounds:?}", b + 1));
            }
            if (b % 4 == 3) != (first.movement == Movement::Dynamic) {
                return fail(format!("block {} has the wrong movement", b + 1));
            }
        }

        for t in &self.trials {
            if !geometry.area.contains_strict(&t.source_start) {
                return fail(format!("trial {} source outside the area", t.index));
            }
            if t.source_height != geometry.height {
                return fail(format!("trial {} source height", t.index));
            }
            match (t.movement, &t.trajectory) {
                (Movement::Static, None) => {}
                (Movement::Dynamic, Some(traj)) => {
                    if (traj.length() - TRAJECTORY_LENGTH).abs() > 1e-9 {
                        return fail(format!("trial {} trajectory length", t.index));
                    }
                    if !(TRAJECTORY_MIN_DURATION..=TRAJECTORY_MAX_DURATION).contains(&traj.duration)
                    {
                        return fail(format!("trial {} trajectory duration", t.index));
                    }
                    if t.environment != Environment::Blank {
                        return fail(format!("dynamic trial {} not blank", t.index));
                    }
                    if traj.start != t.source_start || !geometry.area.contains_strict(&traj.end) {
                        return fail(format!("trial {} trajectory endpoints", t.index));
                    }
                }
                _ => return fail(format!("trial {} movement/trajectory mismatch", t.index)),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sound_durations() {
        assert_eq!(Sound::Telephone.duration(), 6.12);
        assert_eq!(Sound::Piano.duration(), 6.861);
        assert_eq!(Sound::Birdsong.duration(), 159.362);
    }

    #[test]
    fn labels_round_trip() {
        for s in Sound::ALL {
            assert_eq!(s.as_str().parse::<Sound>().unwrap(), *s);
        }
        assert_eq!("WFS".parse::<System>().unwrap(), System::Wfs);
        assert!("headphones".parse::<System>().is_err());
    }

    #[test]
    fn generated_plan_is_valid() {
        let g = PlanGeometry::default();
        for seed in 0..20 {
            for first in [System::Wfs, System::Stereo] {
                let p = generate_session("P01", seed, first, &g, false).unwrap();
                p.validate(&g).unwrap();
                assert_eq!(
                    p.trials
                        .iter()
                        .filter(|t| t.movement == Movement::Static)
                        .count(),
                    36
                );
                assert_eq!(
                    p.trials
                        .iter()
                        .filter(|t| t.movement == Movement::Dynamic)
                        .count(),
                    18
                );
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = PlanGeometry::default();
        let a = generate_session("P01", 42, System::Wfs, &g, true).unwrap();
        let b = generate_session("P01", 42, System::Wfs, &g, true).unwrap();
        assert_eq!(a, b);
        let c = generate_session("P01", 43, System::Wfs, &g, true).unwrap();
        assert_ne!(a.trials, c.trials);
        assert_eq!(a.tutorial.len(), TUTORIAL_TRIALS);
    }

    #[test]
    fn validate_catches_tampering() {
        let g = PlanGeometry::default();
        let mut p = generate_session("P01", 1, System::Wfs, &g, false).unwrap();
        p.trials[0].sound = match p.trials[0].sound {
            Sound::Telephone => Sound::Piano,
            _ => Sound::Telephone,
        };
        assert!(p.validate(&g).is_err());

        let mut p = generate_session("P01", 1, System::Wfs, &g, false).unwrap();
        p.trials.swap(5, 6);
        assert!(p.validate(&g).is_err());
    }

    #[test]
    fn corner_trajectory_stays_inside() {
        let area = Rect::square(P2::origin(), 2.0).shrink(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let corner = P2::new(-0.95, -0.95);
        for _ in 0..200 {
            let t = trajectory_from(&mut rng, &area, corner).unwrap();
            assert!(area.contains(&t.end));
            assert!(t.end.x > -0.95 + 0.5 && t.end.y > -0.95 + 0.5);
            assert!((t.length() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn impossible_trajectory_is_a_placement_error() {
        let tiny = Rect::square(P2::origin(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            random_trajectory(&mut rng, &tiny),
            Err(SessionError::Placement(_))
        ));
    }

    #[test]
    fn central_start_has_no_trajectory() {
        let area = Rect::square(P2::origin(), 2.0).shrink(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(trajectory_from(&mut rng, &area, P2::origin()).is_err());
        for _ in 0..1000 {
            let t = random_trajectory(&mut rng, &area).unwrap();
            assert!(area.contains(&t.start) && area.contains(&t.end));
        }
    }

    #[test]
    fn trajectory_interpolation() {
        let t = Trajectory {
            start: P2::new(0.0, 0.0),
            end: P2::new(2.0, 0.0),
            duration: 2.0,
        };
        assert_eq!(t.position_at(1.0), P2::new(1.0, 0.0));
        assert_eq!(t.position_at(5.0), P2::new(2.0, 0.0));
        assert_eq!(t.position_at(-1.0), P2::new(0.0, 0.0));
    }
}
