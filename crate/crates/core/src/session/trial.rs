use nalgebra::Quaternion;
use rand::Rng;

use super::design::TrialSpec;
use super::scene::Scene;
use super::SessionError;
use crate::agent::{yaw_quaternion, AgentState, Guess, SearchAgent};
use crate::geometry::{at_height, P2, P3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialTiming {
    /// Tracking period (50 Hz).
    pub dt: f64,
    /// Standing still before the sound starts.
    pub idle: f64,
    /// Time allowed for a guess once the sound has ended.
    pub guess_timeout: f64,
    pub feedback: f64,
}

impl Default for TrialTiming {
    fn default() -> Self {
        Self {
            dt: 0.02,
            idle: 0.5,
            guess_timeout: 30.0,
            feedback: 0.5,
        }
    }
}

impl TrialTiming {
    fn ticks(&self, seconds: f64) -> u64 {
        (seconds / self.dt).round().max(0.0) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandPose {
    pub pos: P3,
    pub rot: Quaternion<f64>,
    pub valid: bool,
}

impl HandPose {
    /// What the tracker reports for a lost hand.
    pub const SENTINEL: HandPose = HandPose {
        pos: P3::new(0.0, 0.0, 0.0),
        rot: Quaternion::new(1.0, 0.0, 0.0, 0.0),
        valid: false,
    };

    pub fn tracked(pos: P3, rot: Quaternion<f64>) -> Self {
        Self {
            pos,
            rot,
            valid: true,
        }
    }

    pub fn is_sentinel_pose(pos: &P3, rot: &Quaternion<f64>) -> bool {
        *pos == Self::SENTINEL.pos && *rot == Self::SENTINEL.rot
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingSample {
    /// Seconds since session start.
    pub t: f64,
    pub hmd_pos: P3,
    pub hmd_rot: Quaternion<f64>,
    pub left_hand: HandPose,
    pub right_hand: HandPose,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub spec_index: usize,
    pub guess: P3,
    /// Seconds after sound onset.
    pub guess_time: f64,
    pub target: P2,
    pub score: f64,
}

impl TrialResult {
    pub fn new(spec_index: usize, guess: P3, guess_time: f64, target: P2) -> Self {
        let score = (P2::new(guess.x, guess.y) - target).norm();
        Self {
            spec_index,
            guess,
            guess_time,
            target,
            score,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub result: TrialResult,
    pub samples: Vec<TrackingSample>,
    /// Session time of sound onset.
    pub onset_time: f64,
    /// Renderer position of the target (differs from the target under misalignment).
    pub rendered_target: P2,
    pub forced: bool,
    pub clamp_events: usize,
    /// First tick after this trial.
    pub end_tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialPhase {
    Idle,
    Playing,
    AwaitingGuess,
    Feedback,
    Done,
}

fn hand(pos: P3, rot: Quaternion<f64>, dropout: f64, rng: &mut impl Rng) -> HandPose {
    if dropout > 0.0 && rng.random_bool(dropout.min(1.0)) {
        HandPose::SENTINEL
    } else {
        HandPose::tracked(pos, rot)
    }
}

/// Runs one trial from idle to done, sampling tracking every tick.
///
/// Ticks are counted session-wide from `start_tick`, so timestamps are
/// `tick · dt` seconds since session start.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    spec: &TrialSpec,
    agent: &mut dyn SearchAgent,
    state: &mut AgentState,
    scene: &mut dyn Scene,
    timing: &TrialTiming,
    hand_dropout: f64,
    start_tick: u64,
    rng: &mut impl Rng,
) -> Result<TrialRecord, SessionError> {
    if !state.body_area.contains(&state.head()) {
        return Err(SessionError::Config(
            "agent must start inside the walkable area".into(),
        ));
    }
    let dt = timing.dt;
    let idle_ticks = timing.ticks(timing.idle);
    let sound_ticks = timing.ticks(spec.sound.duration());
    let timeout_ticks = timing.ticks(timing.guess_timeout);
    let feedback_ticks = timing.ticks(timing.feedback);

    let mut phase = TrialPhase::Idle;
    let mut tick = start_tick;
    let onset_tick = start_tick + idle_ticks;
    let mut guess: Option<(Guess, u64)> = None;
    let mut feedback_end = 0;
    let mut samples = Vec::new();

    while phase != TrialPhase::Done {
        let since_onset = tick.saturating_sub(onset_tick);
        let t = since_onset as f64 * dt;
        if phase == TrialPhase::Idle && tick >= onset_tick {
            phase = TrialPhase::Playing;
        }
        if phase == TrialPhase::Playing && since_onset >= sound_ticks {
            // played once; no repeats
            phase = TrialPhase::AwaitingGuess;
        }

        match phase {
            TrialPhase::Playing | TrialPhase::AwaitingGuess => {
                let percept = if phase == TrialPhase::Playing {
                    Some(scene.percept(&state.listener, t))
                } else {
                    None
                };
                let mut g = agent.step(state, percept.as_ref(), t, dt);
                if g.is_none()
                    && phase == TrialPhase::AwaitingGuess
                    && since_onset >= sound_ticks + timeout_ticks
                {
                    g = Some(agent.forced_guess(state));
                }
                if let Some(g) = g {
                    guess = Some((g, tick));
                    feedback_end = tick + feedback_ticks;
                    phase = TrialPhase::Feedback;
                }
            }
            TrialPhase::Feedback if tick >= feedback_end => phase = TrialPhase::Done,
            _ => {}
        }
        if phase == TrialPhase::Done {
            break;
        }

        let rot = state.head_rotation();
        let hand_rot = yaw_quaternion(state.listener.yaw);
        samples.push(TrackingSample {
            t: tick as f64 * dt,
            hmd_pos: state.listener.head_position,
            hmd_rot: rot,
            left_hand: hand(state.left_hand, hand_rot, hand_dropout, rng),
            right_hand: hand(state.right_hand, hand_rot, hand_dropout, rng),
        });
        tick += 1;
    }

    let (g, guess_tick) = guess.expect("a trial only ends after a guess");
    let target = spec.target();
    let end_t = spec.trajectory.map_or(0.0, |tr| tr.duration);
    Ok(TrialRecord {
        result: TrialResult::new(
            spec.index,
            at_height(&g.position, spec.source_height),
            (guess_tick - onset_tick) as f64 * dt,
            target,
        ),
        samples,
        onset_time: onset_tick as f64 * dt,
        rendered_target: scene.rendered_position(end_t),
        forced: g.forced,
        clamp_events: state.clamp_events,
        end_tick: tick,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{OracleAgent, Percept};
    use crate::geometry::Rect;
    use crate::listener::{BinauralCue, ListenerState};
    use crate::session::design::{Environment, Movement, Sound, System};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Silent;
    impl Scene for Silent {
        fn percept(&mut self, _: &ListenerState, _: f64) -> Percept {
            Percept {
                cue: BinauralCue { itd: 0.0, ild: 0.0 },
                level_db: Some(-20.0),
            }
        }
        fn rendered_position(&self, _: f64) -> P2 {
            P2::origin()
        }
    }

    /// Never guesses on its own.
    struct Stubborn;
    impl SearchAgent for Stubborn {
        fn step(
            &mut self,
            _: &mut AgentState,
            _: Option<&Percept>,
            _: f64,
            _: f64,
        ) -> Option<Guess> {
            None
        }
    }

    /// Guesses a fixed point after a delay.
    struct Delayed(f64, P2);
    impl SearchAgent for Delayed {
        fn step(
            &mut self,
            s: &mut AgentState,
            _: Option<&Percept>,
            t: f64,
            _: f64,
        ) -> Option<Guess> {
            (t >= self.0).then(|| {
                s.right_hand = at_height(&self.1, 1.6);
                Guess {
                    position: self.1,
                    forced: false,
                }
            })
        }
    }

    fn spec(sound: Sound) -> TrialSpec {
        TrialSpec {
            index: 7,
            block: 2,
            system: System::Stereo,
            environment: Environment::Indoors,
            sound,
            movement: Movement::Static,
            source_start: P2::new(0.2, -0.3),
            source_height: 1.6,
            trajectory: None,
        }
    }

    fn state() -> AgentState {
        let full = Rect::square(P2::origin(), 2.0);
        AgentState::new(P3::new(0.0, 0.0, 1.6), 0.0, full.shrink(0.15), full)
    }

    #[test]
    fn oracle_scores_zero_instantly() {
        let s = spec(Sound::Piano);
        let mut agent = OracleAgent { target: s.target() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = run_trial(
            &s,
            &mut agent,
            &mut state(),
            &mut Silent,
            &TrialTiming::default(),
            0.0,
            0,
            &mut rng,
        )
        .unwrap();
        assert_eq!(rec.result.score, 0.0);
        assert_eq!(rec.result.guess_time, 0.0);
        assert_eq!(rec.onset_time, 0.5);
    }

    #[test]
    fn three_four_five() {
        let s = spec(Sound::Piano);
        let g = s.target() + nalgebra::Vector2::new(0.3, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = run_trial(
            &s,
            &mut Delayed(1.0, g),
            &mut state(),
            &mut Silent,
            &TrialTiming::default(),
            0.0,
            0,
            &mut rng,
        )
        .unwrap();
        assert!((rec.result.score - 0.5).abs() < 1e-12);
        assert!((rec.result.guess_time - 1.0).abs() < 1e-9);
        let at_guess = rec
            .samples
            .iter()
            .find(|x| (x.t - (rec.onset_time + 1.0)).abs() < 1e-9)
            .unwrap();
        assert_eq!(at_guess.right_hand.pos, at_height(&g, 1.6));
    }

    #[test]
    fn timeout_forces_a_guess_after_the_sound() {
        let s = spec(Sound::Telephone);
        let timing = TrialTiming::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = run_trial(
            &s,
            &mut Stubborn,
            &mut state(),
            &mut Silent,
            &timing,
            0.0,
            0,
            &mut rng,
        )
        .unwrap();
        assert!(rec.forced);
        assert!((rec.result.guess_time - (6.12 + 30.0)).abs() < 1e-9);
    }

    #[test]
    fn sample_count_matches_fifty_hertz() {
        let s = spec(Sound::Birdsong);
        let timing = TrialTiming {
            idle: 0.0,
            feedback: 0.0,
            ..TrialTiming::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = run_trial(
            &s,
            &mut Delayed(25.0, P2::origin()),
            &mut state(),
            &mut Silent,
            &timing,
            0.0,
            100,
            &mut rng,
        )
        .unwrap();
        assert!(
            (rec.samples.len() as i64 - 1250).abs() <= 1,
            "{}",
            rec.samples.len()
        );
        for w in rec.samples.windows(2) {
            assert!((w[1].t - w[0].t - 0.02).abs() < 1e-6);
        }
        assert!((rec.samples[0].t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dropout_marks_hands_invalid() {
        let s = spec(Sound::Birdsong);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rec = run_trial(
            &s,
            &mut Delayed(40.0, P2::origin()),
            &mut state(),
            &mut Silent,
            &TrialTiming::default(),
            0.1,
            0,
            &mut rng,
        )
        .unwrap();
        let n = rec.samples.len() as f64;
        let lost = rec.samples.iter().filter(|x| !x.right_hand.valid).count() as f64;
        assert!((lost / n - 0.1).abs() < 0.03, "{}", lost / n);
        for x in rec.samples.iter().filter(|x| !x.right_hand.valid) {
            assert!(HandPose::is_sentinel_pose(
                &x.right_hand.pos,
                &x.right_hand.rot
            ));
        }
    }
}
