//! Simulated participants.
//!
//! An agent sees one [`Percept`] per tick while the sound plays (and `None`
//! afterwards), moves its head and hands, and eventually returns a guess.
//! Policies are small kinematic state machines; they are meant to produce
//! plausible logs, not to model human statistics.

mod stereo;
mod wfs;

pub use stereo::StereoAgent;
pub use wfs::WfsAgent;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::geometry::{
    angle_between, heading_of, heading_vector, horizontal, wrap_angle, Rect, P2, P3,
};
use crate::listener::{BinauralCue, ListenerState, LocalizationEstimate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams {
    /// m/s
    pub walk_speed: f64,
    /// rad/s
    pub turn_rate: f64,
    /// m
    pub probe_step: f64,
    /// Std-dev of additive ITD noise, s.
    pub cue_noise_itd: f64,
    /// Std-dev of additive level noise, dB.
    pub cue_noise_level: f64,
    /// m
    pub commit_threshold: f64,
    /// s after onset
    pub max_search_time: f64,
    /// Fraction of hand samples lost by the tracker.
    pub hand_dropout: f64,
    /// Horizontal arm reach, m.
    pub reach: f64,
    /// Head retreat while placing the guess, m.
    pub lean_back: f64,
    /// s
    pub reach_duration: f64,
    /// Per-trial multiplicative noise factor for the stereo agent; 1 disables learning.
    pub learning_decay: f64,
    pub seed: u64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            walk_speed: 0.8,
            turn_rate: 3.0,
            probe_step: 0.15,
            cue_noise_itd: 20e-6,
            cue_noise_level: 1.0,
            commit_threshold: 0.1,
            max_search_time: 40.0,
            hand_dropout: 0.02,
            reach: 0.45,
            lean_back: 0.1,
            reach_duration: 0.6,
            learning_decay: 1.0,
            seed: 0,
        }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("walk_speed", self.walk_speed),
            ("turn_rate", self.turn_rate),
            ("probe_step", self.probe_step),
            ("cue_noise_itd", self.cue_noise_itd),
            ("cue_noise_level", self.cue_noise_level),
            ("commit_threshold", self.commit_threshold),
            ("max_search_time", self.max_search_time),
            ("hand_dropout", self.hand_dropout),
            ("reach", self.reach),
            ("lean_back", self.lean_back),
            ("reach_duration", self.reach_duration),
            ("learning_decay", self.learning_decay),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if self.walk_speed <= 0.0 || self.turn_rate <= 0.0 || self.probe_step <= 0.0 {
            return Err("walk_speed, turn_rate and probe_step must be positive".into());
        }
        if self.hand_dropout > 1.0 {
            return Err("hand_dropout must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Noise-free copy.
    pub fn noiseless(mut self) -> Self {
        self.cue_noise_itd = 0.0;
        self.cue_noise_level = 0.0;
        self
    }
}

/// What the agent hears on one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percept {
    pub cue: BinauralCue,
    /// Overall loudness at the head, dB; only the stereo renderer provides it.
    pub level_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Orient,
    Explore,
    Refine,
    Commit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guess {
    pub position: P2,
    /// Placed by a timeout rather than by the policy.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub listener: ListenerState,
    pub right_hand: P3,
    pub left_hand: P3,
    pub phase: Phase,
    pub belief: Option<LocalizationEstimate>,
    pub observation_log: Vec<(P3, f64)>,
    /// Region the head may occupy.
    pub body_area: Rect,
    /// Region guesses may be placed in.
    pub guess_area: Rect,
    /// Movement requests that had to be clamped to `body_area`.
    pub clamp_events: usize,
}

const HAND_FORWARD: f64 = 0.25;
const HAND_SIDE: f64 = 0.2;
const HAND_DROP: f64 = 0.35;

impl AgentState {
    pub fn new(head: P3, yaw: f64, body_area: Rect, guess_area: Rect) -> Self {
        let mut s = Self {
            listener: ListenerState::new(head, yaw),
            right_hand: head,
            left_hand: head,
            phase: Phase::Orient,
            belief: None,
            observation_log: Vec::new(),
            body_area,
            guess_area,
            clamp_events: 0,
        };
        s.rest_hands();
        s
    }

    pub fn head(&self) -> P2 {
        horizontal(&self.listener.head_position)
    }

    pub fn head_height(&self) -> f64 {
        self.listener.head_position.z
    }

    fn set_head(&mut self, p: P2) {
        let q = self.body_area.clamp(&p);
        self.listener.head_position.x = q.x;
        self.listener.head_position.y = q.y;
    }

    /// Clamps a movement goal into the body area, counting clamps.
    pub fn admissible(&mut self, target: &P2) -> P2 {
        if self.body_area.contains(target) {
            *target
        } else {
            self.clamp_events += 1;
            self.body_area.clamp(target)
        }
    }

    /// Moves at most `speed·dt` toward `target`; true once there.
    pub fn walk_toward(&mut self, target: &P2, speed: f64, dt: f64) -> bool {
        let here = self.head();
        let delta = target - here;
        let dist = delta.norm();
        let stride = speed * dt;
        if dist <= stride {
            self.set_head(*target);
            true
        } else {
            self.set_head(here + delta * (stride / dist));
            false
        }
    }

    pub fn turn_toward(&mut self, yaw: f64, rate: f64, dt: f64) {
        let diff = wrap_angle(yaw - self.listener.yaw);
        let max = rate * dt;
        self.listener.yaw = wrap_angle(self.listener.yaw + diff.clamp(-max, max));
    }

    fn body_frame(&self) -> (Vector3<f64>, Vector3<f64>) {
        let yaw = self.listener.yaw;
        let fwd = heading_vector(yaw);
        (
            Vector3::new(fwd.x, fwd.y, 0.0),
            Vector3::new(yaw.cos(), yaw.sin(), 0.0),
        )
    }

    /// Hands stay over the square even when the body is at its edge.
    fn hand_at(&self, side: f64) -> P3 {
        let (fwd, right) = self.body_frame();
        let p = self.listener.head_position + fwd * HAND_FORWARD + right * (side * HAND_SIDE)
            - Vector3::z() * HAND_DROP;
        let xy = self.guess_area.clamp(&crate::geometry::horizontal(&p));
        P3::new(xy.x, xy.y, p.z)
    }

    pub fn right_hand_rest(&self) -> P3 {
        self.hand_at(1.0)
    }

    pub fn left_hand_rest(&self) -> P3 {
        self.hand_at(-1.0)
    }

    pub fn rest_hands(&mut self) {
        self.right_hand = self.right_hand_rest();
        self.left_hand = self.left_hand_rest();
    }

    pub fn head_rotation(&self) -> Quaternion<f64> {
        yaw_quaternion(self.listener.yaw)
    }

    pub fn clip_guess(&self, p: &P2) -> P2 {
        self.guess_area.clamp(p)
    }
}

pub fn yaw_quaternion(yaw: f64) -> Quaternion<f64> {
    *UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw).quaternion()
}

/// A search policy.
pub trait SearchAgent {
    /// Advances one tick. `t` is seconds since sound onset.
    fn step(
        &mut self,
        state: &mut AgentState,
        percept: Option<&Percept>,
        t: f64,
        dt: f64,
    ) -> Option<Guess>;

    /// Guess placed when the trial runs out of time.
    fn forced_guess(&mut self, state: &mut AgentState) -> Guess {
        let p = state
            .belief
            .and_then(|b| b.point())
            .unwrap_or_else(|| state.head());
        let p = state.clip_guess(&p);
        state.phase = Phase::Commit;
        state.right_hand = crate::geometry::at_height(&p, state.head_height());
        Guess {
            position: p,
            forced: true,
        }
    }
}

/// Knows the target and places it instantly.
#[derive(Debug, Clone, Copy)]
pub struct OracleAgent {
    pub target: P2,
}

impl SearchAgent for OracleAgent {
    fn step(
        &mut self,
        state: &mut AgentState,
        _: Option<&Percept>,
        _: f64,
        _: f64,
    ) -> Option<Guess> {
        state.phase = Phase::Commit;
        state.right_hand = crate::geometry::at_height(&self.target, state.head_height());
        Some(Guess {
            position: self.target,
            forced: false,
        })
    }
}

/// Walk within reach of the guess, then move the hand onto it while
/// leaning back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Placement {
    guess: P2,
    reach_start: Option<(f64, P2, P3)>,
}

impl Placement {
    pub(crate) fn new(state: &mut AgentState, guess: P2) -> Self {
        state.phase = Phase::Commit;
        let guess = state.clip_guess(&guess);
        state.belief = Some(LocalizationEstimate {
            origin: state.head(),
            bearing: heading_of(&(guess - state.head())),
            distance: Some((guess - state.head()).norm()),
            confidence: state.belief.map_or(0.5, |b| b.confidence),
        });
        Self {
            guess,
            reach_start: None,
        }
    }

    pub(crate) fn step(
        &mut self,
        state: &mut AgentState,
        params: &AgentParams,
        t: f64,
        dt: f64,
    ) -> Option<Guess> {
        let to_guess = self.guess - state.head();
        if to_guess.norm() > 1e-9 {
            state.turn_toward(heading_of(&to_guess), params.turn_rate, dt);
        }
        match self.reach_start {
            None => {
                if to_guess.norm() <= params.reach {
                    self.reach_start = Some((t, state.head(), state.right_hand));
                } else {
                    let goal = state.body_area.clamp(&self.guess);
                    let before = state.head();
                    let arrived = state.walk_toward(&goal, params.walk_speed, dt);
                    let stuck = (state.head() - before).norm() < 1e-12;
                    if arrived || stuck {
                        self.reach_start = Some((t, state.head(), state.right_hand));
                    }
                }
                state.rest_hands();
                None
            }
            Some((t0, head0, hand0)) => {
                let u = if params.reach_duration > 0.0 {
                    ((t - t0) / params.reach_duration).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                let away = head0 - self.guess;
                let away = if away.norm() > 1e-9 {
                    away / away.norm()
                } else {
                    -heading_vector(state.listener.yaw)
                };
                let lean = state
                    .body_area
                    .clamp(&(head0 + away * (params.lean_back * u)));
                state.listener.head_position.x = lean.x;
                state.listener.head_position.y = lean.y;
                state.left_hand = state.left_hand_rest();
                let target = crate::geometry::at_height(&self.guess, state.head_height());
                if u >= 1.0 {
                    state.right_hand = target;
                    Some(Guess {
                        position: self.guess,
                        forced: false,
                    })
                } else {
                    state.right_hand = hand0 + (target - hand0) * u;
                    None
                }
            }
        }
    }
}

/// Moves the head toward facing `bearing`; true when within `tol`.
pub(crate) fn face(
    state: &mut AgentState,
    bearing: f64,
    params: &AgentParams,
    dt: f64,
    tol: f64,
) -> bool {
    state.turn_toward(bearing, params.turn_rate, dt);
    angle_between(state.listener.yaw, bearing) < tol
}
