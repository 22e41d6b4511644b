//! Direction-first search: turn to face the sound, then step sideways
//! (parallel to the array in front) and triangulate from the bearing change.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{face, AgentParams, AgentState, Guess, Percept, Phase, Placement, SearchAgent};
use crate::geometry::{heading_vector, horizontal, P2, V2};
use crate::listener::{bearing_from_itd, parallax_triangulate, BinauralCue, LocalizationEstimate};

const FACING_TOL: f64 = 5.0 * std::f64::consts::PI / 180.0;
const STABLE_TICKS: usize = 5;
const MAX_ORIENT_TIME: f64 = 2.0;
const EXPLORE_SWEEP: f64 = 0.6;
const REFINE_SWEEP: f64 = 0.4;
const APPROACH_DISTANCE: f64 = 0.5;
/// Ticks between stored observations.
const OBS_EVERY: usize = 5;
const OBS_WINDOW: usize = 30;
const MIN_BASELINE: f64 = 0.2;
const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Clone)]
enum Stage {
    Orient { since: Option<f64>, stable: usize },
    Sweep { to: P2 },
    Approach { to: P2 },
    Place(Placement),
}

#[derive(Debug, Clone)]
pub struct WfsAgent {
    params: AgentParams,
    rng: ChaCha8Rng,
    stage: Stage,
    last_bearing: Option<f64>,
    ticks: usize,
    refinements: usize,
    estimate: Option<P2>,
}

impl WfsAgent {
    pub fn new(params: AgentParams) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            params,
            stage: Stage::Orient {
                since: None,
                stable: 0,
            },
            last_bearing: None,
            ticks: 0,
            refinements: 0,
            estimate: None,
        }
    }

    fn bearing(&mut self, state: &AgentState, cue: &BinauralCue) -> f64 {
        let mut cue = *cue;
        if self.params.cue_noise_itd > 0.0 {
            cue.itd += Normal::new(0.0, self.params.cue_noise_itd)
                .unwrap()
                .sample(&mut self.rng);
        }
        bearing_from_itd(&cue, &state.listener).bearing
    }

    /// Sideways target parallel to the array side the sound seems to come from.
    fn sweep_target(state: &mut AgentState, bearing: f64, length: f64) -> P2 {
        let h = heading_vector(bearing);
        let tangent = if h.x.abs() > h.y.abs() {
            V2::new(0.0, 1.0)
        } else {
            V2::new(1.0, 0.0)
        };
        let here = state.head();
        let rel = here - state.body_area.center();
        let sign = if rel.dot(&tangent) > 0.0 { -1.0 } else { 1.0 };
        let mut target = here + tangent * (sign * length);
        if !state.body_area.contains(&target) {
            let other = here - tangent * (sign * length);
            if state.body_area.contains(&other) {
                target = other;
            }
        }
        state.admissible(&target)
    }

    /// Midpoint of the bearing ray's segment inside the guess area.
    fn ray_midpoint(state: &AgentState, bearing: f64) -> P2 {
        let here = state.head();
        let dir = heading_vector(bearing);
        let exit = state.guess_area.exit_distance(&here, &dir);
        here + dir * (exit / 2.0)
    }

    fn triangulate(&self, state: &AgentState) -> Option<P2> {
        let log = &state.observation_log;
        let recent = &log[log.len().saturating_sub(OBS_WINDOW)..];
        let est = parallax_triangulate(recent, MIN_BASELINE).ok()?;
        let p = est.point()?;
        let last = recent.last()?;
        let ahead = (p - horizontal(&last.0)).dot(&heading_vector(last.1));
        if ahead <= 0.0 || !state.guess_area.shrink(-0.5).contains(&p) {
            return None;
        }
        Some(state.clip_guess(&p))
    }

    fn update_estimate(&mut self, state: &mut AgentState) -> P2 {
        let p = match self.triangulate(state) {
            Some(p) => p,
            None => {
                let b = self.last_bearing.unwrap_or(state.listener.yaw);
                state.clip_guess(&Self::ray_midpoint(state, b))
            }
        };
        let d = p - state.head();
        state.belief = Some(LocalizationEstimate {
            origin: state.head(),
            bearing: crate::geometry::heading_of(&d),
            distance: Some(d.norm()),
            confidence: 1.0 / (1.0 + self.refinements as f64),
        });
        p
    }

    /// Listens on the move: turn toward the latest bearing, log it now and then.
    fn listen(&mut self, state: &mut AgentState, cue: &BinauralCue, dt: f64) {
        let b = self.bearing(state, cue);
        self.last_bearing = Some(b);
        face(state, b, &self.params, dt, FACING_TOL);
        self.ticks += 1;
        if self.ticks.is_multiple_of(OBS_EVERY) {
            state
                .observation_log
                .push((state.listener.head_position, b));
        }
    }

    fn commit(&mut self, state: &mut AgentState, guess: P2) -> Stage {
        Stage::Place(Placement::new(state, guess))
    }
}

impl SearchAgent for WfsAgent {
    fn step(
        &mut self,
        state: &mut AgentState,
        percept: Option<&Percept>,
        t: f64,
        dt: f64,
    ) -> Option<Guess> {
        if t >= self.params.max_search_time {
            return Some(self.forced_guess(state));
        }
        let stage = std::mem::replace(
            &mut self.stage,
            Stage::Orient {
                since: None,
                stable: 0,
            },
        );
        if let Stage::Place(mut pl) = stage {
            let g = pl.step(state, &self.params, t, dt);
            self.stage = Stage::Place(pl);
            return g;
        }
        let Some(percept) = percept else {
            // sound is over: commit to the best available estimate
            let guess = match self.estimate {
                Some(p) => p,
                None => self.update_estimate(state),
            };
            self.stage = self.commit(state, guess);
            return None;
        };

        self.stage = match stage {
            Stage::Orient { since, stable } => {
                let since = since.unwrap_or(t);
                let b = self.bearing(state, &percept.cue);
                self.last_bearing = Some(b);
                let stable = if face(state, b, &self.params, dt, FACING_TOL) {
                    stable + 1
                } else {
                    0
                };
                if stable >= STABLE_TICKS || t - since >= MAX_ORIENT_TIME {
                    state.phase = Phase::Explore;
                    state
                        .observation_log
                        .push((state.listener.head_position, b));
                    Stage::Sweep {
                        to: Self::sweep_target(state, b, EXPLORE_SWEEP),
                    }
                } else {
                    Stage::Orient {
                        since: Some(since),
                        stable,
                    }
                }
            }
            Stage::Sweep { to } => {
                self.listen(state, &percept.cue, dt);
                if state.walk_toward(&to, self.params.walk_speed, dt) {
                    if let Some(b) = self.last_bearing {
                        state
                            .observation_log
                            .push((state.listener.head_position, b));
                    }
                    let previous = self.estimate;
                    let p = self.update_estimate(state);
                    self.estimate = Some(p);
                    let agreed =
                        previous.is_some_and(|q| (q - p).norm() < self.params.commit_threshold);
                    if agreed || self.refinements >= MAX_REFINEMENTS {
                        self.commit(state, p)
                    } else {
                        self.refinements += 1;
                        state.phase = Phase::Refine;
                        let goal = state.admissible(&p);
                        Stage::Approach { to: goal }
                    }
                } else {
                    Stage::Sweep { to }
                }
            }
            Stage::Approach { to } => {
                self.listen(state, &percept.cue, dt);
                let target = self.estimate.unwrap_or(to);
                let arrived = state.walk_toward(&to, self.params.walk_speed, dt);
                if arrived || (target - state.head()).norm() <= APPROACH_DISTANCE {
                    let b = self.last_bearing.unwrap_or(state.listener.yaw);
                    Stage::Sweep {
                        to: Self::sweep_target(state, b, REFINE_SWEEP),
                    }
                } else {
                    Stage::Approach { to }
                }
            }
            Stage::Place(_) => unreachable!("handled above"),
        };
        state.rest_hands();
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rect, P3};

    #[test]
    fn ray_midpoint_halfway_to_edge() {
        let full = Rect::square(P2::origin(), 2.0);
        let s = AgentState::new(P3::new(0.0, 0.0, 1.6), 0.0, full.shrink(0.15), full);
        let m = WfsAgent::ray_midpoint(&s, 0.0);
        assert!((m - P2::new(0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn sweep_runs_parallel_to_facing_side() {
        let full = Rect::square(P2::origin(), 2.0);
        let mut s = AgentState::new(P3::new(0.3, 0.0, 1.6), 0.0, full.shrink(0.15), full);
        // facing north: sweep along x, toward the centre
        let to = WfsAgent::sweep_target(&mut s, 0.0, 0.6);
        assert!((to - P2::new(-0.3, 0.0)).norm() < 1e-12);
        // facing east: sweep along y
        let to = WfsAgent::sweep_target(&mut s, -std::f64::consts::FRAC_PI_2, 0.6);
        assert!((to.x - 0.3).abs() < 1e-12 && (to.y.abs() - 0.6).abs() < 1e-12);
    }
}
