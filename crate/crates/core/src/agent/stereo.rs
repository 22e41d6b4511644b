//! Loudness-gradient search: axis-wise line searches on the perceived level,
//! halving the probe step each cycle until two cycles agree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{AgentParams, AgentState, Guess, Percept, Phase, Placement, SearchAgent};
use crate::geometry::{heading_of, P2};
use crate::listener::LocalizationEstimate;

const ORIENT_SAMPLES: usize = 10;
const PROBE_SAMPLES: usize = 3;
/// Levels this close to the unattenuated level mean "it is right here".
const NEAR_DB: f64 = -1.0;
const MIN_STEP: f64 = 0.04;
const MAX_CYCLES: usize = 4;
const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum After {
    Orient,
    Probe,
    StartLine,
}

#[derive(Debug, Clone)]
enum Stage {
    Listen { after: After, sum: f64, n: usize },
    Walk { to: P2, then: After },
    Place(Placement),
}

#[derive(Debug, Clone)]
struct Line {
    axis: usize,
    dir: f64,
    origin: f64,
    frontier: f64,
    reversed: bool,
    samples: Vec<(f64, f64)>,
    best: usize,
    done: bool,
}

impl Line {
    fn new(axis: usize, dir: f64, coord: f64, level: f64) -> Self {
        Self {
            axis,
            dir,
            origin: coord,
            frontier: coord,
            reversed: false,
            samples: vec![(coord, level)],
            best: 0,
            done: false,
        }
    }

    fn best_level(&self) -> f64 {
        self.samples[self.best].1
    }

    fn record(&mut self, coord: f64, level: f64) {
        self.samples.push((coord, level));
        if level > self.best_level() + LEVEL_TOL {
            self.best = self.samples.len() - 1;
            self.frontier = coord;
        } else {
            self.no_gain();
        }
    }

    fn no_gain(&mut self) {
        if self.best == 0 && !self.reversed {
            self.reversed = true;
            self.dir = -self.dir;
            self.frontier = self.origin;
        } else {
            self.done = true;
        }
    }

    /// Peak coordinate from a parabola through the best sample and its neighbours.
    fn peak(&self) -> f64 {
        let mut s = self.samples.clone();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = self.samples[self.best];
        let i = s.iter().position(|p| *p == best).unwrap_or(0);
        if i == 0 || i + 1 >= s.len() {
            return best.0;
        }
        parabola_vertex(s[i - 1], s[i], s[i + 1]).unwrap_or(best.0)
    }
}

/// Vertex of the parabola through three points, when it opens downward.
pub(crate) fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<f64> {
    let ((x0, y0), (x1, y1), (x2, y2)) = (p0, p1, p2);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    if denom.abs() < 1e-15 {
        return None;
    }
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if a >= -1e-12 {
        // flat top: midpoint of the equal-level run
        if (y1 - y2).abs() <= LEVEL_TOL && y1 > y0 {
            return Some(0.5 * (x1 + x2));
        }
        if (y1 - y0).abs() <= LEVEL_TOL && y1 > y2 {
            return Some(0.5 * (x0 + x1));
        }
        return None;
    }
    Some((-b / (2.0 * a)).clamp(x0, x2))
}

#[derive(Debug, Clone)]
pub struct StereoAgent {
    params: AgentParams,
    rng: ChaCha8Rng,
    noise_scale: f64,
    stage: Stage,
    step_len: f64,
    line: Option<Line>,
    axis_order: [usize; 2],
    axis_in_cycle: usize,
    last_cycle_peak: Option<P2>,
    cycles: usize,
}

impl StereoAgent {
    /// `trials_done` counts earlier trials with this system (for the learning knob).
    pub fn new(params: AgentParams, trials_done: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let first = if rng.random_bool(0.5) { 0 } else { 1 };
        Self {
            noise_scale: params.learning_decay.powi(trials_done as i32),
            params,
            rng,
            stage: Stage::Listen {
                after: After::Orient,
                sum: 0.0,
                n: 0,
            },
            step_len: params.probe_step,
            line: None,
            axis_order: [first, 1 - first],
            axis_in_cycle: 0,
            last_cycle_peak: None,
            cycles: 0,
        }
    }

    fn noisy_level(&mut self, level: f64) -> f64 {
        let sigma = self.params.cue_noise_level * self.noise_scale;
        if sigma > 0.0 {
            level + Normal::new(0.0, sigma).unwrap().sample(&mut self.rng)
        } else {
            level
        }
    }

    fn best_point(&self, state: &AgentState) -> P2 {
        let mut p = state.head();
        if let Some(line) = &self.line {
            p[line.axis] = line.samples[line.best].0;
        }
        p
    }

    fn set_belief(state: &mut AgentState, point: P2, confidence: f64) {
        let d = point - state.head();
        state.belief = Some(LocalizationEstimate {
            origin: state.head(),
            bearing: heading_of(&d),
            distance: Some(d.norm()),
            confidence,
        });
    }

    fn start_line(&mut self, state: &AgentState, level: f64) {
        let axis = self.axis_order[self.axis_in_cycle];
        let dir = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
        self.line = Some(Line::new(axis, dir, state.head()[axis], level));
    }

    /// Chooses the next walk target, or finishes the current line.
    fn advance(&mut self, state: &mut AgentState) -> Stage {
        loop {
            let line = self.line.as_mut().expect("line in progress");
            if line.done {
                let peak = line.peak();
                let mut to = state.head();
                to[line.axis] = peak;
                let to = state.admissible(&to);
                self.axis_in_cycle += 1;
                return Stage::Walk {
                    to,
                    then: After::StartLine,
                };
            }
            let mut target = state.head();
            target[line.axis] = line.frontier + line.dir * self.step_len;
            let goal = state.admissible(&target);
            if (goal[line.axis] - state.head()[line.axis]).abs() < 1e-6 {
                line.no_gain();
                continue;
            }
            return Stage::Walk {
                to: goal,
                then: After::Probe,
            };
        }
    }

    fn measured(&mut self, state: &mut AgentState, after: After, level: f64) -> Stage {
        match after {
            After::Orient => {
                if level >= NEAR_DB {
                    let here = state.head();
                    return Stage::Place(Placement::new(state, here));
                }
                state.phase = Phase::Explore;
                self.start_line(state, level);
                self.advance(state)
            }
            After::Probe => {
                let line = self.line.as_mut().expect("line in progress");
                line.record(state.head()[line.axis], level);
                let best = self.best_point(state);
                Self::set_belief(state, best, 0.5);
                self.advance(state)
            }
            After::StartLine => {
                if self.axis_in_cycle < 2 {
                    self.start_line(state, level);
                    return self.advance(state);
                }
                self.cycles += 1;
                let peak = state.head();
                Self::set_belief(state, peak, 1.0 - 0.5f64.powi(self.cycles as i32));
                let agreed = self
                    .last_cycle_peak
                    .is_some_and(|prev| (prev - peak).norm() < self.params.commit_threshold);
                if agreed || self.cycles >= MAX_CYCLES {
                    return Stage::Place(Placement::new(state, peak));
                }
                state.phase = Phase::Refine;
                self.last_cycle_peak = Some(peak);
                self.step_len = (self.step_len * 0.5).max(MIN_STEP);
                self.axis_in_cycle = 0;
                self.start_line(state, level);
                self.advance(state)
            }
        }
    }
}

impl SearchAgent for StereoAgent {
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
        let level = percept.and_then(|p| p.level_db);
        let stage = std::mem::replace(
            &mut self.stage,
            Stage::Listen {
                after: After::Orient,
                sum: 0.0,
                n: 0,
            },
        );
        if level.is_none() && !matches!(stage, Stage::Place(_)) {
            // sound is over: go with what we have
            let best = self.best_point(state);
            self.stage = Stage::Place(Placement::new(state, best));
            return None;
        }
        self.stage = match stage {
            Stage::Place(mut pl) => {
                let g = pl.step(state, &self.params, t, dt);
                self.stage = Stage::Place(pl);
                return g;
            }
            Stage::Listen { after, sum, n } => {
                let sum = sum + self.noisy_level(level.unwrap());
                let n = n + 1;
                let needed = if after == After::Orient {
                    ORIENT_SAMPLES
                } else {
                    PROBE_SAMPLES
                };
                if n >= needed {
                    self.measured(state, after, sum / n as f64)
                } else {
                    Stage::Listen { after, sum, n }
                }
            }
            Stage::Walk { to, then } => {
                let d = to - state.head();
                if d.norm() > 1e-9 {
                    state.turn_toward(heading_of(&d), self.params.turn_rate, dt);
                }
                if state.walk_toward(&to, self.params.walk_speed, dt) {
                    Stage::Listen {
                        after: then,
                        sum: 0.0,
                        n: 0,
                    }
                } else {
                    Stage::Walk { to, then }
                }
            }
        };
        state.rest_hands();
        None
    }
}
