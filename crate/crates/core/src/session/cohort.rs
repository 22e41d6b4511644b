use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::design::{generate_session, PlanGeometry, SessionPlan, System, TrialSpec};
use super::scene::{Scene, StereoScene, WfsScene};
use super::trial::{run_trial, TrialRecord, TrialTiming};
use super::SessionError;
use crate::agent::{AgentParams, AgentState, SearchAgent, StereoAgent, WfsAgent};
use crate::calibration::{sample_misalignment, MisalignmentModel, RigidTransform2D};
use crate::geometry::at_height;
use crate::listener::{StereoRolloff, WfsCueModel};
use crate::logging::{write_session_dir, Demographics, VrExperience};
use crate::wavefield::{build_square_array, RenderConfig, RenderMode, SpeakerArray};

const MISALIGNMENT_SALT: u64 = 0x6d69_7361_6c69_676e;
const TRACKER_SALT: u64 = 0x7472_6163_6b65_7273;

/// Everything one session run needs besides the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub geometry: PlanGeometry,
    pub speakers_per_side: usize,
    /// Heads stay this far inside the walkable square.
    pub body_margin: f64,
    pub render: RenderConfig,
    pub mode: RenderMode,
    pub cue_model: WfsCueModel,
    pub rolloff: StereoRolloff,
    pub misalignment: MisalignmentModel,
    pub agent: AgentParams,
    pub timing: TrialTiming,
    pub tutorial: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            geometry: PlanGeometry::default(),
            speakers_per_side: 16,
            body_margin: 0.15,
            render: RenderConfig::default(),
            mode: RenderMode::Static,
            cue_model: WfsCueModel::Coherent,
            rolloff: StereoRolloff::default(),
            misalignment: MisalignmentModel::default(),
            agent: AgentParams::default(),
            timing: TrialTiming::default(),
            tutorial: false,
        }
    }
}

impl SessionConfig {
    pub fn array(&self) -> Result<SpeakerArray, SessionError> {
        let a = &self.geometry.area;
        if (a.width() - a.height()).abs() > 1e-12 {
            return Err(SessionError::Config("walkable area must be square".into()));
        }
        Ok(build_square_array(
            a.width(),
            self.speakers_per_side,
            self.geometry.height,
            at_height(&a.center(), self.geometry.height),
        )?)
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        self.agent.validate().map_err(SessionError::Config)?;
        let half = self.geometry.area.width().min(self.geometry.area.height()) / 2.0;
        if !(0.0..half).contains(&self.body_margin) {
            return Err(SessionError::Config("body_margin out of range".into()));
        }
        if !(0.0..half).contains(&self.geometry.source_margin) {
            return Err(SessionError::Config("source_margin out of range".into()));
        }
        if !(self.timing.dt > 0.0 && self.timing.guess_timeout >= 0.0) {
            return Err(SessionError::Config("bad trial timing".into()));
        }
        self.array()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub plan: SessionPlan,
    pub misalignment: RigidTransform2D,
    pub trials: Vec<TrialRecord>,
    pub tutorial: Vec<TrialRecord>,
}

impl SessionOutcome {
    pub fn mean_score(&self, system: System) -> Option<f64> {
        let scores: Vec<f64> = self
            .plan
            .trials
            .iter()
            .zip(&self.trials)
            .filter(|(s, _)| s.system == system)
            .map(|(_, r)| r.result.score)
            .collect();
        (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
    }
}

/// Seed of the agent for one trial.
pub fn trial_seed(session_seed: u64, index: usize, tutorial: bool) -> u64 {
    let mut z = session_seed
        ^ (index as u64 + if tutorial { 1 << 32 } else { 0 }).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Runner<'a> {
    cfg: &'a SessionConfig,
    array: &'a SpeakerArray,
    misalignment: RigidTransform2D,
    tracker_rng: ChaCha8Rng,
    tick: u64,
    stereo_done: usize,
}

impl Runner<'_> {
    fn run(&mut self, spec: &TrialSpec, seed: u64) -> Result<TrialRecord, SessionError> {
        let cfg = self.cfg;
        let area = cfg.geometry.area;
        let mut state = AgentState::new(
            at_height(&area.center(), cfg.geometry.height),
            0.0,
            area.shrink(cfg.body_margin),
            area,
        );
        let params = AgentParams { seed, ..cfg.agent };
        let mut scene: Box<dyn Scene + '_> = match spec.system {
            System::Stereo => Box::new(StereoScene::new(spec, cfg.rolloff)),
            System::Wfs => Box::new(WfsScene::new(
                spec,
                self.array,
                self.misalignment,
                cfg.mode,
                cfg.render,
                cfg.cue_model,
            )),
        };
        let mut agent: Box<dyn SearchAgent> = match spec.system {
            System::Stereo => {
                self.stereo_done += 1;
                Box::new(StereoAgent::new(params, self.stereo_done - 1))
            }
            System::Wfs => Box::new(WfsAgent::new(params)),
        };
        let rec = run_trial(
            spec,
            agent.as_mut(),
            &mut state,
            scene.as_mut(),
            &cfg.timing,
            cfg.agent.hand_dropout,
            self.tick,
            &mut self.tracker_rng,
        )?;
        self.tick = rec.end_tick;
        Ok(rec)
    }
}

/// Runs the tutorial (if planned) and all 54 trials, single-threaded.
pub fn run_session(
    plan: &SessionPlan,
    cfg: &SessionConfig,
) -> Result<SessionOutcome, SessionError> {
    cfg.validate()?;
    let array = cfg.array()?;
    let misalignment = sample_misalignment(
        &cfg.misalignment,
        cfg.geometry.area.center(),
        plan.seed ^ MISALIGNMENT_SALT,
    );
    let mut runner = Runner {
        cfg,
        array: &array,
        misalignment,
        tracker_rng: ChaCha8Rng::seed_from_u64(plan.seed ^ TRACKER_SALT),
        tick: 0,
        stereo_done: 0,
    };
    let tutorial = plan
        .tutorial
        .iter()
        .map(|s| runner.run(s, trial_seed(plan.seed, s.index, true)))
        .collect::<Result<Vec<_>, _>>()?;
    // warm-up trials do not count toward learning
    runner.stereo_done = 0;
    let trials = plan
        .trials
        .iter()
        .map(|s| runner.run(s, trial_seed(plan.seed, s.index, false)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SessionOutcome {
        plan: plan.clone(),
        misalignment,
        trials,
        tutorial,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortConfig {
    pub participants: usize,
    /// Participant `i` (0-based) uses `base_seed + i`.
    pub base_seed: u64,
    /// The first this-many participants start with WFS.
    pub wfs_first: usize,
    pub age: u32,
    pub gender: String,
    pub vr_experience: VrExperience,
    pub session: SessionConfig,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            participants: 6,
            base_seed: 1000,
            wfs_first: 4,
            age: 30,
            gender: "unspecified".into(),
            vr_experience: VrExperience::Casual,
            session: SessionConfig::default(),
        }
    }
}

impl CohortConfig {
    pub fn first_system(&self, i: usize) -> System {
        if i < self.wfs_first {
            System::Wfs
        } else {
            System::Stereo
        }
    }

    pub fn seed(&self, i: usize) -> u64 {
        self.base_seed.wrapping_add(i as u64)
    }

    pub fn plan(&self, i: usize) -> Result<SessionPlan, SessionError> {
        generate_session(
            &participant_id(i),
            self.seed(i),
            self.first_system(i),
            &self.session.geometry,
            self.session.tutorial,
        )
    }
}

pub fn participant_id(i: usize) -> String {
    format!("P{:02}", i + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantSummary {
    pub participant: String,
    pub seed: u64,
    pub first_system: System,
    pub dir: PathBuf,
    pub trials: usize,
    pub mean_score_wfs: Option<f64>,
    pub mean_score_stereo: Option<f64>,
}

fn run_participant(
    cfg: &CohortConfig,
    i: usize,
    out_dir: &Path,
) -> Result<ParticipantSummary, SessionError> {
    let plan = cfg.plan(i)?;
    let outcome = run_session(&plan, &cfg.session)?;
    let dir = out_dir.join(format!("{}_{}", plan.participant_id, plan.seed));
    let dems = Demographics {
        participant: plan.participant_id.clone(),
        age: cfg.age,
        gender: cfg.gender.clone(),
        vr_experience: cfg.vr_experience,
    };
    write_session_dir(&plan, &outcome.trials, &outcome.tutorial, &dems, &dir)?;
    Ok(ParticipantSummary {
        participant: plan.participant_id.clone(),
        seed: plan.seed,
        first_system: plan.first_system,
        dir,
        trials: outcome.trials.len(),
        mean_score_wfs: outcome.mean_score(System::Wfs),
        mean_score_stereo: outcome.mean_score(System::Stereo),
    })
}

/// Simulates every participant (in parallel) and writes
/// `<out_dir>/<participant>_<seed>/`. Logs of successful participants are
/// kept even when another participant fails; the first failure is returned.
pub fn run_cohort(
    cfg: &CohortConfig,
    out_dir: &Path,
) -> Result<Vec<ParticipantSummary>, SessionError> {
    if cfg.participants == 0 {
        return Err(SessionError::Config("need at least one participant".into()));
    }
    cfg.session.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let results: Vec<Result<ParticipantSummary, SessionError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.participants)
            .map(|i| scope.spawn(move || run_participant(cfg, i, out_dir)))
            .collect();
        handles
            .into_iter()
            .enumerate()
            .map(|(i, h)| {
                h.join().unwrap_or_else(|_| {
                    Err(SessionError::Config(format!(
                        "participant {} panicked",
                        i + 1
                    )))
                })
            })
            .collect()
    });
    let mut out = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => out.push(s),
            Err(e) => {
                return Err(SessionError::Participant {
                    participant: participant_id(i),
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(out)
}
