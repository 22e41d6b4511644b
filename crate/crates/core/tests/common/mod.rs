#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wfslab::agent::{AgentParams, AgentState, SearchAgent, StereoAgent, WfsAgent};
use wfslab::analysis::ScoreGrid;
use wfslab::calibration::RigidTransform2D;
use wfslab::geometry::{Rect, P2, P3};
use wfslab::listener::{StereoRolloff, WfsCueModel};
use wfslab::logging::LoadedSession;
use wfslab::session::{
    run_trial, Environment, Movement, Sound, StereoScene, System, TrialRecord, TrialSpec,
    TrialTiming, WfsScene,
};
use wfslab::wavefield::{RenderConfig, RenderMode, SpeakerArray};

/// Every file under `root`, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

/// Guesses of `system` within `band` of the square's edge.
pub fn border_mass(sessions: &[LoadedSession], system: System, band: f64) -> usize {
    let square = Rect::square(P2::origin(), 2.0);
    sessions
        .iter()
        .flat_map(|s| &s.trials)
        .filter(|t| t.row.system == system)
        .filter(|t| square.distance_to_edge(&t.row.guess_xy()) < band)
        .count()
}

/// The same count read off a density grid: cells whose centre lies in the band.
pub fn grid_border_mass(g: &ScoreGrid, band: f64) -> f64 {
    let mut m = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            if g.bounds.distance_to_edge(&g.cell_center(i, j)) < band {
                m += g.get(i, j);
            }
        }
    }
    m
}

const H: f64 = 1.6;

pub fn area() -> Rect {
    Rect::square(P2::origin(), 2.0)
}

pub fn spec(system: System, source: P2) -> TrialSpec {
    TrialSpec {
        index: 1,
        block: 1,
        system,
        environment: Environment::Blank,
        sound: Sound::Telephone,
        movement: Movement::Static,
        source_start: source,
        source_height: H,
        trajectory: None,
    }
}

/// One static trial with the agent spawned at `start`, facing north.
pub fn run_trial_at(
    system: System,
    source: P2,
    start: P2,
    mode: RenderMode,
    params: AgentParams,
) -> (TrialSpec, TrialRecord) {
    let s = spec(system, source);
    let array = SpeakerArray::standard(H);
    let mut state = AgentState::new(
        P3::new(start.x, start.y, H),
        0.0,
        area().shrink(0.15),
        area(),
    );
    let mut agent: Box<dyn SearchAgent> = match system {
        System::Stereo => Box::new(StereoAgent::new(params, 0)),
        System::Wfs => Box::new(WfsAgent::new(params)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x55);
    let rec = match system {
        System::Stereo => {
            let mut scene = StereoScene::new(&s, StereoRolloff::default());
            run_trial(
                &s,
                agent.as_mut(),
                &mut state,
                &mut scene,
                &TrialTiming::default(),
                params.hand_dropout,
                0,
                &mut rng,
            )
        }
        System::Wfs => {
            let mut scene = WfsScene::new(
                &s,
                &array,
                RigidTransform2D::identity(),
                mode,
                RenderConfig::default(),
                WfsCueModel::Coherent,
            );
            run_trial(
                &s,
                agent.as_mut(),
                &mut state,
                &mut scene,
                &TrialTiming::default(),
                params.hand_dropout,
                0,
                &mut rng,
            )
        }
    }
    .unwrap();
    (s, rec)
}

pub fn quiet(seed: u64) -> AgentParams {
    AgentParams {
        seed,
        ..AgentParams::default().noiseless()
    }
}
