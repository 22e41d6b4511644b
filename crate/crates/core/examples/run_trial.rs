//! Runs single trials by hand: the same source rendered by stereo, WFS with
//! a static sub-array and WFS with user-dependent rendering.
//!
//! `cargo run --example run_trial`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wfslab::agent::{AgentParams, AgentState, SearchAgent, StereoAgent, WfsAgent};
use wfslab::calibration::RigidTransform2D;
use wfslab::geometry::{Rect, P2, P3};
use wfslab::listener::{StereoRolloff, WfsCueModel};
use wfslab::session::{
    run_trial, Environment, Movement, Sound, StereoScene, System, TrialRecord, TrialSpec,
    TrialTiming, WfsScene,
};
use wfslab::wavefield::{RenderConfig, RenderMode, SpeakerArray};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let area = Rect::square(P2::origin(), 2.0);
    let array = SpeakerArray::standard(1.6);
    let source = P2::new(0.1, -0.35);
    let params = AgentParams {
        seed: 3,
        ..AgentParams::default()
    };

    for (system, mode) in [
        (System::Stereo, RenderMode::Static),
        (System::Wfs, RenderMode::Static),
        (System::Wfs, RenderMode::UserDependent),
    ] {
        let spec = TrialSpec {
            index: 1,
            block: 1,
            system,
            environment: Environment::Blank,
            sound: Sound::Piano,
            movement: Movement::Static,
            source_start: source,
            source_height: 1.6,
            trajectory: None,
        };
        let mut state = AgentState::new(P3::new(0.0, -0.7, 1.6), 0.0, area.shrink(0.15), area);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let timing = TrialTiming::default();
        let rec: TrialRecord = match system {
            System::Stereo => {
                let mut agent = StereoAgent::new(params, 0);
                let mut scene = StereoScene::new(&spec, StereoRolloff::default());
                run_trial(
                    &spec,
                    &mut agent as &mut dyn SearchAgent,
                    &mut state,
                    &mut scene,
                    &timing,
                    params.hand_dropout,
                    0,
                    &mut rng,
                )?
            }
            System::Wfs => {
                let mut agent = WfsAgent::new(params);
                let mut scene = WfsScene::new(
                    &spec,
                    &array,
                    RigidTransform2D::identity(),
                    mode,
                    RenderConfig::default(),
                    WfsCueModel::Coherent,
                );
                run_trial(
                    &spec,
                    &mut agent as &mut dyn SearchAgent,
                    &mut state,
                    &mut scene,
                    &timing,
                    params.hand_dropout,
                    0,
                    &mut rng,
                )?
            }
        };
        println!(
            "{system} {mode:?}: guess ({:+.2}, {:+.2}) after {:.2} s, score {:.3} m, {} samples",
            rec.result.guess.x,
            rec.result.guess.y,
            rec.result.guess_time,
            rec.result.score,
            rec.samples.len()
        );
    }
    Ok(())
}
