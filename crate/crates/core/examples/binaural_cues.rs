//! Interaural cues a listener receives from a WFS focused source and from
//! the headphone stereo renderer, and the bearing read off the ITD.
//!
//! `cargo run --example binaural_cues`

use wfslab::geometry::{angle_between, heading_of, horizontal, P3};
use wfslab::listener::{
    bearing_from_itd, binaural_cues_stereo, binaural_cues_wfs, ListenerState, StereoRolloff,
    WfsCueModel,
};
use wfslab::wavefield::{
    classify_source, driving_functions, RenderConfig, RenderMode, SpeakerArray,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let array = SpeakerArray::standard(1.6);
    let source = P3::new(0.0, 0.0, 1.6);
    let src = classify_source(source, &array);
    let cfg = RenderConfig::default();

    for (x, y) in [(0.0, -0.8), (0.6, 0.5), (-0.7, 0.2)] {
        let head = P3::new(x, y, 1.6);
        let truth = heading_of(&(horizontal(&source) - horizontal(&head)));
        // facing 30° to the left of the source
        let state = ListenerState::new(head, truth + 30f64.to_radians());
        println!(
            "listener at ({x:+.1}, {y:+.1}), true bearing {:+.1}°",
            truth.to_degrees()
        );
        for mode in [RenderMode::Static, RenderMode::UserDependent] {
            let d = driving_functions(&src, &array, Some(&head), mode, &cfg)?;
            let cue = binaural_cues_wfs(&d, &array, &state, WfsCueModel::Coherent)?;
            let est = bearing_from_itd(&cue, &state);
            println!(
                "  WFS {mode:?}: itd {:+.1} µs, ild {:+.2} dB, bearing error {:.1}°",
                cue.itd * 1e6,
                cue.ild,
                angle_between(est.bearing, truth).to_degrees()
            );
        }
        let cue = binaural_cues_stereo(&source, &state, &StereoRolloff::default())?;
        let est = bearing_from_itd(&cue, &state);
        println!(
            "  stereo: itd {:+.1} µs, ild {:+.2} dB, bearing error {:.1}°",
            cue.itd * 1e6,
            cue.ild,
            angle_between(est.bearing, truth).to_degrees()
        );
    }
    Ok(())
}
