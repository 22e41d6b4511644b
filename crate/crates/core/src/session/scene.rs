//! What the listener hears during a trial, per renderer.

use crate::agent::Percept;
use crate::calibration::RigidTransform2D;
use crate::geometry::{at_height, P2};
use crate::listener::{
    binaural_cues_stereo, binaural_cues_wfs, stereo_level_db, BinauralCue, ListenerState,
    StereoRolloff, WfsCueModel,
};
use crate::wavefield::{
    classify_source, driving_functions, DrivingSet, RenderConfig, RenderMode, SpeakerArray,
};

use super::design::TrialSpec;

/// Sound field as experienced by a listener; `t` is seconds since onset.
pub trait Scene {
    fn percept(&mut self, listener: &ListenerState, t: f64) -> Percept;

    /// Where the renderer places the source at `t`.
    fn rendered_position(&self, t: f64) -> P2;
}

/// Headphone rendering: geometric ITD plus distance rolloff per ear.
#[derive(Debug, Clone)]
pub struct StereoScene {
    spec: TrialSpec,
    rolloff: StereoRolloff,
}

impl StereoScene {
    pub fn new(spec: &TrialSpec, rolloff: StereoRolloff) -> Self {
        Self {
            spec: spec.clone(),
            rolloff,
        }
    }
}

impl Scene for StereoScene {
    fn percept(&mut self, listener: &ListenerState, t: f64) -> Percept {
        let src = at_height(&self.spec.source_at(t), self.spec.source_height);
        // an ear inside the source: loudest possible, no lateral cue
        let cue = binaural_cues_stereo(&src, listener, &self.rolloff)
            .unwrap_or(BinauralCue { itd: 0.0, ild: 0.0 });
        let d = (src - listener.head_position).norm();
        Percept {
            cue,
            level_db: Some(stereo_level_db(d, &self.rolloff)),
        }
    }

    fn rendered_position(&self, t: f64) -> P2 {
        self.spec.source_at(t)
    }
}

/// Loudspeaker rendering of the (possibly misaligned) source.
#[derive(Debug, Clone)]
pub struct WfsScene<'a> {
    spec: TrialSpec,
    array: &'a SpeakerArray,
    transform: RigidTransform2D,
    mode: RenderMode,
    render: RenderConfig,
    cue_model: WfsCueModel,
    cached: Option<(P2, DrivingSet)>,
    last_cue: BinauralCue,
}

impl<'a> WfsScene<'a> {
    pub fn new(
        spec: &TrialSpec,
        array: &'a SpeakerArray,
        transform: RigidTransform2D,
        mode: RenderMode,
        render: RenderConfig,
        cue_model: WfsCueModel,
    ) -> Self {
        Self {
            spec: spec.clone(),
            array,
            transform,
            mode,
            render,
            cue_model,
            cached: None,
            last_cue: BinauralCue { itd: 0.0, ild: 0.0 },
        }
    }

    fn driving(&mut self, rendered: P2, listener: &ListenerState) -> Option<&DrivingSet> {
        let reuse = self.mode == RenderMode::Static
            && self.cached.as_ref().is_some_and(|(p, _)| *p == rendered);
        if !reuse {
            let src = classify_source(at_height(&rendered, self.spec.source_height), self.array);
            let head = listener.head_position;
            match driving_functions(&src, self.array, Some(&head), self.mode, &self.render) {
                Ok(d) => self.cached = Some((rendered, d)),
                // e.g. listener on top of a focused source: keep the last rendering
                Err(_) if self.cached.is_some() => {}
                Err(_) => return None,
            }
        }
        self.cached.as_ref().map(|(_, d)| d)
    }
}

impl Scene for WfsScene<'_> {
    fn percept(&mut self, listener: &ListenerState, t: f64) -> Percept {
        let rendered = self.rendered_position(t);
        let cue_model = self.cue_model;
        let array = self.array;
        let cue = self
            .driving(rendered, listener)
            .and_then(|d| binaural_cues_wfs(d, array, listener, cue_model).ok())
            .unwrap_or(self.last_cue);
        self.last_cue = cue;
        Percept {
            cue,
            level_db: None,
        }
    }

    fn rendered_position(&self, t: f64) -> P2 {
        self.transform.apply(&self.spec.source_at(t))
    }
}
