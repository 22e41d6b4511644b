use std::f64::consts::PI;

use super::array::{SideId, SpeakerArray, SIDE_COUNT};
use super::field::{ideal_field, synthesize_field, SINGULARITY_RADIUS};
use super::zone::{best_aligned_side, select_subarray};
use super::WavefieldError;
use crate::geometry::{horizontal, P3, SPEED_OF_SOUND};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Exterior,
    Focused,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualSource {
    pub position: P3,
    pub kind: SourceKind,
}

/// Focused iff the horizontal projection lies strictly inside the array square.
pub fn classify_source(position: P3, array: &SpeakerArray) -> VirtualSource {
    let kind = if array.footprint().contains_strict(&horizontal(&position)) {
        SourceKind::Focused
    } else {
        SourceKind::Exterior
    };
    VirtualSource { position, kind }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivingEntry {
    pub active: bool,
    /// Seconds, ≥ 0.
    pub delay: f64,
    pub gain: f64,
}

impl DrivingEntry {
    pub const INACTIVE: DrivingEntry = DrivingEntry {
        active: false,
        delay: 0.0,
        gain: 0.0,
    };
}

/// Per-speaker delay and gain, indexed like [`SpeakerArray::speakers`].
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingSet {
    pub entries: Vec<DrivingEntry>,
    pub reference_point: P3,
}

impl DrivingSet {
    /// Only the speaker nearest to `source` plays, with unit gain and no delay.
    pub fn nearest_speaker(source: &VirtualSource, array: &SpeakerArray) -> Self {
        let idx = array.nearest_speaker(&source.position);
        let mut entries = vec![DrivingEntry::INACTIVE; array.len()];
        entries[idx] = DrivingEntry {
            active: true,
            delay: 0.0,
            gain: 1.0,
        };
        Self {
            entries,
            reference_point: array.center(),
        }
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.active)
            .map(|(i, _)| i)
    }

    pub fn active_count(&self) -> usize {
        self.entries.iter().filter(|e| e.active).count()
    }

    /// Sides with at least one active speaker.
    pub fn active_sides(&self, array: &SpeakerArray) -> Vec<SideId> {
        let mut sides: Vec<SideId> = self
            .active_indices()
            .map(|i| array.speakers()[i].side_id)
            .collect();
        sides.dedup();
        sides.sort_unstable();
        sides.dedup();
        sides
    }

    pub fn scale_gains(&mut self, factor: f64) {
        for e in &mut self.entries {
            e.gain *= factor;
        }
    }

    /// Gain-weighted centroid of the active speakers.
    pub fn active_centroid(&self, array: &SpeakerArray) -> Option<P3> {
        let mut acc = nalgebra::Vector3::zeros();
        let mut w = 0.0;
        for i in self.active_indices() {
            let g = self.entries[i].gain;
            acc += array.speakers()[i].position.coords * g;
            w += g;
        }
        (w > 0.0).then(|| P3::from(acc / w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    /// Listener-agnostic rendering.
    Static,
    /// Listener-tracked sub-array selection plus level normalization.
    UserDependent,
}

/// Sub-array used for focused sources when the listener is not tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticSubarray {
    Fixed(SideId),
    /// The side closest to the source (lowest id on ties).
    NearestToSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub speed_of_sound: f64,
    pub static_subarray: Option<StaticSubarray>,
    /// Half opening angle of a focused source's valid zone.
    pub half_aperture: f64,
    /// Frequency at which user-dependent level normalization is evaluated.
    pub reference_frequency: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            speed_of_sound: SPEED_OF_SOUND,
            static_subarray: Some(StaticSubarray::NearestToSource),
            half_aperture: PI / 3.0,
            reference_frequency: 500.0,
        }
    }
}

/// Half-cosine window weight of speaker `k` in a run of `m` speakers.
///
/// `m / 8` speakers at each end are attenuated; the rest get weight 1.
pub fn edge_taper(m: usize, k: usize) -> f64 {
    let t = m / 8;
    let from_end = k.min(m.saturating_sub(1 + k));
    if from_end < t {
        0.5 * (1.0 - (PI * (from_end + 1) as f64 / (t + 1) as f64).cos())
    } else {
        1.0
    }
}

/// Per-speaker delays and gains realizing `source` on `array`.
pub fn driving_functions(
    source: &VirtualSource,
    array: &SpeakerArray,
    listener: Option<&P3>,
    mode: RenderMode,
    config: &RenderConfig,
) -> Result<DrivingSet, WavefieldError> {
    let mut set = match source.kind {
        SourceKind::Exterior => exterior(source, array, config)?,
        SourceKind::Focused => {
            let side = match mode {
                RenderMode::Static => match config.static_subarray {
                    Some(StaticSubarray::Fixed(side)) if side < SIDE_COUNT => side,
                    Some(StaticSubarray::Fixed(side)) => {
                        return Err(WavefieldError::Configuration(format!(
                            "static sub-array {side} does not exist"
                        )))
                    }
                    Some(StaticSubarray::NearestToSource) => {
                        array.nearest_side(&horizontal(&source.position))
                    }
                    None => {
                        return Err(WavefieldError::Configuration(
                            "focused source in static mode needs a default sub-array".into(),
                        ))
                    }
                },
                RenderMode::UserDependent => {
                    let listener = listener.ok_or_else(|| {
                        WavefieldError::Configuration(
                            "user-dependent rendering of a focused source needs a listener".into(),
                        )
                    })?;
                    match select_subarray(source, listener, array, config.half_aperture) {
                        Ok(side) => side,
                        // outside every cone but not on top of the source
                        Err(WavefieldError::NoValidZone) => {
                            best_aligned_side(source, listener, array, config.half_aperture)?
                        }
                        Err(e) => return Err(e),
                    }
                }
            };
            focused(source, array, side, config)?
        }
    };

    if let (RenderMode::UserDependent, Some(listener)) = (mode, listener) {
        set.reference_point = *listener;
        let f = config.reference_frequency;
        let syn = synthesize_field(&set, array, listener, f, config.speed_of_sound)?;
        let ideal = ideal_field(source, listener, f, config.speed_of_sound)?;
        let syn_mag = syn.pressure.norm();
        if !(syn_mag > 0.0) {
            return Err(WavefieldError::Geometry(
                "synthesized field vanishes at the listener".into(),
            ));
        }
        set.scale_gains(ideal.pressure.norm() / syn_mag);
    }
    Ok(set)
}

fn exterior(
    source: &VirtualSource,
    array: &SpeakerArray,
    config: &RenderConfig,
) -> Result<DrivingSet, WavefieldError> {
    let mut entries = vec![DrivingEntry::INACTIVE; array.len()];
    for (i, spk) in array.speakers().iter().enumerate() {
        let d = spk.position - source.position;
        let r = d.norm();
        if r < SINGULARITY_RADIUS {
            return Err(WavefieldError::Geometry(format!(
                "source coincides with speaker {i}"
            )));
        }
        let cos = d.dot(&spk.inward_normal) / r;
        if cos > 0.0 {
            entries[i] = DrivingEntry {
                active: true,
                delay: r / config.speed_of_sound,
                gain: cos / r.sqrt(),
            };
        }
    }
    apply_side_tapers(&mut entries, array);
    finish(entries, array)
}

fn focused(
    source: &VirtualSource,
    array: &SpeakerArray,
    side: SideId,
    config: &RenderConfig,
) -> Result<DrivingSet, WavefieldError> {
    let mut entries = vec![DrivingEntry::INACTIVE; array.len()];
    let speakers = array.side(side);
    let dists: Vec<f64> = speakers
        .iter()
        .map(|s| (s.position - source.position).norm())
        .collect();
    let r_max = dists.iter().cloned().fold(0.0, f64::max);
    for (spk, &r) in speakers.iter().zip(&dists) {
        if r < SINGULARITY_RADIUS {
            return Err(WavefieldError::Geometry(format!(
                "focused source coincides with speaker {}",
                array.index_of(side, spk.index_on_side)
            )));
        }
        let cos = (source.position - spk.position).dot(&spk.inward_normal) / r;
        if cos <= 0.0 {
            continue;
        }
        entries[array.index_of(side, spk.index_on_side)] = DrivingEntry {
            active: true,
            delay: (r_max - r) / config.speed_of_sound,
            gain: cos / r.sqrt(),
        };
    }
    apply_side_tapers(&mut entries, array);
    finish(entries, array)
}

fn apply_side_tapers(entries: &mut [DrivingEntry], array: &SpeakerArray) {
    let m = array.speakers_per_side();
    for side in 0..SIDE_COUNT {
        let base = array.index_of(side, 0);
        let run: Vec<usize> = (0..m).filter(|&k| entries[base + k].active).collect();
        for (pos, &k) in run.iter().enumerate() {
            entries[base + k].gain *= edge_taper(run.len(), pos);
        }
    }
}

fn finish(entries: Vec<DrivingEntry>, array: &SpeakerArray) -> Result<DrivingSet, WavefieldError> {
    if !entries.iter().any(|e| e.active) {
        return Err(WavefieldError::Geometry(
            "no speaker can render this source".into(),
        ));
    }
    Ok(DrivingSet {
        entries,
        reference_point: array.center(),
    })
}
