//! Model binaural listener: interaural cues, bearing estimation and
//! motion-parallax triangulation.
//!
//! Sign conventions: `itd = t_right − t_left`, so a source on the right gives
//! a negative ITD; `ild = L_right − L_left` in dB. Bearings and yaw are
//! counter-clockwise from north (see [`crate::geometry`]).

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::geometry::{
    angle_between, heading_of, heading_vector, horizontal, wrap_angle, P2, P3, SPEED_OF_SOUND, V2,
};
use crate::wavefield::{
    synthesize_field, DrivingSet, SpeakerArray, WavefieldError, SINGULARITY_RADIUS,
};

pub const DEFAULT_EAR_SEPARATION: f64 = 0.18;

/// Frequencies over which coherent WFS cues are averaged. All lie below the
/// array's alias limit and keep interaural phase unambiguous.
pub const CUE_BAND_HZ: [f64; 5] = [400.0, 500.0, 600.0, 700.0, 800.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ListenerError {
    #[error(transparent)]
    Field(#[from] WavefieldError),
    #[error("ear at {ear:?} coincides with an emitter")]
    Singularity { ear: P3 },
    #[error("no active speaker")]
    NoActiveSpeaker,
    #[error("need at least two observations, got {0}")]
    TooFewObservations(usize),
    #[error("observer baseline {baseline:.3} m below required {required:.3} m")]
    InsufficientBaseline { baseline: f64, required: f64 },
    #[error("bearing rays are parallel (spread {spread_deg:.3}°)")]
    DegenerateParallax { spread_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ListenerState {
    pub head_position: P3,
    /// Facing direction, 0 = north, counter-clockwise positive.
    pub yaw: f64,
    pub ear_separation: f64,
}

impl ListenerState {
    pub fn new(head_position: P3, yaw: f64) -> Self {
        Self {
            head_position,
            yaw,
            ear_separation: DEFAULT_EAR_SEPARATION,
        }
    }

    pub fn max_itd(&self) -> f64 {
        self.ear_separation / SPEED_OF_SOUND
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinauralCue {
    pub itd: f64,
    pub ild: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloffModel {
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoRolloff {
    pub min_distance: f64,
    pub max_distance: f64,
    pub model: RolloffModel,
}

impl Default for StereoRolloff {
    fn default() -> Self {
        Self {
            min_distance: 0.1,
            max_distance: 650.0,
            model: RolloffModel::Logarithmic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationEstimate {
    /// Observer position the estimate is relative to.
    pub origin: P2,
    /// World-frame bearing.
    pub bearing: f64,
    pub distance: Option<f64>,
    pub confidence: f64,
}

impl LocalizationEstimate {
    /// Estimated source point, when a distance is known.
    pub fn point(&self) -> Option<P2> {
        self.distance
            .map(|d| self.origin + heading_vector(self.bearing) * d)
    }
}

/// How interaural cues are read off a multi-speaker WFS field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WfsCueModel {
    /// Interaural phase and level of the superposed field, averaged over
    /// [`CUE_BAND_HZ`].
    #[default]
    Coherent,
    /// First wavefront per ear; levels from incoherent magnitude sums.
    EarliestArrival,
}

/// Left and right ear positions.
pub fn ear_positions(state: &ListenerState) -> (P3, P3) {
    let half = state.ear_separation / 2.0;
    let right = nalgebra::Vector3::new(state.yaw.cos(), state.yaw.sin(), 0.0) * half;
    (state.head_position - right, state.head_position + right)
}

fn clamp_itd(itd: f64, state: &ListenerState) -> f64 {
    let bound = state.max_itd();
    itd.clamp(-bound, bound)
}

pub fn binaural_cues_wfs(
    driving: &DrivingSet,
    array: &SpeakerArray,
    state: &ListenerState,
    model: WfsCueModel,
) -> Result<BinauralCue, ListenerError> {
    if driving.active_count() == 0 {
        return Err(ListenerError::NoActiveSpeaker);
    }
    let (left, right) = ear_positions(state);
    match model {
        WfsCueModel::Coherent => {
            let mut itd = 0.0;
            let mut ild = 0.0;
            for f in CUE_BAND_HZ {
                let pl = synthesize_field(driving, array, &left, f, SPEED_OF_SOUND)
                    .map_err(|e| singular(e, left))?
                    .pressure;
                let pr = synthesize_field(driving, array, &right, f, SPEED_OF_SOUND)
                    .map_err(|e| singular(e, right))?
                    .pressure;
                // p ∝ exp(−iωt): arg(p_r·conj(p_l)) = −ω(t_r − t_l)
                let dphi = (pr * pl.conj()).arg();
                itd += -dphi / (2.0 * std::f64::consts::PI * f);
                if pl.norm() > 0.0 && pr.norm() > 0.0 {
                    ild += 20.0 * (pr.norm() / pl.norm()).log10();
                }
            }
            let n = CUE_BAND_HZ.len() as f64;
            Ok(BinauralCue {
                itd: clamp_itd(itd / n, state),
                ild: ild / n,
            })
        }
        WfsCueModel::EarliestArrival => {
            let ear = |p: &P3| -> Result<(f64, f64), ListenerError> {
                let mut first = f64::INFINITY;
                let mut amp = 0.0;
                for i in driving.active_indices() {
                    let e = &driving.entries[i];
                    let d = (array.speakers()[i].position - p).norm();
                    if d < SINGULARITY_RADIUS {
                        return Err(ListenerError::Singularity { ear: *p });
                    }
                    first = first.min(e.delay + d / SPEED_OF_SOUND);
                    amp += e.gain / d;
                }
                Ok((first, 20.0 * amp.log10()))
            };
            let (tl, ll) = ear(&left)?;
            let (tr, lr) = ear(&right)?;
            Ok(BinauralCue {
                itd: clamp_itd(tr - tl, state),
                ild: lr - ll,
            })
        }
    }
}

fn singular(e: WavefieldError, ear: P3) -> ListenerError {
    match e {
        WavefieldError::Singularity { .. } => ListenerError::Singularity { ear },
        other => ListenerError::Field(other),
    }
}

/// Distance attenuation of the headphone renderer.
pub fn stereo_gain(distance: f64, rolloff: &StereoRolloff) -> f64 {
    let d = distance.max(0.0);
    match rolloff.model {
        RolloffModel::Logarithmic => {
            if d <= rolloff.min_distance {
                1.0
            } else if d <= rolloff.max_distance {
                rolloff.min_distance / d
            } else {
                rolloff.min_distance / rolloff.max_distance
            }
        }
    }
}

/// Level in dB relative to the unattenuated source.
pub fn stereo_level_db(distance: f64, rolloff: &StereoRolloff) -> f64 {
    20.0 * stereo_gain(distance, rolloff).log10()
}

/// Geometric ITD and rolloff-driven ILD; no head shadow or spectral filtering.
pub fn binaural_cues_stereo(
    source: &P3,
    state: &ListenerState,
    rolloff: &StereoRolloff,
) -> Result<BinauralCue, ListenerError> {
    let (left, right) = ear_positions(state);
    let dl = (source - left).norm();
    let dr = (source - right).norm();
    if dl < SINGULARITY_RADIUS {
        return Err(ListenerError::Singularity { ear: left });
    }
    if dr < SINGULARITY_RADIUS {
        return Err(ListenerError::Singularity { ear: right });
    }
    Ok(BinauralCue {
        itd: clamp_itd((dr - dl) / SPEED_OF_SOUND, state),
        ild: stereo_level_db(dr, rolloff) - stereo_level_db(dl, rolloff),
    })
}

/// Lateral angle from ITD, assuming the source is in the frontal hemisphere.
pub fn bearing_from_itd(cue: &BinauralCue, state: &ListenerState) -> LocalizationEstimate {
    let arg = SPEED_OF_SOUND * (-cue.itd) / state.ear_separation;
    let clamped = arg.clamp(-1.0, 1.0);
    let azimuth = clamped.asin();
    LocalizationEstimate {
        origin: horizontal(&state.head_position),
        bearing: wrap_angle(state.yaw - azimuth),
        distance: None,
        confidence: (1.0 - (arg - clamped).abs()).clamp(0.0, 1.0),
    }
}

/// Rays whose directions differ by less than this are treated as parallel.
pub const MIN_RAY_SPREAD: f64 = 0.5 * std::f64::consts::PI / 180.0;

/// Least-squares intersection of horizontal bearing lines.
///
/// The returned estimate is relative to the last observation.
pub fn parallax_triangulate(
    obs: &[(P3, f64)],
    min_baseline: f64,
) -> Result<LocalizationEstimate, ListenerError> {
    if obs.len() < 2 {
        return Err(ListenerError::TooFewObservations(obs.len()));
    }
    let mut baseline: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for (i, (pi, bi)) in obs.iter().enumerate() {
        for (pj, bj) in &obs[i + 1..] {
            baseline = baseline.max((horizontal(pi) - horizontal(pj)).norm());
            // lines, not rays: directions are compared modulo π
            let d = angle_between(*bi, *bj);
            spread = spread.max(d.min(std::f64::consts::PI - d));
        }
    }
    if baseline < min_baseline {
        return Err(ListenerError::InsufficientBaseline {
            baseline,
            required: min_baseline,
        });
    }
    if spread < MIN_RAY_SPREAD {
        return Err(ListenerError::DegenerateParallax {
            spread_deg: spread.to_degrees(),
        });
    }

    let mut a = Matrix2::zeros();
    let mut b = Vector2::zeros();
    for (p, bearing) in obs {
        let d = heading_vector(*bearing);
        let proj = Matrix2::identity() - d * d.transpose();
        a += proj;
        b += proj * horizontal(p).coords;
    }
    let x = a.lu().solve(&b).ok_or(ListenerError::DegenerateParallax {
        spread_deg: spread.to_degrees(),
    })?;
    let point = P2::from(x);

    let rms = (obs
        .iter()
        .map(|(p, bearing)| ray_distance_sq(&point, &horizontal(p), *bearing))
        .sum::<f64>()
        / obs.len() as f64)
        .sqrt();

    let origin = horizontal(&obs[obs.len() - 1].0);
    let to_point: V2 = point - origin;
    Ok(LocalizationEstimate {
        origin,
        bearing: heading_of(&to_point),
        distance: Some(to_point.norm()),
        confidence: 1.0 / (1.0 + rms / 0.05),
    })
}

/// Squared perpendicular distance from `q` to the line through `p` along `bearing`.
pub fn ray_distance_sq(q: &P2, p: &P2, bearing: f64) -> f64 {
    let d = heading_vector(bearing);
    let v = q - p;
    let along = v.dot(&d);
    (v - d * along).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::DrivingEntry;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn single_speaker_set(array: &SpeakerArray, idx: usize) -> DrivingSet {
        let mut entries = vec![DrivingEntry::INACTIVE; array.len()];
        entries[idx] = DrivingEntry {
            active: true,
            delay: 0.003,
            gain: 1.0,
        };
        DrivingSet {
            entries,
            reference_point: array.center(),
        }
    }

    #[test]
    fn ears_straddle_the_head() {
        let s = ListenerState::new(P3::new(0.3, 0.2, 1.6), 0.0);
        let (l, r) = ear_positions(&s);
        assert!((l.x - 0.21).abs() < 1e-12 && (r.x - 0.39).abs() < 1e-12);
        assert_eq!(l.y, 0.2);
        let mid = nalgebra::center(&l, &r);
        assert!((mid - s.head_position).norm() < 1e-15);
        let turned = ListenerState { yaw: PI, ..s };
        let (l2, r2) = ear_positions(&turned);
        assert!((l2.x - r.x).abs() < 1e-12 && (r2.x - l.x).abs() < 1e-12);
    }

    #[test]
    fn stereo_gain_values() {
        let r = StereoRolloff::default();
        assert_eq!(stereo_gain(0.1, &r), 1.0);
        assert!((stereo_gain(1.0, &r) - 0.1).abs() < 1e-15);
        assert!((stereo_gain(1000.0, &r) - 0.1 / 650.0).abs() < 1e-15);
        assert!((stereo_gain(1000.0, &r) - 1.5385e-4).abs() < 1e-8);
        assert_eq!(stereo_gain(0.0, &r), 1.0);
        // continuity at both knees
        assert!((stereo_gain(0.1 + 1e-12, &r) - 1.0).abs() < 1e-9);
        assert!((stereo_gain(650.0 + 1e-9, &r) - stereo_gain(650.0, &r)).abs() < 1e-12);
    }

    #[test]
    fn wfs_single_speaker_ahead_and_right() {
        for model in [WfsCueModel::Coherent, WfsCueModel::EarliestArrival] {
            let a = SpeakerArray::standard(1.6);
            // speaker 8 on the north side sits at x = -0.0625
            let spk = a.side(2)[8].position;
            let ahead = ListenerState::new(P3::new(spk.x, 0.0, 1.6), 0.0);
            let cue =
                binaural_cues_wfs(&single_speaker_set(&a, a.index_of(2, 8)), &a, &ahead, model)
                    .unwrap();
            assert!(cue.itd.abs() < 1e-12, "{model:?}: {}", cue.itd);
            assert!(cue.ild.abs() < 1e-9);

            // east side speaker on the interaural axis, listener facing north
            let east = a.side(1)[8].position;
            let right = ListenerState::new(P3::new(0.2, east.y, 1.6), 0.0);
            let cue =
                binaural_cues_wfs(&single_speaker_set(&a, a.index_of(1, 8)), &a, &right, model)
                    .unwrap();
            assert!(
                (cue.itd + 0.18 / 343.0).abs() < 1e-12,
                "{model:?}: {}",
                cue.itd
            );
            assert!((cue.itd * 1e6 + 524.78).abs() < 0.01);
            assert!(cue.ild > 0.0);
        }
    }

    #[test]
    fn wfs_cues_flip_under_mirroring() {
        let a = SpeakerArray::standard(1.6);
        let s = ListenerState::new(P3::new(0.0, 0.0, 1.6), 0.0);
        // mirror pair across the sagittal plane x = 0: east/west speakers
        let east = a.index_of(1, 10);
        let west = a.index_of(3, 5);
        assert!((a.speakers()[east].position.x + a.speakers()[west].position.x).abs() < 1e-12);
        assert!((a.speakers()[east].position.y - a.speakers()[west].position.y).abs() < 1e-12);
        for model in [WfsCueModel::Coherent, WfsCueModel::EarliestArrival] {
            let ce = binaural_cues_wfs(&single_speaker_set(&a, east), &a, &s, model).unwrap();
            let cw = binaural_cues_wfs(&single_speaker_set(&a, west), &a, &s, model).unwrap();
            assert!((ce.itd + cw.itd).abs() < 1e-12);
            assert!((ce.ild + cw.ild).abs() < 1e-9);
        }
    }

    #[test]
    fn wfs_ear_on_speaker_is_singular() {
        let a = SpeakerArray::standard(1.6);
        let idx = a.index_of(0, 4);
        let p = a.speakers()[idx].position;
        let s = ListenerState::new(P3::new(p.x + 0.09, p.y, p.z), 0.0);
        for model in [WfsCueModel::Coherent, WfsCueModel::EarliestArrival] {
            assert!(matches!(
                binaural_cues_wfs(&single_speaker_set(&a, idx), &a, &s, model),
                Err(ListenerError::Singularity { .. })
            ));
        }
    }

    #[test]
    fn stereo_cues_symmetry() {
        let r = StereoRolloff::default();
        let s = ListenerState::new(P3::new(0.0, 0.0, 1.6), 0.0);
        let c = binaural_cues_stereo(&P3::new(0.0, 1.0, 1.6), &s, &r).unwrap();
        assert_eq!(c.itd, 0.0);
        assert_eq!(c.ild, 0.0);

        let near_right = P3::new(0.09, 0.01, 1.6);
        let c = binaural_cues_stereo(&near_right, &s, &r).unwrap();
        assert!(c.ild > 0.0 && c.itd < 0.0);

        let turned = ListenerState { yaw: PI, ..s };
        let c2 = binaural_cues_stereo(&near_right, &turned, &r).unwrap();
        assert!((c.itd + c2.itd).abs() < 1e-15);
        assert!((c.ild + c2.ild).abs() < 1e-12);
    }

    #[test]
    fn bearing_examples() {
        let s = ListenerState::new(P3::origin(), 0.4);
        let b = bearing_from_itd(&BinauralCue { itd: 0.0, ild: 0.0 }, &s);
        assert!((b.bearing - 0.4).abs() < 1e-15);
        assert_eq!(b.confidence, 1.0);
        assert!(b.distance.is_none());

        let hard = BinauralCue {
            itd: -s.ear_separation / SPEED_OF_SOUND,
            ild: 0.0,
        };
        let b = bearing_from_itd(&hard, &s);
        assert!((b.bearing - (0.4 - FRAC_PI_2)).abs() < 1e-7);

        let over = BinauralCue {
            itd: -1e-3,
            ild: 0.0,
        };
        let b = bearing_from_itd(&over, &s);
        assert!(b.bearing.is_finite());
        assert!(b.confidence < 1.0 && b.confidence >= 0.0);
    }

    #[test]
    fn parallax_exact_intersection() {
        let a = (P3::new(-0.5, 0.0, 1.6), heading_of(&V2::new(0.5, 1.0)));
        let b = (P3::new(0.5, 0.0, 1.6), heading_of(&V2::new(-0.5, 1.0)));
        let est = parallax_triangulate(&[a, b], 0.2).unwrap();
        let p = est.point().unwrap();
        assert!((p - P2::new(0.0, 1.0)).norm() < 1e-9);
        assert!(est.confidence > 0.999);
    }

    #[test]
    fn parallax_errors() {
        let same = (P3::new(0.0, 0.0, 0.0), 0.3);
        let further = (P3::new(-(0.3f64.sin()), 0.3f64.cos(), 0.0), 0.3);
        assert!(matches!(
            parallax_triangulate(&[same, further], 0.1),
            Err(ListenerError::DegenerateParallax { .. })
        ));
        assert!(matches!(
            parallax_triangulate(&[same], 0.1),
            Err(ListenerError::TooFewObservations(1))
        ));
        let close = (P3::new(0.01, 0.0, 0.0), 1.0);
        assert!(matches!(
            parallax_triangulate(&[same, close], 0.5),
            Err(ListenerError::InsufficientBaseline { .. })
        ));
    }
}
