use super::array::{SideId, SpeakerArray, SIDE_COUNT};
use super::driving::{SourceKind, VirtualSource};
use super::WavefieldError;
use crate::geometry::{horizontal, P2, P3, V2};

/// Listeners closer than this to a focused source have no usable zone.
const MIN_LISTENER_DISTANCE: f64 = 0.01;

/// Cone beyond a focused source in which its rendering is valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidZone {
    pub apex: P3,
    /// Horizontal propagation direction, away from the rendering sub-array.
    pub direction: V2,
    pub half_aperture: f64,
}

impl ValidZone {
    pub fn contains(&self, q: &P3) -> bool {
        let v = horizontal(q) - horizontal(&self.apex);
        let along = v.dot(&self.direction);
        if along <= 0.0 {
            return false;
        }
        let cos = (along / v.norm()).clamp(-1.0, 1.0);
        cos.acos() <= self.half_aperture
    }
}

pub fn valid_zone(
    source: &VirtualSource,
    subarray_side: SideId,
    array: &SpeakerArray,
    half_aperture: f64,
) -> Result<ValidZone, WavefieldError> {
    if source.kind != SourceKind::Focused {
        return Err(WavefieldError::InvalidArgument(
            "valid zones exist only for focused sources".into(),
        ));
    }
    if subarray_side >= SIDE_COUNT {
        return Err(WavefieldError::InvalidArgument(format!(
            "side {subarray_side} does not exist"
        )));
    }
    if !(half_aperture > 0.0 && half_aperture <= std::f64::consts::FRAC_PI_2) {
        return Err(WavefieldError::InvalidArgument(format!(
            "half aperture {half_aperture} outside (0, π/2]"
        )));
    }
    let mid: P2 = horizontal(&array.side_midpoint(subarray_side));
    let dir = horizontal(&source.position) - mid;
    let norm = dir.norm();
    if norm == 0.0 {
        return Err(WavefieldError::Geometry(
            "source lies on the sub-array midpoint".into(),
        ));
    }
    Ok(ValidZone {
        apex: source.position,
        direction: dir / norm,
        half_aperture,
    })
}

/// Picks the sub-array whose valid zone holds the listener, preferring the
/// zone direction closest to the source→listener direction.
pub fn select_subarray(
    source: &VirtualSource,
    listener: &P3,
    array: &SpeakerArray,
    half_aperture: f64,
) -> Result<SideId, WavefieldError> {
    if source.kind != SourceKind::Focused {
        return Err(WavefieldError::InvalidArgument(
            "sub-array selection applies to focused sources".into(),
        ));
    }
    best_side(source, listener, array, half_aperture, true)?.ok_or(WavefieldError::NoValidZone)
}

/// Side whose zone direction best matches the source→listener direction,
/// ignoring zone membership. Used when the listener is outside every zone.
pub fn best_aligned_side(
    source: &VirtualSource,
    listener: &P3,
    array: &SpeakerArray,
    half_aperture: f64,
) -> Result<SideId, WavefieldError> {
    best_side(source, listener, array, half_aperture, false)?.ok_or(WavefieldError::NoValidZone)
}

fn best_side(
    source: &VirtualSource,
    listener: &P3,
    array: &SpeakerArray,
    half_aperture: f64,
    require_inside: bool,
) -> Result<Option<SideId>, WavefieldError> {
    let offset = horizontal(listener) - horizontal(&source.position);
    if offset.norm() < MIN_LISTENER_DISTANCE {
        return Err(WavefieldError::NoValidZone);
    }
    let offset = offset.normalize();
    let mut best: Option<(SideId, f64)> = None;
    for side in 0..SIDE_COUNT {
        let zone = valid_zone(source, side, array, half_aperture)?;
        if require_inside && !zone.contains(listener) {
            continue;
        }
        let alignment = zone.direction.dot(&offset);
        if best.is_none_or(|(_, a)| alignment > a) {
            best = Some((side, alignment));
        }
    }
    Ok(best.map(|(s, _)| s))
}
