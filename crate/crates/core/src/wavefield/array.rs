use nalgebra::Vector3;

use super::WavefieldError;
use crate::geometry::{horizontal, Rect, P2, P3};

/// Side index of the square array: 0 south, 1 east, 2 north, 3 west.
pub type SideId = usize;

pub const SIDE_COUNT: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Speaker {
    pub position: P3,
    pub inward_normal: Vector3<f64>,
    pub side_id: SideId,
    pub index_on_side: usize,
}

/// Square loudspeaker array: four linear sub-arrays at a common height.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerArray {
    speakers: Vec<Speaker>,
    side_length: f64,
    speakers_per_side: usize,
    height: f64,
    center: P3,
}

impl SpeakerArray {
    /// The laboratory geometry: 2 m square, 16 speakers per side, head height.
    pub fn standard(height: f64) -> Self {
        build_square_array(2.0, 16, height, P3::new(0.0, 0.0, height))
            .expect("standard geometry is valid")
    }

    pub fn speakers(&self) -> &[Speaker] {
        &self.speakers
    }

    pub fn len(&self) -> usize {
        self.speakers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speakers.is_empty()
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn speakers_per_side(&self) -> usize {
        self.speakers_per_side
    }

    pub fn spacing(&self) -> f64 {
        self.side_length / self.speakers_per_side as f64
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn center(&self) -> P3 {
        self.center
    }

    /// Horizontal footprint bounded by the four sides.
    pub fn footprint(&self) -> Rect {
        Rect::square(horizontal(&self.center), self.side_length)
    }

    /// Speakers of one side, in counter-clockwise order.
    pub fn side(&self, side: SideId) -> &[Speaker] {
        let n = self.speakers_per_side;
        &self.speakers[side * n..(side + 1) * n]
    }

    /// Global index of a speaker.
    pub fn index_of(&self, side: SideId, index_on_side: usize) -> usize {
        side * self.speakers_per_side + index_on_side
    }

    /// Midpoint of a side, at array height.
    pub fn side_midpoint(&self, side: SideId) -> P3 {
        let (normal, _) = side_frame(side);
        let h = self.side_length / 2.0;
        P3::new(
            self.center.x - normal.0 * h,
            self.center.y - normal.1 * h,
            self.height,
        )
    }

    pub fn side_normal(&self, side: SideId) -> Vector3<f64> {
        let (n, _) = side_frame(side);
        Vector3::new(n.0, n.1, 0.0)
    }

    /// Upper bound for alias-free synthesis, `c / (2·spacing)`.
    pub fn aliasing_frequency(&self, speed_of_sound: f64) -> f64 {
        speed_of_sound / (2.0 * self.spacing())
    }

    /// Index of the speaker nearest to `p`.
    pub fn nearest_speaker(&self, p: &P3) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, s) in self.speakers.iter().enumerate() {
            let d = (s.position - p).norm();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Side whose line is closest to a horizontal point (lowest id on ties).
    pub fn nearest_side(&self, p: &P2) -> SideId {
        let fp = self.footprint();
        let dists = [
            p.y - fp.min.y,
            fp.max.x - p.x,
            fp.max.y - p.y,
            p.x - fp.min.x,
        ];
        let mut best = 0;
        for (side, d) in dists.iter().enumerate() {
            if *d < dists[best] {
                best = side;
            }
        }
        best
    }
}

/// (inward normal, counter-clockwise tangent) of a side.
fn side_frame(side: SideId) -> ((f64, f64), (f64, f64)) {
    match side {
        0 => ((0.0, 1.0), (1.0, 0.0)),
        1 => ((-1.0, 0.0), (0.0, 1.0)),
        2 => ((0.0, -1.0), (-1.0, 0.0)),
        _ => ((1.0, 0.0), (0.0, -1.0)),
    }
}

/// Builds a square array of four evenly spaced linear sub-arrays.
pub fn build_square_array(
    side_length: f64,
    speakers_per_side: usize,
    height: f64,
    center: P3,
) -> Result<SpeakerArray, WavefieldError> {
    if !(side_length > 0.0) || !side_length.is_finite() {
        return Err(WavefieldError::InvalidArgument(format!(
            "side length must be positive, got {side_length}"
        )));
    }
    if speakers_per_side < 2 {
        return Err(WavefieldError::InvalidArgument(format!(
            "need at least 2 speakers per side, got {speakers_per_side}"
        )));
    }
    if !height.is_finite() || !center.iter().all(|c| c.is_finite()) {
        return Err(WavefieldError::InvalidArgument(
            "array position must be finite".into(),
        ));
    }
    let spacing = side_length / speakers_per_side as f64;
    let half = side_length / 2.0;
    let mut speakers = Vec::with_capacity(SIDE_COUNT * speakers_per_side);
    for side in 0..SIDE_COUNT {
        let (n, t) = side_frame(side);
        let mid = (center.x - n.0 * half, center.y - n.1 * half);
        for i in 0..speakers_per_side {
            let off = (i as f64 + 0.5) * spacing - half;
            speakers.push(Speaker {
                position: P3::new(mid.0 + t.0 * off, mid.1 + t.1 * off, height),
                inward_normal: Vector3::new(n.0, n.1, 0.0),
                side_id: side,
                index_on_side: i,
            });
        }
    }
    Ok(SpeakerArray {
        speakers,
        side_length,
        speakers_per_side,
        height,
        center: P3::new(center.x, center.y, height),
    })
}
