//! Alignment between the virtual room and the loudspeaker room.
//!
//! A transform first translates, then rotates about `center`:
//! `apply(p) = center + R(rotation)·(p + translation − center)`.

use nalgebra::Rotation2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{P2, V2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform2D {
    pub center: P2,
    pub rotation: f64,
    pub translation: V2,
}

impl RigidTransform2D {
    pub fn identity() -> Self {
        Self {
            center: P2::origin(),
            rotation: 0.0,
            translation: V2::zeros(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation == 0.0 && self.translation == V2::zeros()
    }

    pub fn apply(&self, p: &P2) -> P2 {
        let shifted = p + self.translation;
        self.center + Rotation2::new(self.rotation) * (shifted - self.center)
    }

    /// Inverse transform, expressed in the same parameterization.
    pub fn invert(&self) -> Self {
        // p = R⁻¹(q − c) + c − t  =  c' + R⁻¹(q + t' − c')  with c' = c, t' = −R·t
        let t_inv = -(Rotation2::new(self.rotation) * self.translation);
        Self {
            center: self.center,
            rotation: -self.rotation,
            translation: t_inv,
        }
    }
}

/// First calibration step: move the virtual centre onto the real centre.
pub fn align_centers(real_center: P2, virtual_center: P2) -> RigidTransform2D {
    RigidTransform2D {
        center: real_center,
        rotation: 0.0,
        translation: real_center - virtual_center,
    }
}

/// Second step: rotate about the (aligned) centre.
pub fn set_rotation(t: &RigidTransform2D, theta: f64) -> RigidTransform2D {
    RigidTransform2D {
        rotation: t.rotation + theta,
        ..*t
    }
}

/// Residual calibration error, drawn once per session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisalignmentModel {
    pub sigma_translation: f64,
    pub sigma_rotation: f64,
}

impl Default for MisalignmentModel {
    fn default() -> Self {
        Self {
            sigma_translation: 0.02,
            sigma_rotation: 1f64.to_radians(),
        }
    }
}

impl MisalignmentModel {
    pub fn none() -> Self {
        Self {
            sigma_translation: 0.0,
            sigma_rotation: 0.0,
        }
    }
}

/// Samples a transform about `center`; deterministic per seed.
pub fn sample_misalignment(model: &MisalignmentModel, center: P2, seed: u64) -> RigidTransform2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, sigma: f64| {
        if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
        } else {
            0.0
        }
    };
    let tx = draw(&mut rng, model.sigma_translation);
    let ty = draw(&mut rng, model.sigma_translation);
    let rotation = draw(&mut rng, model.sigma_rotation);
    RigidTransform2D {
        center,
        rotation,
        translation: V2::new(tx, ty),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn align_identical_centers_is_identity() {
        let t = align_centers(P2::new(0.3, 0.4), P2::new(0.3, 0.4));
        assert!(t.is_identity());
        let p = P2::new(-1.0, 2.5);
        assert_eq!(t.apply(&p), p);
    }

    #[test]
    fn align_maps_virtual_center_onto_real() {
        let t = align_centers(P2::new(1.0, 2.0), P2::origin());
        assert_eq!(t.translation, V2::new(1.0, 2.0));
        assert_eq!(t.apply(&P2::origin()), P2::new(1.0, 2.0));
    }

    #[test]
    fn quarter_turn_about_center() {
        let t = set_rotation(
            &align_centers(P2::new(1.0, 1.0), P2::new(1.0, 1.0)),
            FRAC_PI_2,
        );
        let q = t.apply(&P2::new(2.0, 1.0));
        assert!((q - P2::new(1.0, 2.0)).norm() < 1e-12);
        let same = set_rotation(&t, 0.0);
        assert_eq!(same, t);
    }

    #[test]
    fn rotation_preserves_distance_to_center() {
        let t = set_rotation(&align_centers(P2::new(0.5, -0.5), P2::new(0.2, 0.1)), 0.7);
        let p = P2::new(1.3, 0.4);
        let before = (p + t.translation - t.center).norm();
        assert!(((t.apply(&p) - t.center).norm() - before).abs() < 1e-12);
    }

    #[test]
    fn misalignment_sampling() {
        let t = sample_misalignment(&MisalignmentModel::none(), P2::origin(), 5);
        assert!(t.is_identity());
        let m = MisalignmentModel::default();
        assert_eq!(
            sample_misalignment(&m, P2::origin(), 11),
            sample_misalignment(&m, P2::origin(), 11)
        );
        assert_ne!(
            sample_misalignment(&m, P2::origin(), 11),
            sample_misalignment(&m, P2::origin(), 12)
        );
    }
}
