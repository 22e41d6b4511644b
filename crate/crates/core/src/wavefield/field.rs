use num_complex::Complex64;
use std::f64::consts::PI;

use super::array::SpeakerArray;
use super::driving::{DrivingSet, VirtualSource};
use super::WavefieldError;
use crate::geometry::{horizontal, Rect, P3};

/// Evaluation points closer than this to an emitter are rejected (1 mm).
pub const SINGULARITY_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: P3,
    pub pressure: Complex64,
}

/// Complex pressure of the superposed speaker contributions at `point`.
pub fn synthesize_field(
    driving: &DrivingSet,
    array: &SpeakerArray,
    point: &P3,
    frequency: f64,
    speed_of_sound: f64,
) -> Result<FieldSample, WavefieldError> {
    check_frequency(frequency)?;
    let omega = 2.0 * PI * frequency;
    let mut pressure = Complex64::new(0.0, 0.0);
    for (i, (spk, e)) in array.speakers().iter().zip(&driving.entries).enumerate() {
        if !e.active {
            continue;
        }
        let r = (point - spk.position).norm();
        if r < SINGULARITY_RADIUS {
            return Err(WavefieldError::Singularity {
                point: *point,
                speaker: i,
                distance: r,
            });
        }
        let phase = -omega * (e.delay + r / speed_of_sound);
        pressure += Complex64::from_polar(e.gain / r, phase);
    }
    Ok(FieldSample {
        point: *point,
        pressure,
    })
}

/// Free-field point source, `exp(−i·2πf·r/c)/r`.
pub fn ideal_field(
    source: &VirtualSource,
    point: &P3,
    frequency: f64,
    speed_of_sound: f64,
) -> Result<FieldSample, WavefieldError> {
    check_frequency(frequency)?;
    let r = (point - source.position).norm();
    if r < SINGULARITY_RADIUS {
        return Err(WavefieldError::Singularity {
            point: *point,
            speaker: usize::MAX,
            distance: r,
        });
    }
    let phase = -2.0 * PI * frequency * r / speed_of_sound;
    Ok(FieldSample {
        point: *point,
        pressure: Complex64::from_polar(1.0 / r, phase),
    })
}

fn check_frequency(f: f64) -> Result<(), WavefieldError> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(WavefieldError::InvalidArgument(format!(
            "frequency must be positive, got {f}"
        )))
    }
}

/// Cell-centred `nx × ny` grid over `bounds` at height `z`, row-major in y.
pub fn grid_points(bounds: &Rect, nx: usize, ny: usize, z: f64) -> Vec<P3> {
    let dx = bounds.width() / nx as f64;
    let dy = bounds.height() / ny as f64;
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            pts.push(P3::new(
                bounds.min.x + (i as f64 + 0.5) * dx,
                bounds.min.y + (j as f64 + 0.5) * dy,
                z,
            ));
        }
    }
    pts
}

pub(super) struct Fit {
    pub syn: Vec<Complex64>,
    pub ideal: Vec<Complex64>,
    pub scale: Complex64,
    pub ideal_energy: f64,
}

pub(super) fn fit_scale(
    source: &VirtualSource,
    array: &SpeakerArray,
    driving: &DrivingSet,
    zone: &[P3],
    frequency: f64,
    speed_of_sound: f64,
) -> Result<Fit, WavefieldError> {
    if zone.is_empty() {
        return Err(WavefieldError::InvalidArgument(
            "empty evaluation zone".into(),
        ));
    }
    let fp = array.footprint();
    let mut syn = Vec::with_capacity(zone.len());
    let mut ideal = Vec::with_capacity(zone.len());
    for p in zone {
        if !fp.contains_strict(&horizontal(p)) {
            return Err(WavefieldError::InvalidArgument(format!(
                "zone point {p:?} lies outside the array"
            )));
        }
        syn.push(synthesize_field(driving, array, p, frequency, speed_of_sound)?.pressure);
        ideal.push(ideal_field(source, p, frequency, speed_of_sound)?.pressure);
    }
    let ideal_energy: f64 = ideal.iter().map(|p| p.norm_sqr()).sum();
    if !(ideal_energy > 0.0) {
        return Err(WavefieldError::DegenerateInput(
            "ideal field is zero on the zone".into(),
        ));
    }
    let syn_energy: f64 = syn.iter().map(|p| p.norm_sqr()).sum();
    // argmin_a Σ|a·s − p|² = Σ conj(s)·p / Σ|s|²
    let scale = if syn_energy > 0.0 {
        syn.iter()
            .zip(&ideal)
            .map(|(s, p)| s.conj() * p)
            .sum::<Complex64>()
            / syn_energy
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(Fit {
        syn,
        ideal,
        scale,
        ideal_energy,
    })
}

/// Normalized RMS mismatch between synthesized and ideal fields over `zone`,
/// after the best single complex rescaling of the synthesized field.
pub fn reconstruction_error(
    source: &VirtualSource,
    array: &SpeakerArray,
    driving: &DrivingSet,
    zone: &[P3],
    frequency: f64,
    speed_of_sound: f64,
) -> Result<f64, WavefieldError> {
    let fit = fit_scale(source, array, driving, zone, frequency, speed_of_sound)?;
    let residual: f64 = fit
        .syn
        .iter()
        .zip(&fit.ideal)
        .map(|(s, p)| (fit.scale * s - p).norm_sqr())
        .sum();
    Ok((residual / fit.ideal_energy).sqrt().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{P2, SPEED_OF_SOUND};
    use crate::wavefield::{
        build_square_array, classify_source, driving_functions, DrivingEntry, RenderMode,
    };

    const C: f64 = SPEED_OF_SOUND;

    fn single(array: &SpeakerArray, idx: usize, gain: f64) -> DrivingSet {
        let mut entries = vec![DrivingEntry::INACTIVE; array.len()];
        entries[idx] = DrivingEntry {
            active: true,
            delay: 0.0,
            gain,
        };
        DrivingSet {
            entries,
            reference_point: array.center(),
        }
    }

    #[test]
    fn single_speaker_at_one_metre() {
        let a = SpeakerArray::standard(0.0);
        let d = single(&a, 0, 1.0);
        let p = a.speakers()[0].position + nalgebra::Vector3::new(0.0, 1.0, 0.0);
        let s = synthesize_field(&d, &a, &p, 440.0, C).unwrap();
        assert!((s.pressure.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_gains_doubles_pressure() {
        let a = SpeakerArray::standard(0.0);
        let src = classify_source(P3::new(0.3, -1.7, 0.0), &a);
        let d = driving_functions(&src, &a, None, RenderMode::Static, &Default::default()).unwrap();
        let mut d2 = d.clone();
        d2.scale_gains(2.0);
        for p in grid_points(&Rect::square(P2::origin(), 1.5), 5, 5, 0.0) {
            let one = synthesize_field(&d, &a, &p, 700.0, C).unwrap().pressure;
            let two = synthesize_field(&d2, &a, &p, 700.0, C).unwrap().pressure;
            assert!((two - one * 2.0).norm() <= 1e-12 * two.norm());
        }
    }

    #[test]
    fn symmetric_pair_sums_coherently() {
        let a = build_square_array(2.0, 2, 0.0, P3::origin()).unwrap();
        // both south speakers, observed from the y axis
        let mut d = single(&a, 0, 1.0);
        d.entries[1] = d.entries[0];
        let p = P3::new(0.0, 0.4, 0.0);
        let both = synthesize_field(&d, &a, &p, 300.0, C).unwrap().pressure;
        let one = synthesize_field(&single(&a, 0, 1.0), &a, &p, 300.0, C)
            .unwrap()
            .pressure;
        let other = synthesize_field(&single(&a, 1, 1.0), &a, &p, 300.0, C)
            .unwrap()
            .pressure;
        assert!((one.arg() - other.arg()).abs() < 1e-12);
        assert!((both - one * 2.0).norm() < 1e-12);
    }

    #[test]
    fn singularity_guard() {
        let a = SpeakerArray::standard(0.0);
        let d = single(&a, 3, 1.0);
        let p = a.speakers()[3].position + nalgebra::Vector3::new(0.0005, 0.0, 0.0);
        assert!(matches!(
            synthesize_field(&d, &a, &p, 500.0, C),
            Err(WavefieldError::Singularity { speaker: 3, .. })
        ));
        // inactive speakers are not singular
        let d = single(&a, 4, 1.0);
        assert!(synthesize_field(&d, &a, &p, 500.0, C).is_ok());
        assert!(synthesize_field(&d, &a, &P3::origin(), 0.0, C).is_err());
    }

    #[test]
    fn ideal_field_values() {
        let src = VirtualSource {
            position: P3::origin(),
            kind: crate::wavefield::SourceKind::Focused,
        };
        let s1 = ideal_field(&src, &P3::new(1.0, 0.0, 0.0), 500.0, C).unwrap();
        assert!((s1.pressure.norm() - 1.0).abs() < 1e-12);
        let s2 = ideal_field(&src, &P3::new(0.0, 2.0, 0.0), 500.0, C).unwrap();
        assert!((s2.pressure.norm() - 0.5).abs() < 1e-12);
        // one wavelength away: phase −2π ≡ 0
        let f = 500.0;
        let s3 = ideal_field(&src, &P3::new(0.0, C / f, 0.0), f, C).unwrap();
        assert!(s3.pressure.arg().abs() < 1e-9);
        assert!(ideal_field(&src, &P3::new(0.0, 0.0005, 0.0), f, C).is_err());
    }

    #[test]
    fn error_is_zero_for_exact_match_and_scale_invariant() {
        let a = SpeakerArray::standard(0.0);
        // a source placed on a speaker's location reproduced by that speaker alone
        let spk = a.speakers()[5].position;
        let src = VirtualSource {
            position: spk,
            kind: crate::wavefield::SourceKind::Exterior,
        };
        let zone = grid_points(&Rect::square(P2::origin(), 1.0), 6, 6, 0.0);
        let d = single(&a, 5, 0.37);
        let e = reconstruction_error(&src, &a, &d, &zone, 500.0, C).unwrap();
        assert!(e < 1e-12);

        let src = classify_source(P3::new(0.0, -1.5, 0.0), &a);
        let d = driving_functions(&src, &a, None, RenderMode::Static, &Default::default()).unwrap();
        let e1 = reconstruction_error(&src, &a, &d, &zone, 500.0, C).unwrap();
        for k in [1e-3, 0.5, 7.0, 1e4] {
            let mut dk = d.clone();
            dk.scale_gains(k);
            let ek = reconstruction_error(&src, &a, &dk, &zone, 500.0, C).unwrap();
            assert!((ek - e1).abs() < 1e-12);
        }
        assert!((0.0..=1.0).contains(&e1));
    }

    #[test]
    fn zone_outside_array_is_rejected() {
        let a = SpeakerArray::standard(0.0);
        let src = classify_source(P3::new(0.0, -1.5, 0.0), &a);
        let d = DrivingSet::nearest_speaker(&src, &a);
        assert!(reconstruction_error(&src, &a, &d, &[], 500.0, C).is_err());
        assert!(reconstruction_error(&src, &a, &d, &[P3::new(1.5, 0.0, 0.0)], 500.0, C).is_err());
    }
}
