use std::path::PathBuf;

use nalgebra::Quaternion;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfslab::analysis::{
    density_heatmap, fraction_below, knn_score_map, learning_slope, mean_scores,
    normalized_time_curves, ConditionFilter, Dimension, KNN_EPSILON,
};
use wfslab::geometry::{Rect, P2, P3};
use wfslab::logging::{LoadedSession, LoadedTrial, SessionLogRow, Tracker};
use wfslab::session::{Environment, HandPose, Movement, Sound, System, TrackingSample};

fn square() -> Rect {
    Rect::square(P2::origin(), 2.0)
}

/// Brute force: sort every sample by (distance, index), average the first k.
fn naive_knn(samples: &[(P2, f64)], k: usize, c: P2) -> f64 {
    let mut d: Vec<(f64, usize)> = samples
        .iter()
        .enumerate()
        .map(|(i, (p, _))| (((p.x - c.x).powi(2) + (p.y - c.y).powi(2)).sqrt(), i))
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let (mut num, mut den) = (0.0, 0.0);
    for &(dist, i) in d.iter().take(k) {
        let w = 1.0 / (KNN_EPSILON + dist);
        num += w * samples[i].1;
        den += w;
    }
    num / den
}

#[test]
fn knn_matches_naive_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for instance in 0..10 {
        let n = rng.random_range(1..60);
        let samples: Vec<(P2, f64)> = (0..n)
            .map(|_| {
                (
                    P2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    rng.random_range(0.0..1.5),
                )
            })
            .collect();
        for k in [1, 5, 15] {
            let g = knn_score_map(&samples, k, &square(), 12, 9).unwrap();
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let want = naive_knn(&samples, k.min(n), g.cell_center(i, j));
                    assert!(
                        (g.get(i, j) - want).abs() < 1e-9,
                        "instance {instance} k {k}"
                    );
                }
            }
        }
    }
}

fn closed_form_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let num: f64 = y
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64 - xm) * (v - ym))
        .sum();
    let den: f64 = (0..y.len()).map(|i| (i as f64 - xm).powi(2)).sum();
    num / den
}

proptest! {
    #[test]
    fn slope_matches_closed_form(y in proptest::collection::vec(0.0..2.0f64, 2..60), c in -5.0..5.0f64) {
        let s = learning_slope(&y).unwrap();
        prop_assert!((s - closed_form_slope(&y)).abs() < 1e-12);
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        prop_assert!((learning_slope(&shifted).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn density_mass_is_conserved(pts in proptest::collection::vec((-1.5..1.5f64, -1.5..1.5f64), 0..300), nx in 1usize..50, ny in 1usize..50) {
        let pts: Vec<P2> = pts.into_iter().map(|(x, y)| P2::new(x, y)).collect();
        let g = density_heatmap(&pts, &square(), nx, ny).unwrap();
        prop_assert!(g.values.iter().all(|v| *v >= 0.0));
        prop_assert_eq!(g.total() as usize + g.overflow, pts.len());
        let inside = pts.iter().filter(|p| square().contains(p)).count();
        prop_assert_eq!(g.total() as usize, inside);
    }

    #[test]
    fn knn_is_bounded(samples in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.0..3.0f64), 1..40), k in 1usize..20) {
        let s: Vec<(P2, f64)> = samples.iter().map(|&(x, y, v)| (P2::new(x, y), v)).collect();
        let lo = s.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let hi = s.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let g = knn_score_map(&s, k, &square(), 8, 8).unwrap();
        prop_assert!(g.values.iter().all(|v| v.is_finite() && *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }
}

#[test]
fn uniform_density_is_within_five_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let pts: Vec<P2> = (0..n)
        .map(|_| P2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let g = density_heatmap(&pts, &square(), 40, 40).unwrap();
    let p = 1.0 / 1600.0;
    let (mean, sd) = (n as f64 * p, (n as f64 * p * (1.0 - p)).sqrt());
    assert!(g.values.iter().all(|v| (v - mean).abs() < 5.0 * sd));
}

#[test]
fn two_point_slope() {
    let s = learning_slope(&[1.0, 0.0]).unwrap();
    assert_eq!(s, -1.0);
    assert!(wfslab::analysis::is_improving(s));
}

fn random_sessions(seed: u64) -> Vec<LoadedSession> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..3)
        .map(|p| LoadedSession {
            dir: PathBuf::from(format!("P0{p}")),
            participant: format!("P0{p}"),
            demographics: None,
            trials: (0..40)
                .map(|i| {
                    let score = rng.random_range(0.0..1.0);
                    let source = P3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        1.6,
                    );
                    let onset = 10.0 * i as f64;
                    let guess_time = rng.random_range(1.0..8.0);
                    let start = P2::new(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8));
                    let samples = (guess_time / 0.02) as usize;
                    let tracking = (0..=samples)
                        .map(|s| {
                            let f = s as f64 / samples as f64;
                            let p = P3::new(
                                start.x + f * (source.x - start.x),
                                start.y + f * (source.y - start.y),
                                1.6,
                            );
                            let hand = if rng.random_bool(0.1) {
                                HandPose::SENTINEL
                            } else {
                                HandPose::tracked(P3::new(p.x, p.y, 1.2), Quaternion::identity())
                            };
                            TrackingSample {
                                t: onset + f * guess_time,
                                hmd_pos: p,
                                hmd_rot: Quaternion::identity(),
                                left_hand: HandPose::SENTINEL,
                                right_hand: hand,
                            }
                        })
                        .collect();
                    LoadedTrial {
                        row: SessionLogRow {
                            trial: i + 1,
                            block: 1 + i / 6,
                            system: System::ALL[i % 2],
                            environment: Environment::ALL[rng.random_range(0..3)],
                            sound: Sound::ALL[rng.random_range(0..3)],
                            movement: Movement::ALL[rng.random_range(0..2)],
                            source,
                            trajectory: None,
                            rendered: P2::new(source.x, source.y),
                            guess: P3::new(source.x + score, source.y, 1.6),
                            onset_time: onset,
                            guess_time,
                            score,
                        },
                        tracking,
                    }
                })
                .collect(),
        })
        .collect()
}

#[test]
fn group_means_match_a_streaming_pass() {
    let sessions = random_sessions(3);
    let dims = [Dimension::System, Dimension::Sound];
    let rows = mean_scores(&sessions, &dims, &ConditionFilter::all());
    for g in &rows {
        // Welford running mean as the independent pass
        let (mut n, mut m) = (0usize, 0.0f64);
        for t in sessions.iter().flat_map(|s| &s.trials) {
            if t.row.system.to_string() == g.key[0] && t.row.sound.to_string() == g.key[1] {
                n += 1;
                m += (t.row.score - m) / n as f64;
            }
        }
        assert_eq!(n, g.n);
        assert!((m - g.mean_score).abs() < 1e-12);
    }
    assert_eq!(
        mean_scores(&sessions, &[Dimension::Sound], &ConditionFilter::all()).len(),
        3
    );
}

#[test]
fn fraction_matches_direct_count() {
    let sessions = random_sessions(4);
    for system in System::ALL {
        let f = ConditionFilter::system(*system);
        let all: Vec<f64> = sessions
            .iter()
            .flat_map(|s| &s.trials)
            .filter(|t| t.row.system == *system)
            .map(|t| t.row.score)
            .collect();
        let want = all.iter().filter(|s| **s < 0.2).count() as f64 / all.len() as f64;
        assert_eq!(fraction_below(&sessions, 0.2, &f).unwrap(), want);
    }
}

#[test]
fn curves_match_direct_recomputation() {
    let sessions = random_sessions(5);
    let trials: Vec<&LoadedTrial> = sessions.iter().flat_map(|s| &s.trials).collect();
    let bins = 10;
    let curve = normalized_time_curves(trials.iter().copied(), Tracker::RightHand, bins).unwrap();
    for (b, bin) in curve.iter().enumerate() {
        let mut per_trial = Vec::new();
        for t in &trials {
            let target = t.row.target();
            let ds: Vec<f64> = t
                .tracking
                .iter()
                .filter(|s| s.right_hand.valid)
                .filter_map(|s| {
                    let tau = (s.t - t.row.onset_time) / t.row.guess_time;
                    let idx = ((tau * bins as f64).floor() as usize).min(bins - 1);
                    ((0.0..=1.0).contains(&tau) && idx == b).then(|| {
                        let p = s.right_hand.pos;
                        ((p.x - target.x).powi(2) + (p.y - target.y).powi(2)).sqrt()
                    })
                })
                .collect();
            if !ds.is_empty() {
                per_trial.push(ds.iter().sum::<f64>() / ds.len() as f64);
            }
        }
        let want = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
        assert_eq!(bin.n_trials, per_trial.len());
        assert!((bin.mean_distance.unwrap() - want).abs() < 1e-12);
    }
    // duplicating every trial leaves the curve unchanged
    let doubled = normalized_time_curves(
        trials.iter().chain(trials.iter()).copied(),
        Tracker::RightHand,
        bins,
    )
    .unwrap();
    for (a, b) in curve.iter().zip(&doubled) {
        assert!((a.mean_distance.unwrap() - b.mean_distance.unwrap()).abs() < 1e-12);
    }
}
