use proptest::prelude::*;
use wfslab::geometry::{Rect, P2, P3, SPEED_OF_SOUND};
use wfslab::wavefield::{
    classify_source, driving_functions, error_map, grid_points, reconstruction_error,
    synthesize_field, DrivingEntry, DrivingSet, RenderConfig, RenderMode, SpeakerArray,
};

/// Splits `set` into two sets with disjoint active speakers.
fn split(set: &DrivingSet, mask: u64) -> (DrivingSet, DrivingSet) {
    let (mut a, mut b) = (set.clone(), set.clone());
    for i in 0..set.entries.len() {
        if mask >> (i % 64) & 1 == 1 {
            a.entries[i] = DrivingEntry::INACTIVE;
        } else {
            b.entries[i] = DrivingEntry::INACTIVE;
        }
    }
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn superposition(
        sx in -3.0..3.0f64, sy in 1.3..3.0f64,
        px in -0.8..0.8f64, py in -0.8..0.8f64,
        f in 100.0..2000.0f64, mask in any::<u64>(),
    ) {
        let array = SpeakerArray::standard(1.6);
        let src = classify_source(P3::new(sx, sy, 1.6), &array);
        let set = driving_functions(&src, &array, None, RenderMode::Static, &RenderConfig::default()).unwrap();
        let (a, b) = split(&set, mask);
        let p = P3::new(px, py, 1.6);
        let whole = synthesize_field(&set, &array, &p, f, SPEED_OF_SOUND).unwrap().pressure;
        let parts = synthesize_field(&a, &array, &p, f, SPEED_OF_SOUND).unwrap().pressure
            + synthesize_field(&b, &array, &p, f, SPEED_OF_SOUND).unwrap().pressure;
        prop_assert!((whole - parts).norm() <= 1e-9 * whole.norm().max(1e-12));
    }
}

#[test]
fn exterior_error_grows_above_the_alias_limit() {
    let array = SpeakerArray::standard(1.6);
    let alias = array.aliasing_frequency(SPEED_OF_SOUND);
    let bounds = Rect::square(P2::origin(), 1.8);
    for (x, y) in [(0.0, -1.5), (0.7, 2.0), (-2.5, 0.3)] {
        let src = classify_source(P3::new(x, y, 1.6), &array);
        let d = driving_functions(
            &src,
            &array,
            None,
            RenderMode::Static,
            &RenderConfig::default(),
        )
        .unwrap();
        let below = error_map(
            &src,
            &array,
            &d,
            bounds,
            30,
            30,
            0.5 * alias,
            SPEED_OF_SOUND,
        )
        .unwrap();
        let above = error_map(
            &src,
            &array,
            &d,
            bounds,
            30,
            30,
            3.0 * alias,
            SPEED_OF_SOUND,
        )
        .unwrap();
        assert!(
            below.mean_contribution() < above.mean_contribution(),
            "source ({x},{y}): {} vs {}",
            below.mean_contribution(),
            above.mean_contribution()
        );
    }
}

#[test]
fn error_is_invariant_to_global_gain() {
    let array = SpeakerArray::standard(1.6);
    let src = classify_source(P3::new(0.2, 1.6, 1.6), &array);
    let mut d = driving_functions(
        &src,
        &array,
        None,
        RenderMode::Static,
        &RenderConfig::default(),
    )
    .unwrap();
    let zone = grid_points(&Rect::square(P2::origin(), 1.0), 10, 10, 1.6);
    let e0 = reconstruction_error(&src, &array, &d, &zone, 500.0, SPEED_OF_SOUND).unwrap();
    d.scale_gains(7.5);
    let e1 = reconstruction_error(&src, &array, &d, &zone, 500.0, SPEED_OF_SOUND).unwrap();
    assert!((e0 - e1).abs() < 1e-12);
}
