//! Reconstruction error of an exterior and a focused source, static vs.
//! user-dependent rendering, and a 16- vs 8-speaker-per-side comparison.
//!
//! `cargo run --example field_error_map`

use wfslab::geometry::{Rect, P2, P3, SPEED_OF_SOUND};
use wfslab::wavefield::{
    build_square_array, classify_source, driving_functions, error_map, DrivingSet, RenderConfig,
    RenderMode, SpeakerArray,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RenderConfig::default();
    let array = SpeakerArray::standard(1.6);
    let sparse = build_square_array(2.0, 8, 1.6, P3::new(0.0, 0.0, 1.6))?;
    let zone = Rect::square(P2::origin(), 1.0);
    println!(
        "aliasing frequency: {:.0} Hz",
        array.aliasing_frequency(SPEED_OF_SOUND)
    );

    let exterior = classify_source(P3::new(0.0, -1.5, 1.6), &array);
    for (label, a) in [("16/side", &array), ("8/side", &sparse)] {
        let src = classify_source(exterior.position, a);
        let d = driving_functions(&src, a, None, RenderMode::Static, &cfg)?;
        let m = error_map(&src, a, &d, zone, 20, 20, 500.0, SPEED_OF_SOUND)?;
        println!("exterior, WFS {label}: error {:.3}", m.error);
    }
    let nearest = DrivingSet::nearest_speaker(&exterior, &array);
    let m = error_map(
        &exterior,
        &array,
        &nearest,
        zone,
        20,
        20,
        500.0,
        SPEED_OF_SOUND,
    )?;
    println!("exterior, nearest speaker: error {:.3}", m.error);

    // focused source near the north wall, listener between it and the wall
    let focused = classify_source(P3::new(0.3, 0.5, 1.6), &array);
    let listener = P3::new(0.3, 0.85, 1.6);
    let behind = Rect::new(P2::new(-0.2, 0.6), P2::new(0.8, 0.95));
    for mode in [RenderMode::Static, RenderMode::UserDependent] {
        let d = driving_functions(&focused, &array, Some(&listener), mode, &cfg)?;
        let m = error_map(&focused, &array, &d, behind, 20, 8, 500.0, SPEED_OF_SOUND)?;
        println!(
            "focused, {mode:?}: sides {:?}, {} speakers, error {:.3}",
            d.active_sides(&array),
            d.active_count(),
            m.error
        );
    }
    Ok(())
}
