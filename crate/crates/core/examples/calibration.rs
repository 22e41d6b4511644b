//! Two-step virtual/real alignment and the residual misalignment applied to
//! WFS renderings.
//!
//! `cargo run --example calibration`

use wfslab::calibration::{align_centers, sample_misalignment, set_rotation, MisalignmentModel};
use wfslab::geometry::P2;

fn main() {
    // virtual room centre lands 0.4 m east of the tracked centre, rotated 10°
    let step1 = align_centers(P2::origin(), P2::new(0.4, 0.0));
    let step2 = set_rotation(&step1, 10f64.to_radians());
    for p in [P2::new(0.4, 0.0), P2::new(1.4, 0.0)] {
        let q = step2.apply(&p);
        let back = step2.invert().apply(&q);
        println!(
            "({:+.2}, {:+.2}) -> ({:+.3}, {:+.3}) -> ({:+.2}, {:+.2})",
            p.x, p.y, q.x, q.y, back.x, back.y
        );
    }

    let model = MisalignmentModel::default();
    for seed in 1000..1004 {
        let t = sample_misalignment(&model, P2::origin(), seed);
        println!(
            "session seed {seed}: shift ({:+.1}, {:+.1}) cm, rotation {:+.2}°",
            t.translation.x * 100.0,
            t.translation.y * 100.0,
            t.rotation.to_degrees()
        );
    }
}
