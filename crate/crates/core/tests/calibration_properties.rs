use proptest::prelude::*;
use wfslab::calibration::{align_centers, set_rotation, RigidTransform2D};
use wfslab::geometry::{P2, V2};

fn point() -> impl Strategy<Value = P2> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| P2::new(x, y))
}

fn transform() -> impl Strategy<Value = RigidTransform2D> {
    (point(), -7.0..7.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(center, rotation, tx, ty)| {
        RigidTransform2D {
            center,
            rotation,
            translation: V2::new(tx, ty),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn transforms_are_isometries(t in transform(), a in point(), b in point()) {
        let d0 = (a - b).norm();
        let d1 = (t.apply(&a) - t.apply(&b)).norm();
        prop_assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn inverse_composes_to_identity(t in transform(), p in point()) {
        let inv = t.invert();
        prop_assert!((inv.apply(&t.apply(&p)) - p).norm() < 1e-9);
        prop_assert!((t.apply(&inv.apply(&p)) - p).norm() < 1e-9);
    }

    #[test]
    fn two_step_calibration(real in point(), virt in point(), theta in -3.0..3.0f64) {
        let t = set_rotation(&align_centers(real, virt), theta);
        prop_assert!((t.apply(&virt) - real).norm() < 1e-9);
    }
}
