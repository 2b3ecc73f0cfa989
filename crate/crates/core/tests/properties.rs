use noncollapse_core::geometry::{
    circle, ellipse, ellipsoid, hausdorff_distance, min_outwardness, sphere, torus,
};
use noncollapse_core::{
    lin_operator, min_distance, AnalyzerConfig, ScalarField, SpeedFunction, SphereCurvatureField,
};
use proptest::prelude::*;

fn speeds() -> impl Strategy<Value = SpeedFunction> {
    prop_oneof![
        Just(SpeedFunction::sum()),
        Just(SpeedFunction::norm()),
        (-4.0..4.0_f64)
            .prop_filter("p != 0", |p| p.abs() > 0.05)
            .prop_map(|p| SpeedFunction::power_mean(p).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn speeds_are_symmetric_and_homogeneous(
        speed in speeds(),
        a in 0.1..10.0_f64,
        b in 0.1..10.0_f64,
        lambda in 0.1..10.0_f64,
    ) {
        let f = speed.eval(&[a, b]).unwrap();
        let swapped = speed.eval(&[b, a]).unwrap();
        prop_assert!((f - swapped).abs() <= 1e-15 * f);
        let scaled = speed.eval(&[lambda * a, lambda * b]).unwrap();
        prop_assert!((scaled - lambda * f).abs() <= 1e-10 * lambda * f);
        let g = speed.eval_gradient(&[a, b]).unwrap();
        prop_assert!(g.iter().all(|&x| x > 0.0));
        prop_assert!((g[0] * a + g[1] * b - f).abs() <= 1e-10 * f);
    }

    #[test]
    fn resampling_is_idempotent(a in 1.0..2.0_f64, b in 0.7..1.0_f64, n in 48usize..128) {
        let h = ellipse(a, b, n).unwrap();
        let once = h.resampled().unwrap();
        let twice = once.resampled().unwrap();
        for (p, q) in once.nodes().iter().zip(twice.nodes()) {
            prop_assert!((p[0] - q[0]).abs().max((p[1] - q[1]).abs()) <= 1e-10);
        }
        let spacing = h.max_spacing();
        prop_assert!(hausdorff_distance(&h, &once) <= spacing * spacing);
    }

    #[test]
    fn convex_bodies_face_outward(a in 0.5..3.0_f64, b in 0.5..3.0_f64, n in 32usize..128) {
        prop_assert!(min_outwardness(&ellipse(a, b, n).unwrap()) > 0.0);
        prop_assert!(min_outwardness(&ellipsoid(a, b, 0.0, n).unwrap()) > 0.0);
    }

    #[test]
    fn sphere_curvatures_scale_inversely(a in 1.0..2.5_f64, lambda in 0.25..4.0_f64) {
        let cfg = AnalyzerConfig::default();
        let h = ellipse(a, 1.0, 48).unwrap();
        let base = SphereCurvatureField::compute(&h, &cfg).unwrap();
        let scaled = SphereCurvatureField::compute(&h.scaled(lambda).unwrap(), &cfg).unwrap();
        for i in 0..base.len() {
            prop_assert!((scaled.zbar[i] * lambda - base.zbar[i]).abs() <= 1e-10 * base.zbar[i].abs());
            prop_assert!((scaled.zlow[i] * lambda - base.zlow[i]).abs() <= 1e-10 * base.zlow[i].abs().max(1.0));
        }
    }

    #[test]
    fn distance_is_symmetric_and_translation_invariant(
        gap in 0.1..3.0_f64,
        r in 0.3..1.5_f64,
        shift in -5.0..5.0_f64,
    ) {
        let a = sphere(1.0, 0.0, 64).unwrap();
        let b = sphere(r, 1.0 + r + gap, 64).unwrap();
        let ab = min_distance(&a, &b).unwrap();
        let ba = min_distance(&b, &a).unwrap();
        prop_assert_eq!(ab.distance, ba.distance);
        let moved = min_distance(
            &a.translated([shift, 0.0]).unwrap(),
            &b.translated([shift, 0.0]).unwrap(),
        )
        .unwrap();
        prop_assert!((moved.distance - ab.distance).abs() <= 1e-12 * (1.0 + shift.abs()));
        prop_assert!((ab.distance - gap).abs() <= 1e-2 * gap.max(0.1));
    }

    #[test]
    fn linearized_operator_is_linear(
        speed in speeds(),
        alpha in -3.0..3.0_f64,
        beta in -3.0..3.0_f64,
        seed in 0u64..1000,
    ) {
        let h = torus(2.0, 0.7, 64).unwrap();
        let speed = if h.samples().iter().all(|s| speed.eval(s.kappa.as_slice()).is_ok()) {
            speed
        } else {
            SpeedFunction::sum()
        };
        let f: Vec<f64> = (0..64).map(|i| ((i as u64 * 7 + seed) % 13) as f64 / 13.0).collect();
        let g: Vec<f64> = (0..64).map(|i| (i as f64 * 0.3 + seed as f64).sin()).collect();
        let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| alpha * x + beta * y).collect();
        let lf = lin_operator(&h, &speed, &ScalarField::new(f)).unwrap().values;
        let lg = lin_operator(&h, &speed, &ScalarField::new(g)).unwrap().values;
        let lm = lin_operator(&h, &speed, &ScalarField::new(mix)).unwrap().values;
        let scale = lf.iter().chain(&lg).fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..64 {
            prop_assert!((lm[i] - alpha * lf[i] - beta * lg[i]).abs() <= 1e-12 * scale * 10.0);
        }
    }
}

#[test]
fn round_bodies_have_reciprocal_curvatures() {
    for rho in [0.5, 1.0, 3.0] {
        let mut errors = Vec::new();
        for n in [128, 256] {
            let c = circle([0.3, -0.2], rho, n).unwrap();
            let s = sphere(rho, 0.5, n).unwrap();
            let err = c
                .samples()
                .iter()
                .chain(s.samples())
                .flat_map(|x| x.kappa.as_slice().to_vec())
                .fold(0.0_f64, |m, k| m.max((k * rho - 1.0).abs()));
            errors.push(err);
        }
        assert!(errors[1] <= 2e-2, "rho {rho}: {errors:?}");
        assert!(
            errors[1] <= 1e-12 || errors[0] / errors[1] >= 2f64.powf(1.9),
            "rho {rho}: {errors:?}"
        );
    }
}

#[test]
fn weights_measure_length_and_area() {
    use std::f64::consts::PI;
    for rho in [0.5, 1.0, 3.0] {
        let c = circle([0.0, 0.0], rho, 512).unwrap();
        let s = sphere(rho, 0.0, 512).unwrap();
        assert!((c.total_weight() / (2.0 * PI * rho) - 1.0).abs() < 1e-3);
        assert!((s.total_weight() / (4.0 * PI * rho * rho) - 1.0).abs() < 1e-3);
    }
}
