use nalgebra::{DMatrix, DVector, Vector2};
use proptest::prelude::*;

use rgpo_track::gaussmix::{is_spd, mixture_moments, reduce_mixture, GaussianComponent, Mixture};
use rgpo_track::models::{build_cv_model, build_jammer_obs_adaptive, ClutterModel, Fov, MeasurementModel};
use rgpo_track::sim::rgpo_bias;
use rgpo_track::tracker::{
    augment_bias, predict, remove_bias, update, Belief, FixedJammerObs, JammerComponentRecord, UpdateConfig,
};

fn spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (prop::collection::vec(-1.0..1.0f64, n * n), prop::collection::vec(0.5..20.0f64, n)).prop_map(move |(a, d)| {
        let a = DMatrix::from_vec(n, n, a);
        &a * a.transpose() + DMatrix::from_diagonal(&DVector::from_vec(d))
    })
}

fn belief() -> impl Strategy<Value = Belief> {
    (
        (300.0..700.0f64, 300.0..700.0f64, -8.0..8.0f64, -8.0..8.0f64, 0.0..40.0f64),
        spd(5),
    )
        .prop_map(|((px, py, vx, vy, b), cov)| Belief {
            mixture: Mixture::single(GaussianComponent::new(
                1.0,
                DVector::from_vec(vec![px, py, vx, vy, b]),
                cov,
            )),
            registry: vec![JammerComponentRecord::vigilant(4)],
            timestep: 0,
        })
}

fn offsets() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-15.0..15.0f64, -15.0..15.0f64), 0..5)
}

fn run_update(b: &Belief, offs: &[(f64, f64)], reverse: bool) -> Belief {
    let meas = MeasurementModel::new(5f64.sqrt(), 5);
    let motion = build_cv_model(0.5, 5f64.sqrt(), 10.0, 1);
    let clutter = ClutterModel::uniform(20.0, Fov::rect(0.0, 1000.0, 0.0, 1000.0)).with_jammer_rates(vec![3.0]);
    let pred = predict(b, &motion).unwrap();
    let m = &pred.mixture.components()[0].mean;
    let los = Vector2::new(m[0], m[1]).normalize();
    let obs = build_jammer_obs_adaptive(&los, 1, 1, &meas).unwrap();
    let mut scan: Vec<DVector<f64>> = offs
        .iter()
        .map(|(dx, dy)| DVector::from_vec(vec![m[0] + dx, m[1] + dy]))
        .collect();
    if reverse {
        scan.reverse();
    }
    update(&pred, &scan, &meas, &clutter, &FixedJammerObs(vec![obs]), &UpdateConfig::default())
        .unwrap()
        .belief
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn update_normalized_spd_and_order_free(b in belief(), offs in offsets()) {
        let post = run_update(&b, &offs, false);
        prop_assert!((post.mixture.total_weight() - 1.0).abs() < 1e-12);
        prop_assert!(post.mixture.components().iter().all(|c| is_spd(&c.cov)));
        prop_assert!(post.check_invariants().is_ok());
        let rev = run_update(&b, &offs, true);
        prop_assert_eq!(post.mixture, rev.mixture);
    }

    #[test]
    fn augment_then_remove_is_identity(b in belief(), mean in 0.0..50.0f64, var in 1.0..1000.0f64) {
        let aug = augment_bias(&b, mean, var);
        prop_assert_eq!(aug.dim(), 6);
        let back = remove_bias(&aug, 5).unwrap();
        prop_assert_eq!(back.mixture, b.mixture);
    }

    #[test]
    fn reduction_keeps_normalized_subset(
        w in prop::collection::vec(1e-9..1.0f64, 1..40),
        thr in 0.0..0.5f64,
        cap in 1usize..20,
    ) {
        let comps: Vec<GaussianComponent> = w
            .iter()
            .enumerate()
            .map(|(i, w)| GaussianComponent::new(*w, DVector::from_element(1, i as f64), DMatrix::identity(1, 1)))
            .collect();
        let mix = Mixture::new(comps).unwrap();
        let red = reduce_mixture(&mix, thr, cap);
        prop_assert!(!red.is_empty() && red.len() <= cap);
        prop_assert!((red.total_weight() - 1.0).abs() < 1e-12);
        let (_, cov) = mixture_moments(&red);
        prop_assert!(cov[(0, 0)] >= 1.0 - 1e-9);
    }

    #[test]
    fn bias_is_linear_in_elapsed_time(v in 0.1..10.0f64, t0 in 0.0..50.0f64, dt in 0.0..50.0f64) {
        let b = rgpo_bias(v, t0 + dt, t0).unwrap();
        prop_assert!((b - v * dt).abs() <= 1e-9 * (1.0 + v * dt));
        prop_assert!(b >= 0.0);
    }
}
