//! One measurement update of an adaptive belief: target return, a pulled-off
//! jammer return and a false alarm.

use nalgebra::{DMatrix, DVector, Vector2};
use rgpo_track::gaussmix::GaussianComponent;
use rgpo_track::models::{build_cv_model, ClutterModel, Fov, MeasurementModel};
use rgpo_track::tracker::{
    detect_jamming, predict, update, Belief, JammerModel, RadarJammerObs, UpdateConfig,
};

fn main() -> rgpo_track::Result<()> {
    let prior = GaussianComponent::new(
        1.0,
        DVector::from_vec(vec![400.0, 300.0, 6.0, 8.0]),
        DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 4.0, 1.0, 1.0])),
    );
    let belief = Belief::adaptive(prior, 10.0, 25.0);
    let motion = build_cv_model(0.5, 5f64.sqrt(), 10.0, 1);
    let predicted = predict(&belief, &motion)?;

    let meas = MeasurementModel::new(5f64.sqrt(), predicted.dim());
    let clutter = ClutterModel::uniform(20.0, Fov::rect(0.0, 1000.0, 0.0, 1000.0)).with_jammer_rates(vec![3.0]);
    let model = JammerModel::Adaptive;
    let builder = RadarJammerObs {
        model: &model,
        radar: Vector2::zeros(),
        meas: &meas,
    };
    // Target near (403, 304); jammer 12 m further along the line of sight.
    let scan = vec![
        DVector::from_vec(vec![403.5, 303.8]),
        DVector::from_vec(vec![413.1, 311.1]),
        DVector::from_vec(vec![120.0, 870.0]),
    ];
    let post = update(&predicted, &scan, &meas, &clutter, &builder, &UpdateConfig::default())?;
    let p_jam = detect_jamming(&post, &scan, &predicted, &clutter, &builder)?;
    println!(
        "{} raw hypotheses, {} kept",
        post.stats.raw_hypotheses,
        post.belief.mixture.len()
    );
    let best = &post.belief.mixture.components()[0];
    println!("best: w={:.3} pos=({:.1}, {:.1}) bias={:.1}", best.weight, best.mean[0], best.mean[1], best.mean[4]);
    println!("P(jamming) = {p_jam:.3}");
    Ok(())
}
