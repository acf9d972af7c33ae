//! Position bound for the clean constant-velocity problem.

use nalgebra::{DMatrix, DVector};
use rgpo_track::bench::pcrb_curve;
use rgpo_track::models::{build_cv_model, MeasurementModel};

fn main() -> rgpo_track::Result<()> {
    let motion = build_cv_model(0.5, 0.0, 0.0, 0);
    let meas = MeasurementModel::new(5f64.sqrt(), 4);
    let prior = DMatrix::from_diagonal(&DVector::from_vec(vec![1e4, 1e4, 1e2, 1e2]));
    let curve = pcrb_curve(&motion, &meas, &prior, 100)?;
    for k in [1, 2, 5, 10, 25, 50, 100] {
        println!("k={k:3} bound={:.3} m", curve.bound[k]);
    }
    Ok(())
}
