//! Baselines: the naive tracker, the clairvoyant tracker and the posterior
//! Cramér-Rao bound.

use nalgebra::{DMatrix, DVector, Vector2};

use crate::error::{Error, Result};
use crate::gaussmix::{linear_gaussian_update, symmetrize, GaussianComponent};
use crate::models::{build_cv_model, los_unit_vector, ClutterModel, MeasurementModel, MotionModel};
use crate::sim::{Provenance, ScanSet};
use crate::tracker::{update, Belief, FixedJammerObs, Posterior, UpdateConfig};

/// Update that models false alarms only.
pub fn naive_update(
    predicted: &Belief,
    scan: &[DVector<f64>],
    meas: &MeasurementModel,
    clutter: &ClutterModel,
    cfg: &UpdateConfig,
) -> Result<Posterior> {
    let uniform = clutter.with_jammer_rates(Vec::new());
    update(predicted, scan, meas, &uniform, &FixedJammerObs::default(), cfg)
}

/// Kalman update with known provenance: the target return under `(H, R)`,
/// then every jammer return with its true bias removed along the LOS of the
/// predicted position. Clutter is ignored.
pub fn clairvoyant_step(
    predicted: &GaussianComponent,
    scan: &ScanSet,
    true_biases: &[(usize, f64)],
    meas: &MeasurementModel,
    radar: &Vector2<f64>,
) -> Result<GaussianComponent> {
    let meas = meas.for_dim(predicted.dim());
    let offset = DVector::zeros(2);
    let mut post = predicted.clone();
    if let Some(z) = scan.target() {
        post = linear_gaussian_update(&post, &meas.h, &offset, &meas.r, z)?.0;
    }
    let los = los_unit_vector(&Vector2::new(predicted.mean[0], predicted.mean[1]), radar)?;
    for (z, p) in scan.points.iter().zip(&scan.provenance) {
        let Provenance::Jammer(i) = p else { continue };
        let Some(&(_, bias)) = true_biases.iter().find(|(j, _)| j == i) else {
            continue;
        };
        let corrected = DVector::from_column_slice(&[z[0] - bias * los.x, z[1] - bias * los.y]);
        post = linear_gaussian_update(&post, &meas.h, &offset, &meas.r, &corrected)?.0;
    }
    Ok(post)
}

/// Constant-velocity Kalman filter fed with labelled returns.
#[derive(Debug, Clone)]
pub struct ClairvoyantTracker {
    motion: MotionModel,
    meas: MeasurementModel,
    radar: Vector2<f64>,
    state: GaussianComponent,
}

impl ClairvoyantTracker {
    pub fn new(prior: GaussianComponent, delta: f64, sigma_q: f64, sigma_r: f64, radar: Vector2<f64>) -> Self {
        Self {
            motion: build_cv_model(delta, sigma_q, 0.0, 0),
            meas: MeasurementModel::new(sigma_r, 4),
            radar,
            state: prior,
        }
    }

    pub fn state(&self) -> &GaussianComponent {
        &self.state
    }

    pub fn step(&mut self, scan: &ScanSet, true_biases: &[(usize, f64)]) -> Result<&GaussianComponent> {
        let f = &self.motion.f;
        let mut cov = f * &self.state.cov * f.transpose() + &self.motion.q;
        symmetrize(&mut cov);
        let predicted = GaussianComponent::new(1.0, f * &self.state.mean, cov);
        self.state = clairvoyant_step(&predicted, scan, true_biases, &self.meas, &self.radar)?;
        Ok(&self.state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcrbCurve {
    /// `info[k]` for `k = 0..=n_steps`.
    pub info: Vec<DMatrix<f64>>,
    /// Position RMSE lower bound, m, aligned with `info`.
    pub bound: Vec<f64>,
}

fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut inv = m.clone().try_inverse().ok_or(Error::Singular("information matrix"))?;
    symmetrize(&mut inv);
    Ok(inv)
}

fn position_bound(info: &DMatrix<f64>, n_pos: usize) -> Result<f64> {
    let cov = inverse(info)?;
    Ok((0..n_pos).map(|i| cov[(i, i)]).sum::<f64>().sqrt())
}

/// Information recursion for the linear-Gaussian problem with a detection
/// every step.
pub fn pcrb_curve(
    motion: &MotionModel,
    meas: &MeasurementModel,
    prior_cov: &DMatrix<f64>,
    n_steps: usize,
) -> Result<PcrbCurve> {
    let n_pos = meas.h.nrows();
    let r_inv = inverse(&meas.r)?;
    let meas_info = meas.h.transpose() * r_inv * &meas.h;
    let mut j = inverse(prior_cov)?;
    let mut info = vec![j.clone()];
    let mut bound = vec![position_bound(&j, n_pos)?];
    for _ in 0..n_steps {
        let pred = &motion.f * inverse(&j)? * motion.f.transpose() + &motion.q;
        j = inverse(&pred)? + &meas_info;
        symmetrize(&mut j);
        bound.push(position_bound(&j, n_pos)?);
        info.push(j.clone());
    }
    Ok(PcrbCurve { info, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Fov;
    use nalgebra::{dmatrix, dvector};

    fn belief() -> Belief {
        Belief::kinematic(GaussianComponent::new(
            1.0,
            dvector![500.0, 500.0, 1.0, 0.0],
            DMatrix::from_diagonal(&dvector![25.0, 25.0, 4.0, 4.0]),
        ))
    }

    #[test]
    fn naive_equals_update_with_zero_jammer_rates() {
        let meas = MeasurementModel::new(2.0, 4);
        let clutter = ClutterModel::uniform(20.0, Fov::rect(0.0, 1000.0, 0.0, 1000.0));
        let scan = vec![dvector![501.0, 499.0], dvector![510.0, 505.0], dvector![100.0, 900.0]];
        let cfg = UpdateConfig::default();
        let a = naive_update(&belief(), &scan, &meas, &clutter.with_jammer_rates(vec![3.0]), &cfg).unwrap();
        let b = update(&belief(), &scan, &meas, &clutter, &FixedJammerObs::default(), &cfg).unwrap();
        assert_eq!(a.belief.mixture.len(), b.belief.mixture.len());
        for (x, y) in a.belief.mixture.components().iter().zip(b.belief.mixture.components()) {
            assert!((x.weight - y.weight).abs() < 1e-12);
            assert!((&x.mean - &y.mean).amax() < 1e-12);
            assert!((&x.cov - &y.cov).amax() < 1e-12);
        }
        let empty = naive_update(&belief(), &[], &meas, &clutter, &cfg).unwrap();
        assert_eq!(empty.belief.mixture, belief().mixture);
    }

    #[test]
    fn naive_approaches_kalman_without_clutter() {
        let meas = MeasurementModel::new(2.0, 4);
        let clutter = ClutterModel::uniform(1e-12, Fov::rect(0.0, 1000.0, 0.0, 1000.0));
        let z = dvector![504.0, 497.0];
        let post = naive_update(&belief(), std::slice::from_ref(&z), &meas, &clutter, &UpdateConfig::default()).unwrap();
        let kf = linear_gaussian_update(&belief().mixture.components()[0], &meas.h, &DVector::zeros(2), &meas.r, &z)
            .unwrap()
            .0;
        let c = &post.belief.mixture.components()[0];
        assert_eq!(post.belief.mixture.len(), 1);
        assert!((&c.mean - &kf.mean).amax() < 1e-9);
    }

    fn scan(points: Vec<(DVector<f64>, Provenance)>) -> ScanSet {
        let (points, provenance) = points.into_iter().unzip();
        ScanSet { points, provenance }
    }

    #[test]
    fn clairvoyant_examples() {
        let meas = MeasurementModel::new(2.0, 4);
        let prior = belief().mixture.components()[0].clone();
        let radar = Vector2::zeros();
        let none = clairvoyant_step(&prior, &ScanSet::default(), &[], &meas, &radar).unwrap();
        assert_eq!(none, prior);

        let target = scan(vec![(dvector![502.0, 501.0], Provenance::Target)]);
        let t = clairvoyant_step(&prior, &target, &[], &meas, &radar).unwrap();
        let kf = linear_gaussian_update(&prior, &meas.h, &DVector::zeros(2), &meas.r, &dvector![502.0, 501.0])
            .unwrap()
            .0;
        assert_eq!(t, kf);

        let los = Vector2::new(1.0, 1.0).normalize();
        let j = Vector2::new(502.0, 501.0) + los * 30.0;
        let both = scan(vec![
            (dvector![502.0, 501.0], Provenance::Target),
            (dvector![j.x, j.y], Provenance::Jammer(0)),
            (dvector![10.0, 10.0], Provenance::Clutter),
        ]);
        let tj = clairvoyant_step(&prior, &both, &[(0, 30.0)], &meas, &radar).unwrap();
        assert!(tj.cov[(0, 0)] < t.cov[(0, 0)]);
        assert!((tj.mean[0] - t.mean[0]).abs() < 1.0);
    }

    #[test]
    fn pcrb_static_scalar() {
        let motion = MotionModel {
            f: dmatrix![1.0],
            q: dmatrix![0.0],
            delta: 1.0,
            sigma_q: 0.0,
            alpha: 0.0,
            n_bias: 0,
        };
        let meas = MeasurementModel {
            h: dmatrix![1.0],
            r: dmatrix![1.0],
            sigma_r: 1.0,
        };
        let c = pcrb_curve(&motion, &meas, &dmatrix![1.0], 10).unwrap();
        for k in 0..=10 {
            assert!((c.info[k][(0, 0)] - (1.0 + k as f64)).abs() < 1e-12);
            assert!((c.bound[k] - 1.0 / (1.0 + k as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn pcrb_cv_is_decreasing_without_process_noise() {
        let motion = build_cv_model(0.5, 0.0, 0.0, 0);
        let meas = MeasurementModel::new(5f64.sqrt(), 4);
        let prior = DMatrix::from_diagonal(&dvector![1e4, 1e4, 1e2, 1e2]);
        let c = pcrb_curve(&motion, &meas, &prior, 100).unwrap();
        assert!(c.bound[1] <= 1e4f64.sqrt() * 2f64.sqrt());
        for k in 1..100 {
            assert!(c.bound[k + 1] <= c.bound[k] + 1e-12);
            assert!(c.bound[k] > 0.0);
        }
    }
}
