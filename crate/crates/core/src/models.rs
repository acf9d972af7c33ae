//! Motion, measurement, jammer-observation and clutter models.
//!
//! State layout throughout the crate is `[px, py, vx, vy, b_1, .., b_C]`:
//! planar position (m), velocity (m/s) and one range bias (m) per awake
//! jammer component.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};

/// Number of kinematic states (position and velocity in the plane).
pub const KINEMATIC_DIM: usize = 4;

/// Constant-velocity model augmented with random-walk bias states.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub f: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub delta: f64,
    pub sigma_q: f64,
    pub alpha: f64,
    pub n_bias: usize,
}

impl MotionModel {
    pub fn dim(&self) -> usize {
        KINEMATIC_DIM + self.n_bias
    }

    /// Same parameters, different number of bias states.
    pub fn with_n_bias(&self, n_bias: usize) -> MotionModel {
        build_cv_model(self.delta, self.sigma_q, self.alpha, n_bias)
    }
}

/// White-noise-acceleration CV model with `n_bias` independent bias random
/// walks of variance `alpha * delta * sigma_q^2` per step.
pub fn build_cv_model(delta: f64, sigma_q: f64, alpha: f64, n_bias: usize) -> MotionModel {
    let n = KINEMATIC_DIM + n_bias;
    let q2 = sigma_q * sigma_q;
    let mut f = DMatrix::identity(n, n);
    let mut q = DMatrix::zeros(n, n);
    for axis in 0..2 {
        let (p, v) = (axis, axis + 2);
        f[(p, v)] = delta;
        q[(p, p)] = q2 * delta.powi(4) / 4.0;
        q[(p, v)] = q2 * delta.powi(3) / 2.0;
        q[(v, p)] = q2 * delta.powi(3) / 2.0;
        q[(v, v)] = q2 * delta * delta;
    }
    for b in KINEMATIC_DIM..n {
        q[(b, b)] = alpha * delta * q2;
    }
    MotionModel {
        f,
        q,
        delta,
        sigma_q,
        alpha,
        n_bias,
    }
}

/// Direct position observation with isotropic noise.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    pub h: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub sigma_r: f64,
}

impl MeasurementModel {
    /// `H = [I2 0]` for a state of dimension `state_dim`, `R = sigma_r^2 I2`.
    pub fn new(sigma_r: f64, state_dim: usize) -> Self {
        let mut h = DMatrix::zeros(2, state_dim);
        h[(0, 0)] = 1.0;
        h[(1, 1)] = 1.0;
        Self {
            h,
            r: DMatrix::identity(2, 2) * (sigma_r * sigma_r),
            sigma_r,
        }
    }

    pub fn for_dim(&self, state_dim: usize) -> Self {
        Self::new(self.sigma_r, state_dim)
    }

    pub fn state_dim(&self) -> usize {
        self.h.ncols()
    }
}

/// Linear-Gaussian model of a jammer-induced return,
/// `N(z; B x + offset, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JammerObservation {
    pub b: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub d: DMatrix<f64>,
    /// 1-based index of the jammer component this observation belongs to.
    pub component_index: usize,
}

/// Unit line-of-sight vector from the radar to `position`.
pub fn los_unit_vector(position: &Vector2<f64>, radar: &Vector2<f64>) -> Result<Vector2<f64>> {
    let d = position - radar;
    let range = d.norm();
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::ZeroRange);
    }
    Ok(d / range)
}

/// Adaptive jammer model for component `component_index` of `c_total`:
/// the bias coordinate of that component is observed along the LOS.
pub fn build_jammer_obs_adaptive(
    los: &Vector2<f64>,
    component_index: usize,
    c_total: usize,
    meas: &MeasurementModel,
) -> Result<JammerObservation> {
    if component_index == 0 || component_index > c_total {
        return Err(Error::ComponentIndex {
            index: component_index,
            total: c_total,
        });
    }
    let mut b = DMatrix::zeros(2, KINEMATIC_DIM + c_total);
    b[(0, 0)] = 1.0;
    b[(1, 1)] = 1.0;
    let col = KINEMATIC_DIM + component_index - 1;
    b[(0, col)] = los.x;
    b[(1, col)] = los.y;
    Ok(JammerObservation {
        b,
        offset: DVector::zeros(2),
        d: meas.r.clone(),
        component_index,
    })
}

/// Non-adaptive jammer model: fixed bias `b_na` along the LOS and a noise
/// covariance with eigenvalue `eigvals[0]` along the LOS and `eigvals[1]`
/// across it.
pub fn build_jammer_obs_nonadaptive(los: &Vector2<f64>, b_na: f64, eigvals: [f64; 2]) -> JammerObservation {
    let mut b = DMatrix::zeros(2, KINEMATIC_DIM);
    b[(0, 0)] = 1.0;
    b[(1, 1)] = 1.0;
    let u = los_basis(los);
    let d = u * Matrix2::from_diagonal(&Vector2::new(eigvals[0], eigvals[1])) * u.transpose();
    let mut d = DMatrix::from_iterator(2, 2, d.iter().copied());
    crate::gaussmix::symmetrize(&mut d);
    JammerObservation {
        b,
        offset: DVector::from_column_slice((los * b_na).as_slice()),
        d,
        component_index: 1,
    }
}

/// Orthonormal basis whose first column is `los` and second its +90 degree
/// rotation.
pub fn los_basis(los: &Vector2<f64>) -> Matrix2<f64> {
    Matrix2::new(los.x, -los.y, los.y, los.x)
}

/// Axis-aligned observation region.
#[derive(Debug, Clone, PartialEq)]
pub struct Fov {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Fov {
    pub fn rect(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            lower: vec![x_min, y_min],
            upper: vec![x_max, y_max],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self {
            lower: vec![lo],
            upper: vec![hi],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.len() == self.lower.len()
            && z
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// Uniform clutter plus per-jammer-component Poisson rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterModel {
    /// Expected number of uniform clutter detections per scan.
    pub lambda0_bar: f64,
    /// Expected jammer-induced returns, one entry per jammer component.
    pub lambda_jam: Vec<f64>,
    pub fov: Fov,
}

impl ClutterModel {
    pub fn uniform(lambda0_bar: f64, fov: Fov) -> Self {
        Self {
            lambda0_bar,
            lambda_jam: Vec::new(),
            fov,
        }
    }

    pub fn with_jammer_rates(&self, lambda_jam: Vec<f64>) -> Self {
        Self {
            lambda_jam,
            ..self.clone()
        }
    }

    pub fn uniform_density(&self) -> f64 {
        1.0 / self.fov.volume()
    }

    /// Uniform density at `z`: `1/volume` inside the FOV, zero outside.
    pub fn uniform_density_at(&self, z: &[f64]) -> f64 {
        if self.fov.contains(z) {
            self.uniform_density()
        } else {
            0.0
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.lambda0_bar + self.lambda_jam.iter().sum::<f64>()
    }

    pub fn n_jammer(&self) -> usize {
        self.lambda_jam.len()
    }
}

/// Normalized mixture weights `w_i = lambda_i / sum_j lambda_j` for
/// `i = 0..=C`, index 0 being the uniform component.
pub fn clutter_mixture_weights(cm: &ClutterModel) -> Result<Vec<f64>> {
    let total = cm.total_rate();
    if !(total > 0.0) {
        return Err(Error::ZeroClutterRates);
    }
    Ok(std::iter::once(cm.lambda0_bar)
        .chain(cm.lambda_jam.iter().copied())
        .map(|l| l / total)
        .collect())
}
