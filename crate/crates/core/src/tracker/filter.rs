//! The full recursion as a stateful tracker.

use nalgebra::{dvector, DMatrix, DVector, Vector2};

use crate::error::Result;
use crate::gaussmix::GaussianComponent;
use crate::models::{build_cv_model, ClutterModel, Fov, MeasurementModel};

use super::{
    detect_jamming, estimate_state, manage_lifecycle, predict, update, Belief, ComponentStatus, JammerModel,
    LifecycleConfig, LifecycleMode, RadarJammerObs, UpdateConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RfsTrackerConfig {
    pub delta: f64,
    /// Process noise std, m.
    pub sigma_q: f64,
    /// Bias random-walk scale relative to the kinematic process noise.
    pub alpha: f64,
    pub sigma_r: f64,
    pub fov: Fov,
    /// Expected uniform false alarms per scan.
    pub lambda0_bar: f64,
    /// Expected returns per scan of each jammer component.
    pub lambda_jam: f64,
    pub jammer: JammerModel,
    pub update: UpdateConfig,
    /// Only used by the adaptive model.
    pub lifecycle: LifecycleConfig,
    pub radar: Vector2<f64>,
    /// Kinematic prior `[px, py, vx, vy]`.
    pub prior: GaussianComponent,
}

impl RfsTrackerConfig {
    pub fn new(jammer: JammerModel) -> Self {
        Self {
            delta: 0.5,
            sigma_q: 5f64.sqrt(),
            alpha: 10.0,
            sigma_r: 5f64.sqrt(),
            fov: Fov::rect(0.0, 1000.0, 0.0, 1000.0),
            lambda0_bar: 20.0,
            lambda_jam: 3.0,
            jammer,
            update: UpdateConfig::default(),
            lifecycle: LifecycleConfig::new(0.5, LifecycleMode::Single),
            radar: Vector2::zeros(),
            prior: GaussianComponent::new(
                1.0,
                dvector![500.0, 500.0, 0.0, 0.0],
                DMatrix::from_diagonal(&dvector![1e4, 1e4, 1e2, 1e2]),
            ),
        }
    }

    pub fn naive() -> Self {
        Self::new(JammerModel::Naive)
    }

    pub fn adaptive(mode: LifecycleMode) -> Self {
        let mut cfg = Self::new(JammerModel::Adaptive);
        cfg.lifecycle.mode = mode;
        cfg
    }

    pub fn nonadaptive() -> Self {
        Self::new(JammerModel::NonAdaptive {
            b_na: 70.0,
            eigvals: [500.0, 1.0],
        })
    }

    fn clutter(&self, n_jammer: usize) -> ClutterModel {
        ClutterModel::uniform(self.lambda0_bar, self.fov.clone()).with_jammer_rates(vec![self.lambda_jam; n_jammer])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasEstimate {
    pub mean: f64,
    pub std: f64,
    pub status: ComponentStatus,
}

/// Outputs of one tracker step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
    /// Probability that the scan contains a deceptive return.
    pub p_jam: f64,
    /// Moment-matched bias of every awake component, in slot order, as
    /// estimated by this update.
    pub biases: Vec<BiasEstimate>,
    /// Awake jammer components after the lifecycle step.
    pub awake: usize,
    pub n_components: usize,
}

/// Gaussian-mixture tracker over a sequence of scans.
#[derive(Debug, Clone)]
pub struct RfsTracker {
    cfg: RfsTrackerConfig,
    meas: MeasurementModel,
    belief: Belief,
}

impl RfsTracker {
    pub fn new(cfg: RfsTrackerConfig) -> Self {
        let belief = match cfg.jammer {
            JammerModel::Adaptive => {
                let (m, v) = cfg.lifecycle.prior_bias;
                Belief::adaptive(cfg.prior.clone(), m, v)
            }
            _ => Belief::kinematic(cfg.prior.clone()),
        };
        let meas = MeasurementModel::new(cfg.sigma_r, 4);
        Self { cfg, meas, belief }
    }

    pub fn config(&self) -> &RfsTrackerConfig {
        &self.cfg
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    /// predict, update, detect, estimate, lifecycle.
    pub fn step(&mut self, scan: &[DVector<f64>]) -> Result<StepReport> {
        let n_bias = self.belief.dim() - 4;
        let motion = build_cv_model(self.cfg.delta, self.cfg.sigma_q, self.cfg.alpha, n_bias);
        let predicted = predict(&self.belief, &motion)?;
        let n_jammer = match self.cfg.jammer {
            JammerModel::Naive => 0,
            JammerModel::Adaptive => n_bias,
            JammerModel::NonAdaptive { .. } => 1,
        };
        let clutter = self.cfg.clutter(n_jammer);
        let builder = RadarJammerObs {
            model: &self.cfg.jammer,
            radar: self.cfg.radar,
            meas: &self.meas,
        };
        let posterior = update(&predicted, scan, &self.meas, &clutter, &builder, &self.cfg.update)?;
        let p_jam = if n_jammer == 0 {
            0.0
        } else {
            detect_jamming(&posterior, scan, &predicted, &clutter, &builder)?
        };
        let est = estimate_state(&posterior.belief);
        let mut slots: Vec<(usize, ComponentStatus)> = posterior
            .belief
            .registry
            .iter()
            .filter_map(|r| r.state_slot.map(|s| (s, r.status)))
            .collect();
        slots.sort_unstable_by_key(|s| s.0);
        let biases = slots
            .into_iter()
            .map(|(s, status)| BiasEstimate {
                mean: est.biases[s - 4],
                std: est.bias_std[s - 4],
                status,
            })
            .collect();
        let n_components = posterior.belief.mixture.len();

        self.belief = match self.cfg.jammer {
            JammerModel::Adaptive => manage_lifecycle(&posterior.belief, &self.cfg.lifecycle),
            _ => posterior.belief,
        };
        Ok(StepReport {
            position: est.position,
            velocity: est.velocity,
            p_jam,
            biases,
            awake: self.belief.awake_count(),
            n_components,
        })
    }
}
