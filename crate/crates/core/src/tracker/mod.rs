//! Single-target Gaussian-mixture Bayes recursion with multiple hypothesis
//! tracking, adaptive range-bias estimation and jamming detection.
//!
//! A step of the resilient tracker is
//! [`predict`] → [`update`] → [`detect_jamming`] → [`manage_lifecycle`];
//! [`RfsTracker`] wires these together.

mod detect;
mod filter;
mod lifecycle;
mod update;

use nalgebra::{DMatrix, DVector, Vector2};

use crate::error::{Error, Result};
use crate::gaussmix::{mixture_moments, symmetrize, GaussianComponent, Mixture};
use crate::models::{
    build_jammer_obs_adaptive, build_jammer_obs_nonadaptive, los_unit_vector, JammerObservation,
    MeasurementModel, MotionModel, KINEMATIC_DIM,
};

pub use detect::{detect_jamming, jamming_probabilities};
pub use filter::{BiasEstimate, RfsTracker, RfsTrackerConfig, StepReport};
pub use lifecycle::{augment_bias, manage_lifecycle, remove_bias, LifecycleConfig, LifecycleMode, LifecycleThresholds};
pub use update::{
    update, update_mixture, AssociationHypothesis, MixturePosterior, Posterior, Source, UpdateConfig,
    UpdateStats,
};

/// Lifecycle status of a jammer mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentStatus {
    /// Watching for a new attack.
    Vigilant,
    /// Mitigating a confirmed attack.
    Active,
    /// Retired; no longer part of the state.
    Dormant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammerComponentRecord {
    pub status: ComponentStatus,
    /// Consecutive steps with bias std below the activation threshold.
    pub below_timer: usize,
    /// Consecutive steps with bias std above the dormancy threshold.
    pub above_timer: usize,
    /// State coordinate of this component's bias; `None` when dormant.
    pub state_slot: Option<usize>,
}

impl JammerComponentRecord {
    pub fn vigilant(slot: usize) -> Self {
        Self {
            status: ComponentStatus::Vigilant,
            below_timer: 0,
            above_timer: 0,
            state_slot: Some(slot),
        }
    }

    pub fn is_awake(&self) -> bool {
        self.state_slot.is_some()
    }
}

/// Posterior (or predicted) belief: a normalized mixture over
/// `[p, v, b_1..b_C]` plus the jammer-component registry.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    pub mixture: Mixture,
    pub registry: Vec<JammerComponentRecord>,
    pub timestep: usize,
}

impl Belief {
    /// Belief without bias states.
    pub fn kinematic(prior: GaussianComponent) -> Self {
        Self {
            mixture: Mixture::single(prior),
            registry: Vec::new(),
            timestep: 0,
        }
    }

    /// Kinematic prior augmented with one vigilant bias component.
    pub fn adaptive(prior: GaussianComponent, bias_mean: f64, bias_var: f64) -> Self {
        augment_bias(&Self::kinematic(prior), bias_mean, bias_var)
    }

    pub fn dim(&self) -> usize {
        self.mixture.dim()
    }

    /// Number of awake (vigilant or active) jammer components.
    pub fn awake_count(&self) -> usize {
        self.registry.iter().filter(|r| r.is_awake()).count()
    }

    /// State coordinates of the awake biases, in slot order.
    pub fn bias_slots(&self) -> Vec<usize> {
        let mut slots: Vec<usize> = self.registry.iter().filter_map(|r| r.state_slot).collect();
        slots.sort_unstable();
        slots
    }

    /// Checks `dim = 4 + awake` and that at most one awake record is vigilant.
    pub fn check_invariants(&self) -> Result<()> {
        let awake = self.awake_count();
        if self.dim() != KINEMATIC_DIM + awake {
            return Err(Error::Dimension(format!(
                "belief of dim {} with {awake} awake bias components",
                self.dim()
            )));
        }
        let vigilant = self
            .registry
            .iter()
            .filter(|r| r.is_awake() && r.status == ComponentStatus::Vigilant)
            .count();
        if vigilant > 1 {
            return Err(Error::Dimension(format!("{vigilant} vigilant components")));
        }
        Ok(())
    }
}

/// Source of jammer observation models for each predicted component.
pub trait JammerObsBuilder {
    /// Jammer observation models for one predicted component, component
    /// indices `1..=C` in order.
    fn build(&self, component: &GaussianComponent) -> Result<Vec<JammerObservation>>;
}

/// The same observation models for every component.
#[derive(Debug, Clone, Default)]
pub struct FixedJammerObs(pub Vec<JammerObservation>);

impl JammerObsBuilder for FixedJammerObs {
    fn build(&self, _component: &GaussianComponent) -> Result<Vec<JammerObservation>> {
        Ok(self.0.clone())
    }
}

/// Which clutter model the tracker assumes for jammer returns.
#[derive(Debug, Clone, PartialEq)]
pub enum JammerModel {
    /// Uniform clutter only.
    Naive,
    /// One estimated bias per awake component, observed along the LOS.
    Adaptive,
    /// Fixed bias along the LOS with a covariance stretched along it.
    NonAdaptive { b_na: f64, eigvals: [f64; 2] },
}

/// Builds LOS-dependent jammer models from each component's predicted
/// position, seen from a radar at `radar`.
#[derive(Debug, Clone)]
pub struct RadarJammerObs<'a> {
    pub model: &'a JammerModel,
    pub radar: Vector2<f64>,
    pub meas: &'a MeasurementModel,
}

impl JammerObsBuilder for RadarJammerObs<'_> {
    fn build(&self, component: &GaussianComponent) -> Result<Vec<JammerObservation>> {
        if matches!(self.model, JammerModel::Naive) {
            return Ok(Vec::new());
        }
        let position = Vector2::new(component.mean[0], component.mean[1]);
        let los = los_unit_vector(&position, &self.radar)?;
        match self.model {
            JammerModel::Naive => unreachable!(),
            JammerModel::Adaptive => {
                let c_total = component.dim() - KINEMATIC_DIM;
                (1..=c_total)
                    .map(|i| build_jammer_obs_adaptive(&los, i, c_total, self.meas))
                    .collect()
            }
            JammerModel::NonAdaptive { b_na, eigvals } => {
                Ok(vec![build_jammer_obs_nonadaptive(&los, *b_na, *eigvals)])
            }
        }
    }
}

/// Chapman-Kolmogorov prediction of every component; weights unchanged.
pub fn predict(belief: &Belief, motion: &MotionModel) -> Result<Belief> {
    let n = belief.dim();
    if motion.f.nrows() != n || motion.q.nrows() != n {
        return Err(Error::Dimension(format!(
            "motion model of dim {} for belief of dim {n}",
            motion.f.nrows()
        )));
    }
    let ft = motion.f.transpose();
    let mixture = belief.mixture.map_components(|c| {
        let mut cov = &motion.f * &c.cov * &ft + &motion.q;
        symmetrize(&mut cov);
        Ok(GaussianComponent {
            weight: c.weight,
            mean: &motion.f * &c.mean,
            cov,
            lineage: c.lineage,
        })
    })?;
    Ok(Belief {
        mixture,
        registry: belief.registry.clone(),
        timestep: belief.timestep + 1,
    })
}

/// Point estimate from the moment-matched mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEstimate {
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
    /// Bias means in slot order.
    pub biases: Vec<f64>,
    /// Moment-matched bias standard deviations in slot order.
    pub bias_std: Vec<f64>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

pub fn estimate_state(belief: &Belief) -> StateEstimate {
    let (mean, cov) = mixture_moments(&belief.mixture);
    let slots = KINEMATIC_DIM..belief.dim();
    StateEstimate {
        position: Vector2::new(mean[0], mean[1]),
        velocity: Vector2::new(mean[2], mean[3]),
        biases: slots.clone().map(|s| mean[s]).collect(),
        bias_std: slots.map(|s| cov[(s, s)].max(0.0).sqrt()).collect(),
        mean,
        cov,
    }
}
