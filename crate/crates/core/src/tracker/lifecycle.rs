//! Jammer-component lifecycle: state augmentation on activation and bias
//! removal (or restart) when an estimate loses confidence.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussmix::{mixture_moments, GaussianComponent};
use crate::models::KINEMATIC_DIM;

use super::{Belief, ComponentStatus, JammerComponentRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifecycleThresholds {
    /// Activation std threshold, m.
    pub u_act: f64,
    /// Time below `u_act` before activation, s.
    pub t_act: f64,
    /// Retirement std threshold, m.
    pub u_dorm: f64,
    /// Time above `u_dorm` before retirement, s.
    pub t_dorm: f64,
}

impl Default for LifecycleThresholds {
    fn default() -> Self {
        Self {
            u_act: 5.0,
            t_act: 7.0,
            u_dorm: 5.0,
            t_dorm: 4.0,
        }
    }
}

/// `Single` keeps one jammer component that restarts to the prior instead
/// of retiring; `Multi` augments a fresh vigilant component on every
/// activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifecycleMode {
    Single,
    Multi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifecycleConfig {
    pub thresholds: LifecycleThresholds,
    pub delta: f64,
    /// Mean and variance of a fresh bias coordinate.
    pub prior_bias: (f64, f64),
    pub mode: LifecycleMode,
}

impl LifecycleConfig {
    pub fn new(delta: f64, mode: LifecycleMode) -> Self {
        Self {
            thresholds: LifecycleThresholds::default(),
            delta,
            prior_bias: (0.0, 500.0),
            mode,
        }
    }

    pub fn act_steps(&self) -> usize {
        (self.thresholds.t_act / self.delta).round() as usize
    }

    pub fn dorm_steps(&self) -> usize {
        (self.thresholds.t_dorm / self.delta).round() as usize
    }
}

/// Appends one bias coordinate with the given prior, independent of the
/// rest of the state, and registers a vigilant component for it.
pub fn augment_bias(belief: &Belief, prior_mean: f64, prior_var: f64) -> Belief {
    let n = belief.dim();
    let mixture = belief
        .mixture
        .map_components(|c| {
            let mut mean = DVector::zeros(n + 1);
            mean.rows_mut(0, n).copy_from(&c.mean);
            mean[n] = prior_mean;
            let mut cov = DMatrix::zeros(n + 1, n + 1);
            cov.view_mut((0, 0), (n, n)).copy_from(&c.cov);
            cov[(n, n)] = prior_var;
            Ok(GaussianComponent {
                weight: c.weight,
                mean,
                cov,
                lineage: c.lineage,
            })
        })
        .expect("augmentation preserves validity");
    let mut registry = belief.registry.clone();
    registry.push(JammerComponentRecord::vigilant(n));
    Belief {
        mixture,
        registry,
        timestep: belief.timestep,
    }
}

/// Marginalizes out the bias at state coordinate `slot` and marks its
/// component dormant. Later slots shift down by one.
pub fn remove_bias(belief: &Belief, slot: usize) -> Result<Belief> {
    let owner = belief
        .registry
        .iter()
        .position(|r| r.state_slot == Some(slot))
        .filter(|_| slot >= KINEMATIC_DIM && slot < belief.dim())
        .ok_or(Error::InvalidSlot(slot))?;
    let mixture = belief.mixture.map_components(|c| {
        Ok(GaussianComponent {
            weight: c.weight,
            mean: c.mean.clone().remove_row(slot),
            cov: c.cov.clone().remove_row(slot).remove_column(slot),
            lineage: c.lineage,
        })
    })?;
    let mut registry = belief.registry.clone();
    for (i, r) in registry.iter_mut().enumerate() {
        if i == owner {
            *r = JammerComponentRecord {
                status: ComponentStatus::Dormant,
                below_timer: 0,
                above_timer: 0,
                state_slot: None,
            };
        } else if let Some(s) = r.state_slot {
            if s > slot {
                r.state_slot = Some(s - 1);
            }
        }
    }
    Ok(Belief {
        mixture,
        registry,
        timestep: belief.timestep,
    })
}

/// Replaces the bias marginal at `slot` with an independent prior.
fn restart_bias(belief: &mut Belief, slot: usize, prior_mean: f64, prior_var: f64) {
    belief.mixture = belief
        .mixture
        .map_components(|c| {
            let mut c = c.clone();
            c.mean[slot] = prior_mean;
            c.cov.row_mut(slot).fill(0.0);
            c.cov.column_mut(slot).fill(0.0);
            c.cov[(slot, slot)] = prior_var;
            Ok(c)
        })
        .expect("restart preserves validity");
}

/// Advances the activation/retirement timers of every awake component from
/// the moment-matched bias std and applies the resulting transitions.
///
/// Retirement is handled before activation. A vigilant component, or any
/// component in `Single` mode, restarts to the prior instead of retiring,
/// so one vigilant component always remains.
pub fn manage_lifecycle(belief: &Belief, cfg: &LifecycleConfig) -> Belief {
    let (_, cov) = mixture_moments(&belief.mixture);
    let mut out = belief.clone();
    let th = &cfg.thresholds;
    for r in out.registry.iter_mut() {
        let Some(slot) = r.state_slot else { continue };
        let std = cov[(slot, slot)].max(0.0).sqrt();
        r.below_timer = if std < th.u_act { r.below_timer + 1 } else { 0 };
        r.above_timer = if std > th.u_dorm { r.above_timer + 1 } else { 0 };
    }

    let (prior_mean, prior_var) = cfg.prior_bias;
    let retiring: Vec<usize> = out
        .registry
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_awake() && r.above_timer >= cfg.dorm_steps())
        .map(|(i, _)| i)
        .collect();
    // Highest slot first so removals do not shift pending slots.
    let mut removals = Vec::new();
    for i in retiring {
        let r = &mut out.registry[i];
        let slot = r.state_slot.expect("awake");
        if r.status == ComponentStatus::Vigilant || cfg.mode == LifecycleMode::Single {
            *r = JammerComponentRecord::vigilant(slot);
            restart_bias(&mut out, slot, prior_mean, prior_var);
        } else {
            removals.push(slot);
        }
    }
    removals.sort_unstable_by(|a, b| b.cmp(a));
    for slot in removals {
        out = remove_bias(&out, slot).expect("slot is awake");
    }

    let activating: Vec<usize> = out
        .registry
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status == ComponentStatus::Vigilant && r.is_awake() && r.below_timer >= cfg.act_steps())
        .map(|(i, _)| i)
        .collect();
    for i in activating {
        out.registry[i].status = ComponentStatus::Active;
        if cfg.mode == LifecycleMode::Multi {
            out = augment_bias(&out, prior_mean, prior_var);
        }
    }
    out
}
