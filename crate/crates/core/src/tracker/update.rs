//! Measurement update by explicit enumeration of association hypotheses.
//!
//! For each predicted component the set-valued likelihood is expanded as a
//! sum over assignments of every measurement to the target (at most one),
//! to uniform clutter, or to one of the jammer components. Measurements are
//! consumed one at a time in a canonical order, so the expansion is a tree:
//! with gating and partial pruning disabled the leaves are exactly the
//! `(1+C)^|Z| + |Z| (1+C)^(|Z|-1)` hypotheses of the closed-form recursion.
//!
//! Weights are carried in intensity form: a misdetection leaf is
//! `(1-p_D) * prod(lambda_a(z) c_a(z|x))` and a detection leaf replaces one
//! factor by `p_D g(z|x)`. The shared `exp(-lambda)` cancels on
//! normalization.

use std::rc::Rc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussmix::{
    gate_negative_bias, linear_gaussian_update, normalize_log_weights, reduce_mixture, GaussianComponent,
    Mixture,
};
use crate::models::{ClutterModel, JammerObservation, MeasurementModel, KINEMATIC_DIM};

use super::{Belief, JammerObsBuilder};

/// Association of one measurement inside a hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Target,
    Uniform,
    /// 1-based jammer component index.
    Jammer(usize),
}

/// One leaf of the association tree.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationHypothesis {
    /// Index of the predicted component this hypothesis extends.
    pub parent: usize,
    /// Source of every measurement, indexed like the input scan.
    pub sources: Vec<Source>,
    /// Unnormalized log-weight.
    pub log_weight: f64,
}

impl AssociationHypothesis {
    pub fn target_assignment(&self) -> Option<usize> {
        self.sources.iter().position(|s| *s == Source::Target)
    }

    /// Every non-target measurement with its clutter source.
    pub fn clutter_assignment(&self) -> impl Iterator<Item = (usize, Source)> + '_ {
        self.sources
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != Source::Target)
            .map(|(i, s)| (i, *s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateConfig {
    pub p_d: f64,
    pub prune_threshold: f64,
    pub cap: usize,
    /// Squared Mahalanobis gate for target and jammer associations,
    /// evaluated against the predicted component. `None` admits everything.
    pub gate: Option<f64>,
    /// Partial hypotheses lighter than this fraction of the heaviest one are
    /// dropped after each measurement. `None` disables.
    pub partial_prune: Option<f64>,
    /// Maximum partial hypotheses kept per predicted component.
    pub partial_cap: Option<usize>,
    /// Zero the weight of hypotheses with a negative bias estimate.
    pub sign_gate: bool,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self {
            p_d: 0.98,
            prune_threshold: 1e-5,
            cap: 100,
            gate: Some(50.0),
            partial_prune: Some(1e-9),
            partial_cap: Some(300),
            sign_gate: true,
        }
    }
}

impl UpdateConfig {
    /// Full enumeration without gating, pruning, capping or sign gating.
    pub fn exact(p_d: f64) -> Self {
        Self {
            p_d,
            prune_threshold: 0.0,
            cap: usize::MAX,
            gate: None,
            partial_prune: None,
            partial_cap: None,
            sign_gate: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateStats {
    /// Leaves of the association tree with non-zero weight, before reduction.
    pub raw_hypotheses: usize,
    /// Measurement/component pairs that entered the expansion.
    pub relevant_pairs: usize,
    /// Set when no hypothesis had non-zero weight and the prediction was kept.
    pub uninformative: bool,
}

/// Updated mixture with the association hypothesis behind each component.
#[derive(Debug, Clone)]
pub struct MixturePosterior {
    pub mixture: Mixture,
    /// Aligned with `mixture.components()`.
    pub hypotheses: Vec<AssociationHypothesis>,
    pub stats: UpdateStats,
}

#[derive(Debug, Clone)]
pub struct Posterior {
    pub belief: Belief,
    /// Aligned with `belief.mixture.components()`.
    pub hypotheses: Vec<AssociationHypothesis>,
    pub stats: UpdateStats,
}

/// Moments of a predicted observation, used for gating.
struct PredictedObs {
    mean: DVector<f64>,
    inv_cov: DMatrix<f64>,
}

impl PredictedObs {
    fn new(comp: &GaussianComponent, b: &DMatrix<f64>, offset: Option<&DVector<f64>>, noise: &DMatrix<f64>) -> Result<Self> {
        let mut mean = b * &comp.mean;
        if let Some(off) = offset {
            mean += off;
        }
        let s = b * &comp.cov * b.transpose() + noise;
        let inv_cov = s
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("predicted observation covariance"))?
            .inverse();
        Ok(Self { mean, inv_cov })
    }

    fn mahalanobis2(&self, z: &DVector<f64>) -> f64 {
        let d = z - &self.mean;
        (d.transpose() * &self.inv_cov * &d)[(0, 0)]
    }
}

struct Partial {
    comp: Rc<GaussianComponent>,
    log_w: f64,
    target: Option<usize>,
    sources: Vec<Source>,
}

/// Canonical processing order: lexicographic on coordinates, ties by index.
fn canonical_order(scan: &[DVector<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scan.len()).collect();
    order.sort_by(|&a, &b| {
        scan[a]
            .iter()
            .zip(scan[b].iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

fn ln(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Measurement update of a bare mixture.
///
/// `target_h`/`target_r` define the target likelihood, `builder` the jammer
/// models (one per entry of `clutter.lambda_jam`), and `bias_indices` the
/// state coordinates checked by the sign gate.
#[allow(clippy::too_many_arguments)]
pub fn update_mixture(
    predicted: &Mixture,
    scan: &[DVector<f64>],
    target_h: &DMatrix<f64>,
    target_r: &DMatrix<f64>,
    clutter: &ClutterModel,
    builder: &dyn JammerObsBuilder,
    cfg: &UpdateConfig,
    bias_indices: &[usize],
) -> Result<MixturePosterior> {
    if predicted.is_empty() {
        return Err(Error::EmptyMixture);
    }
    let n_z = scan.len();
    let order = canonical_order(scan);
    let log_uniform: Vec<f64> = scan
        .iter()
        .map(|z| ln(clutter.lambda0_bar * clutter.uniform_density_at(z.as_slice())))
        .collect();
    let log_lambda_jam: Vec<f64> = clutter.lambda_jam.iter().map(|&l| ln(l)).collect();
    let log_pd = ln(cfg.p_d);
    let log_miss = ln(1.0 - cfg.p_d);
    let miss_key = if log_miss.is_finite() { log_miss } else { 0.0 };
    let zero_offset = DVector::zeros(target_h.nrows());

    let mut stats = UpdateStats::default();
    let mut leaves: Vec<(f64, Rc<GaussianComponent>, AssociationHypothesis)> = Vec::new();

    for (parent, comp) in predicted.components().iter().enumerate() {
        let jammers: Vec<JammerObservation> = builder.build(comp)?;
        if jammers.len() != clutter.lambda_jam.len() {
            return Err(Error::Dimension(format!(
                "{} jammer models but {} jammer rates",
                jammers.len(),
                clutter.lambda_jam.len()
            )));
        }

        // Admissible options per measurement.
        let (target_pred, jammer_pred) = match cfg.gate {
            Some(_) => (
                Some(PredictedObs::new(comp, target_h, None, target_r)?),
                jammers
                    .iter()
                    .map(|j| PredictedObs::new(comp, &j.b, Some(&j.offset), &j.d))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => (None, Vec::new()),
        };
        let mut relevant: Vec<(usize, bool, Vec<usize>)> = Vec::new();
        let mut log_const = 0.0;
        for &zi in &order {
            let z = &scan[zi];
            let (target_ok, jammer_ok) = match cfg.gate {
                Some(gate) => (
                    log_pd.is_finite() && target_pred.as_ref().is_some_and(|p| p.mahalanobis2(z) <= gate),
                    (0..jammers.len())
                        .filter(|&i| log_lambda_jam[i].is_finite() && jammer_pred[i].mahalanobis2(z) <= gate)
                        .collect::<Vec<_>>(),
                ),
                None => (
                    log_pd.is_finite(),
                    (0..jammers.len()).filter(|&i| log_lambda_jam[i].is_finite()).collect(),
                ),
            };
            if cfg.gate.is_some() && !target_ok && jammer_ok.is_empty() {
                log_const += log_uniform[zi];
            } else {
                relevant.push((zi, target_ok, jammer_ok));
            }
        }
        stats.relevant_pairs += relevant.len();
        if log_const == f64::NEG_INFINITY {
            continue;
        }

        let mut partials = vec![Partial {
            comp: Rc::new(comp.clone()),
            log_w: ln(comp.weight) + log_const,
            target: None,
            sources: vec![Source::Uniform; n_z],
        }];

        for (zi, target_ok, jammer_ok) in &relevant {
            let z = &scan[*zi];
            let mut next = Vec::with_capacity(partials.len() * (2 + jammer_ok.len()));
            for p in &partials {
                if log_uniform[*zi].is_finite() {
                    next.push(Partial {
                        comp: Rc::clone(&p.comp),
                        log_w: p.log_w + log_uniform[*zi],
                        target: p.target,
                        sources: p.sources.clone(),
                    });
                }
                if *target_ok && p.target.is_none() {
                    let (post, ll) = linear_gaussian_update(&p.comp, target_h, &zero_offset, target_r, z)?;
                    let mut sources = p.sources.clone();
                    sources[*zi] = Source::Target;
                    next.push(Partial {
                        comp: Rc::new(post),
                        log_w: p.log_w + log_pd + ll,
                        target: Some(*zi),
                        sources,
                    });
                }
                for &i in jammer_ok {
                    let j = &jammers[i];
                    let (post, ll) = linear_gaussian_update(&p.comp, &j.b, &j.offset, &j.d, z)?;
                    let mut sources = p.sources.clone();
                    sources[*zi] = Source::Jammer(i + 1);
                    next.push(Partial {
                        comp: Rc::new(post),
                        log_w: p.log_w + log_lambda_jam[i] + ll,
                        target: p.target,
                        sources,
                    });
                }
            }
            partials = next;
            trim_partials(&mut partials, cfg, miss_key);
            if partials.is_empty() {
                break;
            }
        }

        for p in partials {
            let log_w = if p.target.is_some() { p.log_w } else { p.log_w + log_miss };
            if log_w == f64::NEG_INFINITY || log_w.is_nan() {
                continue;
            }
            stats.raw_hypotheses += 1;
            leaves.push((
                log_w,
                p.comp,
                AssociationHypothesis {
                    parent,
                    sources: p.sources,
                    log_weight: log_w,
                },
            ));
        }
    }

    if leaves.is_empty() {
        stats.uninformative = true;
        let hypotheses = predicted
            .components()
            .iter()
            .enumerate()
            .map(|(parent, c)| AssociationHypothesis {
                parent,
                sources: vec![Source::Uniform; n_z],
                log_weight: ln(c.weight),
            })
            .collect();
        return Ok(MixturePosterior {
            mixture: predicted.clone(),
            hypotheses,
            stats,
        });
    }

    let log_weights: Vec<f64> = leaves.iter().map(|l| l.0).collect();
    let weights = normalize_log_weights(&log_weights);
    let mut hypotheses = Vec::with_capacity(leaves.len());
    let mut components = Vec::with_capacity(leaves.len());
    for (idx, ((_, comp, hyp), w)) in leaves.into_iter().zip(weights).enumerate() {
        let comp = Rc::try_unwrap(comp).unwrap_or_else(|rc| (*rc).clone());
        components.push(GaussianComponent {
            weight: w,
            lineage: idx as u64,
            ..comp
        });
        hypotheses.push(Some(hyp));
    }
    let mut mixture = Mixture::new(components)?;
    if cfg.sign_gate {
        mixture = gate_negative_bias(&mixture, bias_indices);
    }
    let mut mixture = reduce_mixture(&mixture, cfg.prune_threshold, cfg.cap);

    let mut aligned = Vec::with_capacity(mixture.len());
    let mut relabeled = Vec::with_capacity(mixture.len());
    for (new_idx, c) in std::mem::replace(&mut mixture, Mixture::single(predicted.components()[0].clone()))
        .into_components()
        .into_iter()
        .enumerate()
    {
        let hyp = hypotheses[c.lineage as usize].take().expect("each leaf survives at most once");
        aligned.push(hyp);
        relabeled.push(GaussianComponent {
            lineage: new_idx as u64,
            ..c
        });
    }
    Ok(MixturePosterior {
        mixture: Mixture::new(relabeled)?,
        hypotheses: aligned,
        stats,
    })
}

fn trim_partials(partials: &mut Vec<Partial>, cfg: &UpdateConfig, miss_key: f64) {
    if cfg.partial_prune.is_none() && cfg.partial_cap.is_none() {
        return;
    }
    let key = |p: &Partial| if p.target.is_some() { p.log_w } else { p.log_w + miss_key };
    if let Some(rel) = cfg.partial_prune {
        let best = partials.iter().map(key).fold(f64::NEG_INFINITY, f64::max);
        let floor = best + rel.ln();
        partials.retain(|p| key(p) >= floor);
    }
    if let Some(cap) = cfg.partial_cap {
        if partials.len() > cap {
            partials.sort_by(|a, b| key(b).total_cmp(&key(a)));
            partials.truncate(cap);
        }
    }
}

/// Measurement update of a belief over `[p, v, b_1..b_C]`.
///
/// `clutter.lambda_jam` must hold one rate per jammer model produced by
/// `builder`. The sign gate acts on every bias coordinate.
pub fn update(
    predicted: &Belief,
    scan: &[DVector<f64>],
    meas: &MeasurementModel,
    clutter: &ClutterModel,
    builder: &dyn JammerObsBuilder,
    cfg: &UpdateConfig,
) -> Result<Posterior> {
    let meas = meas.for_dim(predicted.dim());
    let bias_indices: Vec<usize> = (KINEMATIC_DIM..predicted.dim()).collect();
    let out = update_mixture(
        &predicted.mixture,
        scan,
        &meas.h,
        &meas.r,
        clutter,
        builder,
        cfg,
        &bias_indices,
    )?;
    Ok(Posterior {
        belief: Belief {
            mixture: out.mixture,
            registry: predicted.registry.clone(),
            timestep: predicted.timestep,
        },
        hypotheses: out.hypotheses,
        stats: out.stats,
    })
}
