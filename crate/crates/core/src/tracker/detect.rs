//! Jamming detection from the posterior association hypotheses.
//!
//! A hypothesis declares an attack when at least one of its secondary
//! (non-target) measurements is not a uniform false alarm:
//! `P(A) = 1 - prod_s P(s in W)`, with
//! `P(s in W) = w_0 u(s) / (w_0 u(s) + sum_i w_i N(s; B_i m + o, B_i P B_i' + D))`
//! evaluated at the parent predicted component.

use nalgebra::DVector;

use crate::error::Result;
use crate::gaussmix::gaussian_logpdf;
use crate::models::{clutter_mixture_weights, ClutterModel};

use super::{Belief, JammerObsBuilder, Posterior};

/// `P(A)` for every posterior hypothesis, aligned with
/// `posterior.belief.mixture.components()`.
pub fn jamming_probabilities(
    posterior: &Posterior,
    scan: &[DVector<f64>],
    predicted: &Belief,
    clutter: &ClutterModel,
    builder: &dyn JammerObsBuilder,
) -> Result<Vec<f64>> {
    let n_hyp = posterior.hypotheses.len();
    if scan.is_empty() || clutter.lambda_jam.iter().all(|&l| l <= 0.0) || clutter.total_rate() <= 0.0 {
        return Ok(vec![0.0; n_hyp]);
    }
    let w = clutter_mixture_weights(clutter)?;

    // Uniform-clutter probability of each measurement under each parent,
    // computed lazily since only parents of surviving hypotheses matter.
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; predicted.mixture.len()];
    let mut out = Vec::with_capacity(n_hyp);
    for hyp in &posterior.hypotheses {
        if cache[hyp.parent].is_none() {
            let parent = &predicted.mixture.components()[hyp.parent];
            let models = builder.build(parent)?;
            let mut factors = Vec::with_capacity(scan.len());
            for z in scan {
                let uniform = w[0] * clutter.uniform_density_at(z.as_slice());
                let mut jammed = 0.0;
                for (j, wi) in models.iter().zip(&w[1..]) {
                    if *wi <= 0.0 {
                        continue;
                    }
                    let mean = &j.b * &parent.mean + &j.offset;
                    let cov = &j.b * &parent.cov * j.b.transpose() + &j.d;
                    jammed += wi * gaussian_logpdf(z, &mean, &cov)?.exp();
                }
                let denom = uniform + jammed;
                factors.push(if denom > 0.0 { uniform / denom } else { 1.0 });
            }
            cache[hyp.parent] = Some(factors);
        }
        let factors = cache[hyp.parent].as_ref().expect("filled above");
        let p_all_false: f64 = hyp.clutter_assignment().map(|(i, _)| factors[i]).product();
        out.push((1.0 - p_all_false).clamp(0.0, 1.0));
    }
    Ok(out)
}

/// Posterior-weighted average of the per-hypothesis jamming probability.
pub fn detect_jamming(
    posterior: &Posterior,
    scan: &[DVector<f64>],
    predicted: &Belief,
    clutter: &ClutterModel,
    builder: &dyn JammerObsBuilder,
) -> Result<f64> {
    let probs = jamming_probabilities(posterior, scan, predicted, clutter, builder)?;
    let p: f64 = posterior
        .belief
        .mixture
        .components()
        .iter()
        .zip(&probs)
        .map(|(c, p)| c.weight * p)
        .sum();
    Ok(p.clamp(0.0, 1.0))
}
