//! Gaussian and Gaussian-mixture numerics.
//!
//! Densities, the conjugate linear-Gaussian measurement update, and the
//! mixture reduction steps (pruning, capping, sign gating) used by the
//! tracker. Everything here is a pure function over value types.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Opaque association label. Used only to make ordering decisions stable.
pub type Lineage = u64;

/// One weighted data-association hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub lineage: Lineage,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self {
            weight,
            mean,
            cov,
            lineage: 0,
        }
    }

    pub fn with_lineage(mut self, lineage: Lineage) -> Self {
        self.lineage = lineage;
        self
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// An ordered list of Gaussian components sharing one state dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    components: Vec<GaussianComponent>,
    dim: usize,
}

impl Mixture {
    /// Builds a mixture, checking that every component has the same shape.
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyMixture)?;
        let dim = first.dim();
        for c in &components {
            if c.mean.len() != dim || c.cov.nrows() != dim || c.cov.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "component of dim {} (cov {}x{}) in mixture of dim {dim}",
                    c.mean.len(),
                    c.cov.nrows(),
                    c.cov.ncols()
                )));
            }
        }
        Ok(Self { components, dim })
    }

    pub fn single(component: GaussianComponent) -> Self {
        let dim = component.dim();
        Self {
            components: vec![GaussianComponent {
                weight: 1.0,
                ..component
            }],
            dim,
        }
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn into_components(self) -> Vec<GaussianComponent> {
        self.components
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Rescales weights to sum to one. A zero-mass mixture becomes uniform.
    pub fn normalize(&mut self) {
        let total = self.total_weight();
        if total > 0.0 && total.is_finite() {
            for c in &mut self.components {
                c.weight /= total;
            }
        } else {
            let w = 1.0 / self.components.len() as f64;
            for c in &mut self.components {
                c.weight = w;
            }
        }
    }

    /// Applies `f` to every component, keeping weights and lineage.
    pub fn map_components<F>(&self, f: F) -> Result<Mixture>
    where
        F: FnMut(&GaussianComponent) -> Result<GaussianComponent>,
    {
        let mapped = self
            .components
            .iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        Mixture::new(mapped)
    }
}

/// `ln N(x; mean, cov)`.
pub fn gaussian_logpdf(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    let n = x.len();
    if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
        return Err(Error::Dimension(format!(
            "logpdf with x of dim {n}, mean {}, cov {}x{}",
            mean.len(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    let chol = cov
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("gaussian covariance"))?;
    let diff = x - mean;
    let solved = chol.l().solve_lower_triangular(&diff).ok_or(Error::Singular("cholesky factor"))?;
    let maha = solved.norm_squared();
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok(-0.5 * (maha + log_det + n as f64 * (2.0 * PI).ln()))
}

/// Exact conjugate update of `prior` with the likelihood
/// `N(z; obs_matrix x + obs_offset, obs_cov)`.
///
/// Returns the posterior (weight and lineage copied from the prior) and the
/// marginal log-likelihood `ln N(z; H m + b, H P H' + R)`. The covariance
/// is propagated in Joseph form and symmetrized.
pub fn linear_gaussian_update(
    prior: &GaussianComponent,
    obs_matrix: &DMatrix<f64>,
    obs_offset: &DVector<f64>,
    obs_cov: &DMatrix<f64>,
    z: &DVector<f64>,
) -> Result<(GaussianComponent, f64)> {
    let n = prior.dim();
    let m = z.len();
    if obs_matrix.nrows() != m
        || obs_matrix.ncols() != n
        || obs_offset.len() != m
        || obs_cov.nrows() != m
        || obs_cov.ncols() != m
        || prior.cov.nrows() != n
        || prior.cov.ncols() != n
    {
        return Err(Error::Dimension(format!(
            "update of {n}-dim state with {}x{} observation matrix, {}-dim offset, {}x{} noise and {m}-dim z",
            obs_matrix.nrows(),
            obs_matrix.ncols(),
            obs_offset.len(),
            obs_cov.nrows(),
            obs_cov.ncols()
        )));
    }

    let innovation = z - obs_matrix * &prior.mean - obs_offset;
    let hp = obs_matrix * &prior.cov;
    let mut s = &hp * obs_matrix.transpose() + obs_cov;
    symmetrize(&mut s);
    let chol = s
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("innovation covariance"))?;

    // S is symmetric, so K' = S^-1 H P.
    let gain = chol.solve(&hp).transpose();
    let mean = &prior.mean + &gain * &innovation;

    let i_kh = DMatrix::identity(n, n) - &gain * obs_matrix;
    let mut cov = &i_kh * &prior.cov * i_kh.transpose() + &gain * obs_cov * gain.transpose();
    symmetrize(&mut cov);

    let whitened = chol
        .l()
        .solve_lower_triangular(&innovation)
        .ok_or(Error::Singular("cholesky factor"))?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let loglik = -0.5 * (whitened.norm_squared() + log_det + m as f64 * (2.0 * PI).ln());

    Ok((
        GaussianComponent {
            weight: prior.weight,
            mean,
            cov,
            lineage: prior.lineage,
        },
        loglik,
    ))
}

/// Replaces `p` with `(p + p')/2`.
pub fn symmetrize(p: &mut DMatrix<f64>) {
    let n = p.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = avg;
            p[(j, i)] = avg;
        }
    }
}

/// `ln(sum(exp(x)))`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Converts log-weights into normalized linear weights.
pub fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(log_weights);
    if lse == f64::NEG_INFINITY {
        return vec![0.0; log_weights.len()];
    }
    log_weights.iter().map(|lw| (lw - lse).exp()).collect()
}

/// Ordering used for capping: weight descending, then lineage ascending.
fn rank_order(a: &GaussianComponent, b: &GaussianComponent) -> Ordering {
    b.weight
        .total_cmp(&a.weight)
        .then_with(|| a.lineage.cmp(&b.lineage))
}

fn argmax_component(components: &[GaussianComponent]) -> Option<&GaussianComponent> {
    components.iter().min_by(|a, b| rank_order(a, b))
}

/// Prunes components below `prune_threshold`, keeps at most `cap` of the
/// highest-weight survivors and renormalizes.
///
/// Zero-weight components are always dropped. If nothing survives the
/// threshold, the single highest-weight component is kept with weight 1.
pub fn reduce_mixture(mix: &Mixture, prune_threshold: f64, cap: usize) -> Mixture {
    let mut normalized = mix.clone();
    normalized.normalize();
    let mut kept: Vec<GaussianComponent> = normalized
        .components
        .iter()
        .filter(|c| c.weight > 0.0 && c.weight >= prune_threshold)
        .cloned()
        .collect();

    if kept.is_empty() {
        let best = argmax_component(&normalized.components)
            .expect("mixture is never empty")
            .clone();
        return Mixture::single(best);
    }

    kept.sort_by(rank_order);
    kept.truncate(cap.max(1));
    let mut out = Mixture {
        components: kept,
        dim: mix.dim,
    };
    out.normalize();
    out
}

/// Zeroes the weight of every component whose mean is negative at any of
/// `bias_indices`, then renormalizes. If every component is gated, the
/// highest-weight one is kept with weight 1.
pub fn gate_negative_bias(mix: &Mixture, bias_indices: &[usize]) -> Mixture {
    let negative = |c: &GaussianComponent| bias_indices.iter().any(|&i| c.mean[i] < 0.0);
    if bias_indices.is_empty() || !mix.components.iter().any(negative) {
        return mix.clone();
    }
    let any_survivor = mix
        .components
        .iter()
        .any(|c| c.weight > 0.0 && !negative(c));
    if !any_survivor {
        let best = argmax_component(&mix.components)
            .expect("mixture is never empty")
            .clone();
        return Mixture::single(best);
    }
    let mut out = mix.clone();
    for c in &mut out.components {
        if negative(c) {
            c.weight = 0.0;
        }
    }
    out.normalize();
    out
}

/// Moment-matched single Gaussian of a normalized mixture.
pub fn mixture_moments(mix: &Mixture) -> (DVector<f64>, DMatrix<f64>) {
    let n = mix.dim;
    let total = mix.total_weight();
    let scale = if total > 0.0 { 1.0 / total } else { 1.0 };
    let mut mean = DVector::zeros(n);
    for c in &mix.components {
        mean.axpy(c.weight * scale, &c.mean, 1.0);
    }
    let mut cov = DMatrix::zeros(n, n);
    for c in &mix.components {
        let w = c.weight * scale;
        let d = &c.mean - &mean;
        cov += (&c.cov + &d * d.transpose()) * w;
    }
    symmetrize(&mut cov);
    (mean, cov)
}

/// Checks symmetry and positive definiteness, with eigenvalues required to
/// exceed `1e-9 * trace`.
pub fn is_spd(p: &DMatrix<f64>) -> bool {
    if p.nrows() != p.ncols() {
        return false;
    }
    let scale = p.trace().abs().max(f64::MIN_POSITIVE);
    for i in 0..p.nrows() {
        for j in 0..i {
            if (p[(i, j)] - p[(j, i)]).abs() > 1e-9 * scale {
                return false;
            }
        }
    }
    let eig = p.clone().symmetric_eigen();
    eig.eigenvalues.iter().all(|&l| l > 1e-9 * scale)
}
