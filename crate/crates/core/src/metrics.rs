//! Monte Carlo harness and per-step aggregates.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bench::{pcrb_curve, ClairvoyantTracker};
use crate::error::{Error, Result};
use crate::gaussmix::GaussianComponent;
use crate::models::{build_cv_model, MeasurementModel};
use crate::sim::{generate_scans, generate_trajectory, ScenarioConfig, TruthRecord};
use crate::tracker::{
    JammerModel, LifecycleMode, LifecycleThresholds, RfsTracker, RfsTrackerConfig, UpdateConfig,
};

/// Environment variable capping the worker threads of the harness.
pub const THREADS_ENV: &str = "RGPO_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrackerKind {
    Adaptive,
    NonAdaptive,
    Naive,
    Clairvoyant,
}

impl TrackerKind {
    pub const ALL: [TrackerKind; 4] = [Self::Adaptive, Self::NonAdaptive, Self::Naive, Self::Clairvoyant];

    pub fn name(self) -> &'static str {
        match self {
            Self::Adaptive => "adaptive",
            Self::NonAdaptive => "nonadaptive",
            Self::Naive => "naive",
            Self::Clairvoyant => "clairvoyant",
        }
    }
}

impl fmt::Display for TrackerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrackerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown tracker '{s}' (expected adaptive, nonadaptive, naive or clairvoyant)"))
    }
}

/// Tracker parameters shared across scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerParams {
    pub prune_threshold: f64,
    pub cap: usize,
    pub alpha: f64,
    pub lambda_jam: f64,
    pub b_na: f64,
    pub eigvals: [f64; 2],
    pub lifecycle: LifecycleThresholds,
    pub prior_bias: (f64, f64),
    /// `None` picks single-component mode for scenarios 1 and 2 and
    /// multi-component mode otherwise.
    pub lifecycle_mode: Option<LifecycleMode>,
    pub gate: Option<f64>,
    pub prior_mean: [f64; 4],
    pub prior_var: [f64; 4],
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            prune_threshold: 1e-5,
            cap: 100,
            alpha: 10.0,
            lambda_jam: 3.0,
            b_na: 70.0,
            eigvals: [500.0, 1.0],
            lifecycle: LifecycleThresholds::default(),
            prior_bias: (0.0, 500.0),
            lifecycle_mode: None,
            gate: UpdateConfig::default().gate,
            prior_mean: [500.0, 500.0, 0.0, 0.0],
            prior_var: [1e4, 1e4, 1e2, 1e2],
        }
    }
}

impl TrackerParams {
    pub fn prior(&self) -> GaussianComponent {
        GaussianComponent::new(
            1.0,
            nalgebra::DVector::from_column_slice(&self.prior_mean),
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.prior_var)),
        )
    }

    /// Configuration of an RFS tracker (adaptive, non-adaptive or naive) for
    /// a scenario. Returns `None` for the clairvoyant tracker.
    pub fn rfs_config(&self, kind: TrackerKind, scenario: &ScenarioConfig) -> Option<RfsTrackerConfig> {
        let jammer = match kind {
            TrackerKind::Adaptive => JammerModel::Adaptive,
            TrackerKind::NonAdaptive => JammerModel::NonAdaptive {
                b_na: self.b_na,
                eigvals: self.eigvals,
            },
            TrackerKind::Naive => JammerModel::Naive,
            TrackerKind::Clairvoyant => return None,
        };
        let mut cfg = RfsTrackerConfig::new(jammer);
        cfg.delta = scenario.delta;
        cfg.sigma_q = scenario.sigma_q;
        cfg.sigma_r = scenario.sigma_r;
        cfg.alpha = self.alpha;
        cfg.fov = scenario.clutter.fov.clone();
        cfg.lambda0_bar = scenario.clutter.lambda0_bar;
        cfg.lambda_jam = self.lambda_jam;
        cfg.radar = scenario.radar_position;
        cfg.prior = self.prior();
        cfg.update.p_d = scenario.p_d;
        cfg.update.prune_threshold = self.prune_threshold;
        cfg.update.cap = self.cap;
        cfg.update.gate = self.gate;
        cfg.lifecycle.delta = scenario.delta;
        cfg.lifecycle.thresholds = self.lifecycle;
        cfg.lifecycle.prior_bias = self.prior_bias;
        cfg.lifecycle.mode = self.lifecycle_mode.unwrap_or(if scenario.id <= 2 {
            LifecycleMode::Single
        } else {
            LifecycleMode::Multi
        });
        Some(cfg)
    }
}

/// One tracker over one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub positions: Vec<Vector2<f64>>,
    /// `NaN` for trackers without a detector.
    pub p_jam: Vec<f64>,
    /// Mean and std of the first awake bias; `NaN` when not estimated.
    pub bias_mean: Vec<f64>,
    pub bias_std: Vec<f64>,
    pub awake: Vec<usize>,
}

impl RunRecord {
    fn with_capacity(n: usize) -> Self {
        Self {
            positions: Vec::with_capacity(n),
            p_jam: Vec::with_capacity(n),
            bias_mean: Vec::with_capacity(n),
            bias_std: Vec::with_capacity(n),
            awake: Vec::with_capacity(n),
        }
    }
}

/// Per-step statistics of one tracker across replicas, steps `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerSeries {
    pub kind: TrackerKind,
    pub rmse: Vec<f64>,
    pub p_jam: Vec<f64>,
    pub bias_est: Vec<f64>,
    pub bias_std: Vec<f64>,
    pub c_k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTable {
    pub n_steps: usize,
    pub n_runs: usize,
    /// Bias of the earliest active attack per step; `NaN` when none.
    pub bias_true: Vec<f64>,
    pub series: Vec<TrackerSeries>,
    /// Position bound per step, for loss-of-efficiency runs.
    pub pcrb: Option<Vec<f64>>,
}

impl AggregateTable {
    pub fn series(&self, kind: TrackerKind) -> Option<&TrackerSeries> {
        self.series.iter().find(|s| s.kind == kind)
    }
}

#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    pub truth: TruthRecord,
    /// `records[t][r]`: tracker `t` (in request order) on replica `r`.
    pub records: Vec<Vec<RunRecord>>,
    pub table: AggregateTable,
}

/// `sqrt(mean_r |p_hat - p|^2)` per step.
pub fn position_rmse(estimates: &[Vec<Vector2<f64>>], truth: &[Vector2<f64>]) -> Result<Vec<f64>> {
    for e in estimates {
        if e.len() != truth.len() {
            return Err(Error::Length {
                expected: truth.len(),
                got: e.len(),
            });
        }
    }
    if estimates.is_empty() {
        return Ok(vec![f64::NAN; truth.len()]);
    }
    let n = estimates.len() as f64;
    Ok((0..truth.len())
        .map(|k| (estimates.iter().map(|e| (e[k] - truth[k]).norm_squared()).sum::<f64>() / n).sqrt())
        .collect())
}

fn nan_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.filter(|v| !v.is_nan()).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn run_replica(
    cfg: &ScenarioConfig,
    truth: &TruthRecord,
    trackers: &[TrackerKind],
    params: &TrackerParams,
    seed: u64,
) -> Result<Vec<RunRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scans = generate_scans(truth, cfg, &mut rng)?;
    let n = truth.n_steps();
    trackers
        .iter()
        .map(|&kind| {
            let mut rec = RunRecord::with_capacity(n);
            match params.rfs_config(kind, cfg) {
                Some(tcfg) => {
                    let mut t = RfsTracker::new(tcfg);
                    for scan in &scans {
                        let r = t.step(&scan.points)?;
                        rec.positions.push(r.position);
                        rec.p_jam.push(if kind == TrackerKind::Naive { f64::NAN } else { r.p_jam });
                        let first = r.biases.first().filter(|_| kind == TrackerKind::Adaptive);
                        rec.bias_mean.push(first.map_or(f64::NAN, |b| b.mean));
                        rec.bias_std.push(first.map_or(f64::NAN, |b| b.std));
                        rec.awake.push(if kind == TrackerKind::Adaptive { r.awake } else { 0 });
                    }
                }
                None => {
                    let mut t = ClairvoyantTracker::new(
                        params.prior(),
                        cfg.delta,
                        cfg.sigma_q,
                        cfg.sigma_r,
                        cfg.radar_position,
                    );
                    for (k, scan) in (1..).zip(&scans) {
                        let s = t.step(scan, &truth.biases[k])?;
                        rec.positions.push(Vector2::new(s.mean[0], s.mean[1]));
                        rec.p_jam.push(f64::NAN);
                        rec.bias_mean.push(f64::NAN);
                        rec.bias_std.push(f64::NAN);
                        rec.awake.push(0);
                    }
                }
            }
            Ok(rec)
        })
        .collect()
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
}

/// Runs every tracker on `n_runs` replicas of one scenario. The trajectory
/// is shared; replica `r` draws its scans from seed `base_seed + r`, and
/// all trackers of a replica see the same scans.
pub fn run_monte_carlo(
    cfg: &ScenarioConfig,
    trackers: &[TrackerKind],
    params: &TrackerParams,
    n_runs: usize,
    base_seed: u64,
) -> Result<MonteCarloResult> {
    if n_runs == 0 {
        return Err(Error::Scenario("n_runs must be at least 1".into()));
    }
    let truth = generate_trajectory(cfg)?;
    let work = || {
        (0..n_runs)
            .into_par_iter()
            .map(|r| run_replica(cfg, &truth, trackers, params, base_seed.wrapping_add(r as u64)))
            .collect::<Result<Vec<_>>>()
    };
    let per_replica = match thread_pool() {
        Some(pool) => pool.install(work)?,
        None => work()?,
    };
    let mut records: Vec<Vec<RunRecord>> = vec![Vec::with_capacity(n_runs); trackers.len()];
    for replica in per_replica {
        for (t, rec) in replica.into_iter().enumerate() {
            records[t].push(rec);
        }
    }
    let table = aggregate(&truth, trackers, &records)?;
    Ok(MonteCarloResult { truth, records, table })
}

/// Reduces replica records to per-step statistics.
pub fn aggregate(truth: &TruthRecord, trackers: &[TrackerKind], records: &[Vec<RunRecord>]) -> Result<AggregateTable> {
    let n = truth.n_steps();
    let true_pos: Vec<Vector2<f64>> = (1..=n).map(|k| truth.position(k)).collect();
    let bias_true = (1..=n)
        .map(|k| {
            truth.biases[k]
                .iter()
                .min_by_key(|(i, _)| *i)
                .map_or(f64::NAN, |(_, b)| *b)
        })
        .collect();
    let mut series = Vec::with_capacity(trackers.len());
    for (&kind, recs) in trackers.iter().zip(records) {
        let positions: Vec<Vec<Vector2<f64>>> = recs.iter().map(|r| r.positions.clone()).collect();
        let per_step = |f: &dyn Fn(&RunRecord, usize) -> f64| -> Vec<f64> {
            (0..n).map(|k| nan_mean(recs.iter().map(|r| f(r, k)))).collect()
        };
        series.push(TrackerSeries {
            kind,
            rmse: position_rmse(&positions, &true_pos)?,
            p_jam: per_step(&|r, k| r.p_jam[k]),
            bias_est: per_step(&|r, k| r.bias_mean[k]),
            bias_std: per_step(&|r, k| r.bias_std[k]),
            c_k: per_step(&|r, k| r.awake[k] as f64),
        });
    }
    Ok(AggregateTable {
        n_steps: n,
        n_runs: records.first().map_or(0, Vec::len),
        bias_true,
        series,
        pcrb: None,
    })
}

/// Loss-of-efficiency run: attacks, turns and process noise removed, plus
/// the position bound of the clean problem.
pub fn run_loe(
    cfg: &ScenarioConfig,
    trackers: &[TrackerKind],
    params: &TrackerParams,
    n_runs: usize,
    base_seed: u64,
) -> Result<MonteCarloResult> {
    let loe = cfg.loe();
    let mut result = run_monte_carlo(&loe, trackers, params, n_runs, base_seed)?;
    let motion = build_cv_model(loe.delta, 0.0, 0.0, 0);
    let meas = MeasurementModel::new(loe.sigma_r, 4);
    let prior = params.prior().cov;
    let curve = pcrb_curve(&motion, &meas, &prior, loe.n_steps)?;
    result.table.pcrb = Some(curve.bound[1..].to_vec());
    Ok(result)
}
