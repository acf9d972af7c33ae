//! Ground truth, RGPO attack synthesis and scan generation.

use nalgebra::{DVector, Vector2, Vector4};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::models::{los_unit_vector, ClutterModel, Fov};

/// Standard gravity used for the 3 g turns, m/s^2.
pub const G: f64 = 9.81;

/// Redraws allowed for a noisy return that lands outside the FOV.
const MAX_REDRAWS: usize = 100;

/// A linear range-gate pull-off attack, active on steps `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSchedule {
    pub start: usize,
    /// `None` runs to the end of the scenario.
    pub end: Option<usize>,
    /// Pull-off velocity, m/s.
    pub v_po: f64,
}

impl AttackSchedule {
    pub fn new(start: usize, end: Option<usize>, v_po: f64) -> Self {
        Self { start, end, v_po }
    }

    pub fn is_active(&self, k: usize) -> bool {
        k >= self.start && self.end.is_none_or(|e| k <= e)
    }

    /// Range bias at step `k`; zero at the start step.
    pub fn bias_at(&self, k: usize, delta: f64) -> Result<f64> {
        rgpo_bias(self.v_po, k as f64 * delta, self.start as f64 * delta)
    }
}

/// Deceptive range offset `v_po (t_k - t_0)`.
pub fn rgpo_bias(v_po: f64, t_k: f64, t_0: f64) -> Result<f64> {
    if t_k < t_0 {
        return Err(Error::BeforeAttackStart { t_k, t_0 });
    }
    Ok(v_po * (t_k - t_0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: u8,
    pub n_steps: usize,
    pub delta: f64,
    /// `[px, py, vx, vy]` at step 0.
    pub initial_state: [f64; 4],
    /// Steps at which a turn begins.
    pub turn_starts: Vec<usize>,
    /// Centripetal acceleration during turns, m/s^2.
    pub turn_accel: f64,
    /// Turn counter-clockwise when true.
    pub turn_left: bool,
    pub attacks: Vec<AttackSchedule>,
    pub sigma_r: f64,
    /// Process noise std assumed by the trackers, m.
    pub sigma_q: f64,
    pub p_d: f64,
    pub p_j: f64,
    /// Uniform clutter used for generation. Jammer rates are ignored here.
    pub clutter: ClutterModel,
    pub radar_position: Vector2<f64>,
    pub seed: u64,
}

impl ScenarioConfig {
    fn base(id: u8) -> Self {
        Self {
            id,
            n_steps: 100,
            delta: 0.5,
            initial_state: [400.0, 300.0, 6.0, 8.0],
            turn_starts: Vec::new(),
            turn_accel: 3.0 * G,
            turn_left: true,
            attacks: Vec::new(),
            sigma_r: 5f64.sqrt(),
            sigma_q: 5f64.sqrt(),
            p_d: 0.98,
            p_j: 0.98,
            clutter: ClutterModel::uniform(20.0, Fov::rect(0.0, 1000.0, 0.0, 1000.0)),
            radar_position: Vector2::zeros(),
            seed: 0,
        }
    }

    /// The same geometry without attacks or turns and with zero process
    /// noise, for loss-of-efficiency runs.
    pub fn loe(&self) -> Self {
        Self {
            attacks: Vec::new(),
            turn_starts: Vec::new(),
            sigma_q: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        if self.n_steps == 0 {
            return bad("n_steps must be positive".into());
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        for (name, p) in [("p_d", self.p_d), ("p_j", self.p_j)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.sigma_r >= 0.0) || !(self.sigma_q >= 0.0) {
            return bad("noise std must be non-negative".into());
        }
        if self.clutter.fov.dim() != 2 {
            return bad("scenario FOV must be two-dimensional".into());
        }
        if !self.turn_starts.is_empty() && !(self.turn_accel > 0.0) {
            return bad("turn acceleration must be positive".into());
        }
        for (i, a) in self.attacks.iter().enumerate() {
            let end = a.end.unwrap_or(self.n_steps);
            if a.start < 1 || end > self.n_steps || a.start >= end {
                return bad(format!(
                    "attack {} interval {}..{} outside 1..{} or empty",
                    i + 1,
                    a.start,
                    end,
                    self.n_steps
                ));
            }
            if !(a.v_po > 0.0) {
                return bad(format!("attack {} pull-off velocity must be positive", i + 1));
            }
        }
        Ok(())
    }
}

/// Scenario presets 1 to 4.
pub fn preset_scenarios() -> Vec<ScenarioConfig> {
    (1..=4).map(|id| preset(id).expect("valid id")).collect()
}

pub fn preset(id: u8) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::base(id);
    let turning = [500.0, 500.0, 8.0, 8.0 * 3f64.sqrt()];
    match id {
        1 => {
            cfg.attacks = vec![AttackSchedule::new(10, Some(75), 0.5), AttackSchedule::new(85, None, 0.5)];
        }
        2 => {
            cfg.initial_state = turning;
            cfg.turn_starts = vec![10, 40, 70];
            cfg.sigma_q = 40f64.sqrt();
            cfg.attacks = vec![AttackSchedule::new(10, None, 5.0)];
        }
        3 => {
            cfg.attacks = vec![
                AttackSchedule::new(1, Some(50), 5.0),
                AttackSchedule::new(15, Some(75), 3.0),
                AttackSchedule::new(85, None, 3.0),
            ];
        }
        4 => {
            cfg.initial_state = turning;
            cfg.turn_starts = vec![10, 40, 70];
            cfg.sigma_q = 40f64.sqrt();
            cfg.attacks = vec![AttackSchedule::new(1, Some(60), 5.0), AttackSchedule::new(40, Some(80), 3.0)];
        }
        _ => return Err(Error::Scenario(format!("unknown scenario id {id}"))),
    }
    Ok(cfg)
}

/// Turn rate `a / |v|`, rad/s.
pub fn turn_rate(accel: f64, speed: f64) -> f64 {
    accel / speed
}

/// Steps needed for a heading change of at least 90 degrees.
pub fn turn_steps(omega: f64, delta: f64) -> usize {
    (std::f64::consts::FRAC_PI_2 / (omega.abs() * delta)).ceil() as usize
}

/// Exact constant-turn-rate propagation over `delta`.
pub fn coordinated_turn(x: &Vector4<f64>, omega: f64, delta: f64) -> Vector4<f64> {
    if omega == 0.0 {
        return Vector4::new(x[0] + delta * x[2], x[1] + delta * x[3], x[2], x[3]);
    }
    let (s, c) = (omega * delta).sin_cos();
    let (vx, vy) = (x[2], x[3]);
    Vector4::new(
        x[0] + (s * vx - (1.0 - c) * vy) / omega,
        x[1] + ((1.0 - c) * vx + s * vy) / omega,
        c * vx - s * vy,
        s * vx + c * vy,
    )
}

/// True target states and active attack biases.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub delta: f64,
    /// `states[k]` for `k = 0..=n_steps`.
    pub states: Vec<Vector4<f64>>,
    /// `biases[k]`: `(attack index, bias m)` of every attack active at `k`.
    pub biases: Vec<Vec<(usize, f64)>>,
}

impl TruthRecord {
    pub fn n_steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn position(&self, k: usize) -> Vector2<f64> {
        Vector2::new(self.states[k][0], self.states[k][1])
    }
}

#[allow(clippy::needless_range_loop)]
pub fn generate_trajectory(cfg: &ScenarioConfig) -> Result<TruthRecord> {
    cfg.validate()?;
    let mut turning_steps = vec![0.0; cfg.n_steps + 1];
    let mut x = Vector4::from(cfg.initial_state);
    let mut states = vec![x];
    let fov = &cfg.clutter.fov;
    let mut turn_until = 0;
    let mut omega = 0.0;
    for k in 1..=cfg.n_steps {
        if cfg.turn_starts.contains(&k) {
            let speed = Vector2::new(x[2], x[3]).norm();
            omega = turn_rate(cfg.turn_accel, speed) * if cfg.turn_left { 1.0 } else { -1.0 };
            turn_until = k + turn_steps(omega, cfg.delta) - 1;
        }
        if k <= turn_until {
            turning_steps[k] = omega;
            x = coordinated_turn(&x, omega, cfg.delta);
        } else {
            x = coordinated_turn(&x, 0.0, cfg.delta);
        }
        if !fov.contains(&[x[0], x[1]]) {
            return Err(Error::OutsideFov { step: k });
        }
        states.push(x);
    }
    let biases = (0..=cfg.n_steps)
        .map(|k| {
            cfg.attacks
                .iter()
                .enumerate()
                .filter(|(_, a)| a.is_active(k))
                .map(|(i, a)| a.bias_at(k, cfg.delta).map(|b| (i, b)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruthRecord {
        delta: cfg.delta,
        states,
        biases,
    })
}

/// Origin of a generated point. Only oracle baselines may look at it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Target,
    /// Index into the scenario's attack list.
    Jammer(usize),
    Clutter,
}

/// One scan: points in random order with their provenance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanSet {
    pub points: Vec<DVector<f64>>,
    pub provenance: Vec<Provenance>,
}

impl ScanSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn target(&self) -> Option<&DVector<f64>> {
        self.find(Provenance::Target)
    }

    pub fn jammer(&self, attack: usize) -> Option<&DVector<f64>> {
        self.find(Provenance::Jammer(attack))
    }

    fn find(&self, p: Provenance) -> Option<&DVector<f64>> {
        self.provenance.iter().position(|q| *q == p).map(|i| &self.points[i])
    }
}

fn noisy_point<R: Rng + ?Sized>(mean: &Vector2<f64>, sigma: f64, fov: &Fov, rng: &mut R) -> Option<DVector<f64>> {
    for _ in 0..MAX_REDRAWS {
        let nx: f64 = rng.sample(StandardNormal);
        let ny: f64 = rng.sample(StandardNormal);
        let p = [mean.x + sigma * nx, mean.y + sigma * ny];
        if fov.contains(&p) {
            return Some(DVector::from_column_slice(&p));
        }
    }
    None
}

/// Scan at step `k >= 1`.
pub fn generate_scan<R: Rng + ?Sized>(
    truth: &TruthRecord,
    k: usize,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<ScanSet> {
    if k == 0 || k > truth.n_steps() {
        return Err(Error::Length {
            expected: truth.n_steps(),
            got: k,
        });
    }
    let fov = &cfg.clutter.fov;
    let pos = truth.position(k);
    let mut points = Vec::new();
    let mut provenance = Vec::new();

    if rng.random_bool(cfg.p_d) {
        if let Some(p) = noisy_point(&pos, cfg.sigma_r, fov, rng) {
            points.push(p);
            provenance.push(Provenance::Target);
        }
    }
    if !truth.biases[k].is_empty() {
        let los = los_unit_vector(&pos, &cfg.radar_position)?;
        for &(i, bias) in &truth.biases[k] {
            if rng.random_bool(cfg.p_j) {
                let mean = pos + los * bias;
                if !fov.contains(mean.as_slice()) {
                    continue;
                }
                if let Some(p) = noisy_point(&mean, cfg.sigma_r, fov, rng) {
                    points.push(p);
                    provenance.push(Provenance::Jammer(i));
                }
            }
        }
    }
    if cfg.clutter.lambda0_bar > 0.0 {
        let n = Poisson::new(cfg.clutter.lambda0_bar)
            .map_err(|e| Error::Scenario(e.to_string()))?
            .sample(rng) as usize;
        for _ in 0..n {
            let p: Vec<f64> = fov
                .lower
                .iter()
                .zip(&fov.upper)
                .map(|(lo, hi)| rng.random_range(*lo..*hi))
                .collect();
            points.push(DVector::from_vec(p));
            provenance.push(Provenance::Clutter);
        }
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(rng);
    Ok(ScanSet {
        points: order.iter().map(|&i| points[i].clone()).collect(),
        provenance: order.iter().map(|&i| provenance[i]).collect(),
    })
}

/// Scans for steps `1..=n_steps`; element `k-1` is the scan at step `k`.
pub fn generate_scans<R: Rng + ?Sized>(truth: &TruthRecord, cfg: &ScenarioConfig, rng: &mut R) -> Result<Vec<ScanSet>> {
    (1..=truth.n_steps()).map(|k| generate_scan(truth, k, cfg, rng)).collect()
}
