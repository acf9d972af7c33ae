//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys:
//!
//! | key | value |
//! |---|---|
//! | `scenario` | preset id 1-4, applied before every other key |
//! | `runs`, `seed` | Monte Carlo replicas and base seed |
//! | `trackers` | comma list of `adaptive`, `nonadaptive`, `naive`, `clairvoyant` |
//! | `out` | output directory |
//! | `n_steps`, `delta` | scenario length and sampling period (s) |
//! | `initial_state` | `px, py, vx, vy` |
//! | `turn_starts`, `turn_accel`, `turn_left` | turn steps, m/s^2, bool |
//! | `sigma_r`, `sigma_q` | measurement and tracker process noise std (m) |
//! | `p_d`, `p_j` | detection probabilities |
//! | `lambda0_bar` | expected false alarms per scan |
//! | `fov` | `x_min, x_max, y_min, y_max` |
//! | `radar` | `x, y` |
//! | `attack.N.start`, `attack.N.end`, `attack.N.v_po` | attack `N` (1-based); `end = none` is open. Any attack key replaces the preset attacks |
//! | `prune_threshold`, `cap`, `gate` | mixture reduction; `gate = none` disables gating |
//! | `alpha`, `lambda_1`, `b_na`, `lambda_eig` | jammer model; `lambda_eig` is `los, cross` |
//! | `u_act`, `t_act`, `u_dorm`, `t_dorm` | lifecycle thresholds (m, s) |
//! | `lifecycle` | `auto`, `single` or `multi` |
//! | `prior_bias` | `mean, var` of a fresh bias |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::metrics::{TrackerKind, TrackerParams};
use crate::sim::{preset, AttackSchedule, ScenarioConfig};
use crate::tracker::LifecycleMode;
use crate::models::Fov;

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub trackers: Vec<TrackerKind>,
    pub n_runs: usize,
    pub seed: u64,
    pub params: TrackerParams,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: preset(1).expect("preset 1"),
            trackers: TrackerKind::ALL.to_vec(),
            n_runs: 100,
            seed: 1,
            params: TrackerParams::default(),
            out: PathBuf::from("out"),
        }
    }
}

fn err(line: usize, key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse::<T>()
        .map_err(|_| err(line, key, format!("cannot parse '{}'", v.trim())))
}

fn positive(line: usize, key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = num(line, key, v)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(err(line, key, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn non_negative(line: usize, key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = num(line, key, v)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(err(line, key, format!("must be non-negative, got {x}")));
    }
    Ok(x)
}

fn probability(line: usize, key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = num(line, key, v)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(err(line, key, format!("must lie in [0, 1], got {x}")));
    }
    Ok(x)
}

fn list<const N: usize>(line: usize, key: &str, v: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if parts.len() != N {
        return Err(err(line, key, format!("expected {N} comma-separated numbers")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = num(line, key, p)?;
    }
    Ok(out)
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(err(line, key, format!("expected true or false, got '{other}'"))),
    }
}

#[derive(Default)]
struct AttackDraft {
    start: Option<usize>,
    end: Option<Option<usize>>,
    v_po: Option<f64>,
    line: usize,
}

/// Parses a configuration text. Line numbers in errors are 1-based.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((k, v)) = trimmed.split_once('=') else {
            return Err(err(line, trimmed, "expected 'key = value'"));
        };
        let key = k.trim().to_string();
        if let Some(prev) = seen.insert(key.clone(), line) {
            return Err(err(line, &key, format!("duplicate key (first set on line {prev})")));
        }
        entries.push((line, key, v.trim().to_string()));
    }

    let mut cfg = ExperimentConfig::default();
    if let Some((line, key, v)) = entries.iter().find(|e| e.1 == "scenario") {
        let id: u8 = num(*line, key, v)?;
        cfg.scenario = preset(id).map_err(|e| err(*line, key, e.to_string()))?;
    }

    let mut attacks: BTreeMap<usize, AttackDraft> = BTreeMap::new();
    for (line, key, v) in &entries {
        let (line, key, v) = (*line, key.as_str(), v.as_str());
        let s = &mut cfg.scenario;
        let p = &mut cfg.params;
        match key {
            "scenario" => {}
            "runs" => {
                cfg.n_runs = num(line, key, v)?;
                if cfg.n_runs == 0 {
                    return Err(err(line, key, "must be at least 1"));
                }
            }
            "seed" => cfg.seed = num(line, key, v)?,
            "trackers" => {
                cfg.trackers = v
                    .split(',')
                    .map(|t| t.trim().parse::<TrackerKind>().map_err(|m| err(line, key, m)))
                    .collect::<Result<_, _>>()?;
                if cfg.trackers.is_empty() {
                    return Err(err(line, key, "at least one tracker is required"));
                }
            }
            "out" => cfg.out = PathBuf::from(v),
            "n_steps" => {
                s.n_steps = num(line, key, v)?;
                if s.n_steps == 0 {
                    return Err(err(line, key, "must be at least 1"));
                }
            }
            "delta" => s.delta = positive(line, key, v)?,
            "initial_state" => s.initial_state = list::<4>(line, key, v)?,
            "turn_starts" => {
                s.turn_starts = v
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| num(line, key, t))
                    .collect::<Result<_, _>>()?
            }
            "turn_accel" => s.turn_accel = positive(line, key, v)?,
            "turn_left" => s.turn_left = boolean(line, key, v)?,
            "sigma_r" => s.sigma_r = positive(line, key, v)?,
            "sigma_q" => s.sigma_q = non_negative(line, key, v)?,
            "p_d" => s.p_d = probability(line, key, v)?,
            "p_j" => s.p_j = probability(line, key, v)?,
            "lambda0_bar" => s.clutter.lambda0_bar = positive(line, key, v)?,
            "fov" => {
                let [x0, x1, y0, y1] = list::<4>(line, key, v)?;
                if !(x1 > x0 && y1 > y0) {
                    return Err(err(line, key, "bounds must satisfy min < max"));
                }
                s.clutter.fov = Fov::rect(x0, x1, y0, y1);
            }
            "radar" => {
                let [x, y] = list::<2>(line, key, v)?;
                s.radar_position = nalgebra::Vector2::new(x, y);
            }
            "prune_threshold" => {
                p.prune_threshold = probability(line, key, v)?;
            }
            "cap" => {
                p.cap = num(line, key, v)?;
                if p.cap == 0 {
                    return Err(err(line, key, "must be at least 1"));
                }
            }
            "gate" => p.gate = if v == "none" { None } else { Some(positive(line, key, v)?) },
            "alpha" => p.alpha = non_negative(line, key, v)?,
            "lambda_1" => p.lambda_jam = positive(line, key, v)?,
            "b_na" => p.b_na = non_negative(line, key, v)?,
            "lambda_eig" => {
                let e = list::<2>(line, key, v)?;
                if !(e[0] > 0.0 && e[1] > 0.0) {
                    return Err(err(line, key, "eigenvalues must be positive"));
                }
                p.eigvals = e;
            }
            "u_act" => p.lifecycle.u_act = positive(line, key, v)?,
            "t_act" => p.lifecycle.t_act = positive(line, key, v)?,
            "u_dorm" => p.lifecycle.u_dorm = positive(line, key, v)?,
            "t_dorm" => p.lifecycle.t_dorm = positive(line, key, v)?,
            "lifecycle" => {
                p.lifecycle_mode = match v {
                    "auto" => None,
                    "single" => Some(LifecycleMode::Single),
                    "multi" => Some(LifecycleMode::Multi),
                    other => return Err(err(line, key, format!("expected auto, single or multi, got '{other}'"))),
                }
            }
            "prior_bias" => {
                let [m, var] = list::<2>(line, key, v)?;
                if !(var > 0.0) {
                    return Err(err(line, key, "variance must be positive"));
                }
                p.prior_bias = (m, var);
            }
            _ if key.starts_with("attack.") => {
                let parts: Vec<&str> = key.split('.').collect();
                let idx = match parts.as_slice() {
                    ["attack", n, _] => n.parse::<usize>().ok().filter(|n| *n >= 1),
                    _ => None,
                }
                .ok_or_else(|| err(line, key, "expected attack.N.start, attack.N.end or attack.N.v_po"))?;
                let d = attacks.entry(idx).or_default();
                d.line = d.line.max(line);
                match parts[2] {
                    "start" => d.start = Some(num(line, key, v)?),
                    "end" => d.end = Some(if v == "none" { None } else { Some(num(line, key, v)?) }),
                    "v_po" => d.v_po = Some(positive(line, key, v)?),
                    _ => return Err(err(line, key, "unknown attack field")),
                }
            }
            _ => return Err(err(line, key, "unknown key")),
        }
    }

    if !attacks.is_empty() {
        let mut list = Vec::new();
        for (i, (n, d)) in attacks.into_iter().enumerate() {
            let key = format!("attack.{n}");
            if n != i + 1 {
                return Err(err(d.line, &key, "attack indices must be consecutive from 1"));
            }
            let (Some(start), Some(v_po)) = (d.start, d.v_po) else {
                return Err(err(d.line, &key, "start and v_po are required"));
            };
            list.push(AttackSchedule::new(start, d.end.unwrap_or(None), v_po));
        }
        cfg.scenario.attacks = list;
    }
    cfg.scenario
        .validate()
        .map_err(|e| err(0, "scenario", e.to_string()))?;
    Ok(cfg)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Every resolved value, in a form `parse_config` reads back.
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let s = &cfg.scenario;
    let p = &cfg.params;
    let fov = &s.clutter.fov;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("scenario", s.id.to_string());
    kv("runs", cfg.n_runs.to_string());
    kv("seed", cfg.seed.to_string());
    kv(
        "trackers",
        cfg.trackers.iter().map(|t| t.name()).collect::<Vec<_>>().join(", "),
    );
    kv("out", cfg.out.display().to_string());
    kv("n_steps", s.n_steps.to_string());
    kv("delta", s.delta.to_string());
    kv("initial_state", join(&s.initial_state));
    kv(
        "turn_starts",
        s.turn_starts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", "),
    );
    kv("turn_accel", s.turn_accel.to_string());
    kv("turn_left", s.turn_left.to_string());
    kv("sigma_r", s.sigma_r.to_string());
    kv("sigma_q", s.sigma_q.to_string());
    kv("p_d", s.p_d.to_string());
    kv("p_j", s.p_j.to_string());
    kv("lambda0_bar", s.clutter.lambda0_bar.to_string());
    kv("fov", join(&[fov.lower[0], fov.upper[0], fov.lower[1], fov.upper[1]]));
    kv("radar", join(&[s.radar_position.x, s.radar_position.y]));
    for (i, a) in s.attacks.iter().enumerate() {
        kv(&format!("attack.{}.start", i + 1), a.start.to_string());
        kv(
            &format!("attack.{}.end", i + 1),
            a.end.map_or("none".to_string(), |e| e.to_string()),
        );
        kv(&format!("attack.{}.v_po", i + 1), a.v_po.to_string());
    }
    kv("prune_threshold", p.prune_threshold.to_string());
    kv("cap", p.cap.to_string());
    kv("gate", p.gate.map_or("none".to_string(), |g| g.to_string()));
    kv("alpha", p.alpha.to_string());
    kv("lambda_1", p.lambda_jam.to_string());
    kv("b_na", p.b_na.to_string());
    kv("lambda_eig", join(&p.eigvals));
    kv("u_act", p.lifecycle.u_act.to_string());
    kv("t_act", p.lifecycle.t_act.to_string());
    kv("u_dorm", p.lifecycle.u_dorm.to_string());
    kv("t_dorm", p.lifecycle.t_dorm.to_string());
    kv(
        "lifecycle",
        match p.lifecycle_mode {
            None => "auto",
            Some(LifecycleMode::Single) => "single",
            Some(LifecycleMode::Multi) => "multi",
        }
        .to_string(),
    );
    kv("prior_bias", join(&[p.prior_bias.0, p.prior_bias.1]));
    out
}
