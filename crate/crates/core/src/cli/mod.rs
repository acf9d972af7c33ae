//! Experiment front end: configuration, CSV and SVG output, and the `run`,
//! `loe` and `plot` commands.

mod config;
mod csv;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::metrics::{run_loe, run_monte_carlo, AggregateTable, TrackerKind};

pub use config::{parse_config, render_config, ExperimentConfig};
pub use csv::{parse_csv, write_csv, CsvRow, CsvTable, COLUMNS, PCRB_COLUMN};
pub use svg::{line_chart, Series};

pub const METRICS_FILE: &str = "metrics.csv";
pub const CONFIG_USED_FILE: &str = "config_used.txt";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}, key '{key}': {message}")]
    Config { line: usize, key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Run(#[from] crate::Error),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<u8>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub trackers: Vec<TrackerKind>,
    pub out: Option<PathBuf>,
}

/// Reads the config (or defaults) and applies `overrides`. A scenario
/// override is applied as if it were the config's `scenario` key.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut text = match path {
        Some(p) => read(p)?,
        None => String::new(),
    };
    if let Some(id) = overrides.scenario {
        // Drop any scenario key so the override is the one applied first.
        text = text
            .lines()
            .map(|l| {
                let is_scenario = l.split_once('=').is_some_and(|(k, _)| k.trim() == "scenario");
                if is_scenario && !l.trim_start().starts_with('#') {
                    ""
                } else {
                    l
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        text = format!("scenario = {id}\n{text}");
    }
    let mut cfg = parse_config(&text)?;
    if let Some(r) = overrides.runs {
        if r == 0 {
            return Err(CliError::Config {
                line: 0,
                key: "--runs".into(),
                message: "must be at least 1".into(),
            });
        }
        cfg.n_runs = r;
    }
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if !overrides.trackers.is_empty() {
        cfg.trackers = overrides.trackers.clone();
    }
    if let Some(o) = &overrides.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

/// All charts for a metrics CSV, as `(file name, svg)`.
pub fn plots_from_csv(table: &CsvTable) -> Vec<(String, String)> {
    let trackers = table.trackers();
    let by = |f: &dyn Fn(&CsvRow) -> f64| -> Vec<Series> {
        trackers.iter().map(|t| Series::new(t.clone(), table.column(t, f))).collect()
    };
    let mut out = Vec::new();
    out.push(("rmse.svg".to_string(), line_chart("Position RMSE", "k", "RMSE (m)", &by(&|r| r.rmse))));
    out.push((
        "p_jam.svg".to_string(),
        line_chart("Probability of jamming", "k", "probability", &by(&|r| r.p_jam)),
    ));

    let mut bias = Vec::new();
    if let Some(first) = trackers.first() {
        bias.push(Series::new("true", table.column(first, |r| r.bias_true)).dashed());
    }
    for t in &trackers {
        let est = table.column(t, |r| r.bias_est);
        if est.iter().any(|(_, v)| v.is_finite()) {
            let std = table.column(t, |r| r.bias_std);
            bias.push(Series::new(format!("{t} mean"), est.clone()));
            bias.push(Series::new(
                format!("{t} +std"),
                est.iter().zip(&std).map(|((k, m), (_, s))| (*k, m + s)).collect(),
            ).dashed());
            bias.push(Series::new(
                format!("{t} -std"),
                est.iter().zip(&std).map(|((k, m), (_, s))| (*k, m - s)).collect(),
            ).dashed());
        }
    }
    out.push(("bias.svg".to_string(), line_chart("Bias estimate", "k", "bias (m)", &bias)));

    let ck: Vec<Series> = by(&|r| r.c_k)
        .into_iter()
        .filter(|s| s.points.iter().any(|(_, v)| *v != 0.0))
        .collect();
    out.push(("c_k.svg".to_string(), line_chart("Awake jammer components", "k", "mean C_k", &ck)));

    if table.has_pcrb {
        let mut loe = by(&|r| r.rmse);
        if let Some(first) = trackers.first() {
            loe.push(Series::new("PCRB", table.column(first, |r| r.pcrb.unwrap_or(f64::NAN))).dashed());
        }
        out.push(("loe.svg".to_string(), line_chart("Loss of efficiency", "k", "RMSE (m)", &loe)));
    }
    out
}

fn emit(cfg: &ExperimentConfig, table: &AggregateTable) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|source| CliError::Io {
        path: cfg.out.clone(),
        source,
    })?;
    let csv_text = write_csv(table);
    write(&cfg.out.join(METRICS_FILE), &csv_text)?;
    write(&cfg.out.join(CONFIG_USED_FILE), &render_config(cfg))?;
    for (name, svg) in plots_from_csv(&parse_csv(&csv_text)?) {
        write(&cfg.out.join(name), &svg)?;
    }
    Ok(summary(table))
}

/// One line per tracker.
pub fn summary(table: &AggregateTable) -> Vec<String> {
    table
        .series
        .iter()
        .map(|s| {
            let mean = s.rmse.iter().sum::<f64>() / s.rmse.len().max(1) as f64;
            let (k_max, max) = s
                .rmse
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if *v > acc.1 { (k + 1, *v) } else { acc });
            let pj: Vec<f64> = s.p_jam.iter().copied().filter(|v| !v.is_nan()).collect();
            let pj = if pj.is_empty() {
                "n/a".to_string()
            } else {
                format!("{:.3}", pj.iter().sum::<f64>() / pj.len() as f64)
            };
            format!(
                "{:<12} mean RMSE {:8.3} m, max {:8.3} m at k={:<3} mean p_jam {}",
                s.kind.name(),
                mean,
                max,
                k_max,
                pj
            )
        })
        .collect()
}

/// Monte Carlo run of the configured scenario. Returns the summary lines.
pub fn cmd_run(config: Option<&Path>, overrides: &Overrides) -> Result<Vec<String>, CliError> {
    let cfg = load_config(config, overrides)?;
    let result = run_monte_carlo(&cfg.scenario, &cfg.trackers, &cfg.params, cfg.n_runs, cfg.seed)?;
    emit(&cfg, &result.table)
}

/// Loss-of-efficiency run: no attacks, no turns, zero process noise, with
/// the bound column.
pub fn cmd_loe(config: Option<&Path>, overrides: &Overrides) -> Result<Vec<String>, CliError> {
    let mut cfg = load_config(config, overrides)?;
    let result = run_loe(&cfg.scenario, &cfg.trackers, &cfg.params, cfg.n_runs, cfg.seed)?;
    cfg.scenario = cfg.scenario.loe();
    emit(&cfg, &result.table)
}

/// Regenerates the charts of a metrics CSV next to it, or into `out`.
pub fn cmd_plot(csv_path: &Path, out: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let table = parse_csv(&read(csv_path)?)?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => csv_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    fs::create_dir_all(if dir.as_os_str().is_empty() { Path::new(".") } else { &dir }).map_err(|source| {
        CliError::Io {
            path: dir.clone(),
            source,
        }
    })?;
    let mut written = Vec::new();
    for (name, svg) in plots_from_csv(&table) {
        let path = dir.join(name);
        write(&path, &svg)?;
        written.push(path);
    }
    Ok(written)
}
