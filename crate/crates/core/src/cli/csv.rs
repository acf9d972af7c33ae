//! Metrics CSV: one row per (step, tracker), step-major, fixed column order.

use std::fmt::Write as _;

use crate::metrics::AggregateTable;

use super::CliError;

pub const COLUMNS: [&str; 8] = [
    "k",
    "tracker",
    "rmse_m",
    "p_jam",
    "bias_true_m",
    "bias_est_m",
    "bias_std_m",
    "c_k_mean",
];
pub const PCRB_COLUMN: &str = "pcrb_m";

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub k: usize,
    pub tracker: String,
    pub rmse: f64,
    pub p_jam: f64,
    pub bias_true: f64,
    pub bias_est: f64,
    pub bias_std: f64,
    pub c_k: f64,
    pub pcrb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub has_pcrb: bool,
    pub rows: Vec<CsvRow>,
}

impl CsvTable {
    /// Tracker names in order of first appearance.
    pub fn trackers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.tracker) {
                out.push(r.tracker.clone());
            }
        }
        out
    }

    pub fn column(&self, tracker: &str, f: impl Fn(&CsvRow) -> f64) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.tracker == tracker)
            .map(|r| (r.k as f64, f(r)))
            .collect()
    }
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.6}")
    }
}

pub fn write_csv(table: &AggregateTable) -> String {
    let mut out = COLUMNS.join(",");
    if table.pcrb.is_some() {
        out.push(',');
        out.push_str(PCRB_COLUMN);
    }
    out.push('\n');
    for k in 0..table.n_steps {
        for s in &table.series {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{}",
                k + 1,
                s.kind.name(),
                fmt(s.rmse[k]),
                fmt(s.p_jam[k]),
                fmt(table.bias_true[k]),
                fmt(s.bias_est[k]),
                fmt(s.bias_std[k]),
                fmt(s.c_k[k])
            );
            if let Some(p) = &table.pcrb {
                let _ = write!(out, ",{}", fmt(p[k]));
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_csv(text: &str) -> Result<CsvTable, CliError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| CliError::Csv("empty file".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let index = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| CliError::Csv(format!("missing column '{name}'")))
    };
    let idx: Vec<usize> = COLUMNS.iter().map(|c| index(c)).collect::<Result<_, _>>()?;
    let pcrb_idx = header.iter().position(|h| *h == PCRB_COLUMN);

    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != header.len() {
            return Err(CliError::Csv(format!(
                "line {}: expected {} fields, got {}",
                n + 2,
                header.len(),
                cells.len()
            )));
        }
        let float = |i: usize| -> Result<f64, CliError> {
            cells[i]
                .parse::<f64>()
                .map_err(|_| CliError::Csv(format!("line {}: bad number '{}' in '{}'", n + 2, cells[i], header[i])))
        };
        rows.push(CsvRow {
            k: cells[idx[0]]
                .parse()
                .map_err(|_| CliError::Csv(format!("line {}: bad step '{}'", n + 2, cells[idx[0]])))?,
            tracker: cells[idx[1]].to_string(),
            rmse: float(idx[2])?,
            p_jam: float(idx[3])?,
            bias_true: float(idx[4])?,
            bias_est: float(idx[5])?,
            bias_std: float(idx[6])?,
            c_k: float(idx[7])?,
            pcrb: pcrb_idx.map(float).transpose()?,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Csv("no data rows".into()));
    }
    Ok(CsvTable {
        has_pcrb: pcrb_idx.is_some(),
        rows,
    })
}
