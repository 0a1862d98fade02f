//! Column-wise comparison of two CSV outputs.
//!
//! When both files carry a `t` column and the grids differ, the second file
//! is linearly interpolated onto the first file's times.

use std::path::Path;

use serde::Serialize;

use crate::output::Manifest;
use crate::{Cli, CliError, CompareArgs};

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            // non-numeric cells (bath names) compare as NaN and are skipped
            rows.push(rec.iter().map(|s| s.trim().parse().unwrap_or(f64::NAN)).collect());
            if rows.last().map(Vec::len) != Some(columns.len()) {
                return Err(CliError::Input(format!("{}: row {} has the wrong width", path.display(), i + 1)));
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ColumnReport {
    pub a: String,
    pub b: String,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `|mean_a - mean_b|` over the window.
    pub mean_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub run_a: String,
    pub run_b: String,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: usize,
    pub interpolated: bool,
    pub columns: Vec<ColumnReport>,
    pub pass: bool,
}

fn interpolate(ts: &[f64], ys: &[f64], t: f64) -> Option<f64> {
    let k = ts.partition_point(|&x| x < t);
    if k < ts.len() && ts[k] == t {
        return Some(ys[k]);
    }
    if k == 0 || k == ts.len() {
        return None;
    }
    let (t0, t1) = (ts[k - 1], ts[k]);
    let w = (t - t0) / (t1 - t0);
    Some(ys[k - 1] * (1.0 - w) + ys[k] * w)
}

pub fn compare(
    a: &Table,
    b: &Table,
    columns: &[String],
    t_min: Option<f64>,
    t_max: Option<f64>,
    max_threshold: Option<f64>,
    mean_threshold: Option<f64>,
) -> Result<(Vec<ColumnReport>, usize, bool), CliError> {
    let pairs: Vec<(String, String)> = if columns.is_empty() {
        a.columns
            .iter()
            .filter(|c| *c != "t" && b.index(c).is_some())
            .map(|c| (c.clone(), c.clone()))
            .collect()
    } else {
        columns
            .iter()
            .map(|c| match c.split_once(':') {
                Some((x, y)) => (x.to_string(), y.to_string()),
                None => (c.clone(), c.clone()),
            })
            .collect()
    };
    if pairs.is_empty() {
        return Err(CliError::Input("no columns in common".into()));
    }
    let ta = a.index("t").map(|i| a.column(i));
    let tb = b.index("t").map(|i| b.column(i));
    let interpolated = match (&ta, &tb) {
        (Some(x), Some(y)) => x != y,
        _ => false,
    };
    if ta.is_none() && a.rows.len() != b.rows.len() {
        return Err(CliError::Input("row counts differ and there is no `t` column".into()));
    }
    if interpolated && tb.as_ref().is_some_and(|t| t.windows(2).any(|w| w[1] <= w[0])) {
        return Err(CliError::Input("second file's `t` is not strictly increasing".into()));
    }
    let keep: Vec<usize> = (0..a.rows.len())
        .filter(|&i| {
            ta.as_ref().is_none_or(|t| {
                t_min.is_none_or(|lo| t[i] >= lo) && t_max.is_none_or(|hi| t[i] <= hi)
            })
        })
        .collect();
    if keep.is_empty() {
        return Err(CliError::Input("the time window selects no rows".into()));
    }

    let mut reports = Vec::new();
    for (ca, cb) in pairs {
        let ia = a
            .index(&ca)
            .ok_or_else(|| CliError::Input(format!("first file has no column `{ca}`")))?;
        let ib = b
            .index(&cb)
            .ok_or_else(|| CliError::Input(format!("second file has no column `{cb}`")))?;
        let yb = b.column(ib);
        let (mut max_abs, mut sum_abs, mut sum_a, mut sum_b) = (0.0f64, 0.0, 0.0, 0.0);
        for &i in &keep {
            let va = a.rows[i][ia];
            let vb = if interpolated {
                let (x, y) = (ta.as_ref().unwrap(), tb.as_ref().unwrap());
                interpolate(y, &yb, x[i]).ok_or_else(|| {
                    CliError::Input(format!("t = {} lies outside the second file's grid", x[i]))
                })?
            } else {
                yb[i]
            };
            let d = (va - vb).abs();
            max_abs = max_abs.max(d);
            sum_abs += d;
            sum_a += va;
            sum_b += vb;
        }
        let n = keep.len() as f64;
        let (mean_a, mean_b) = (sum_a / n, sum_b / n);
        let mean_diff = (mean_a - mean_b).abs();
        let pass = max_threshold.is_none_or(|t| max_abs <= t) && mean_threshold.is_none_or(|t| mean_diff <= t);
        reports.push(ColumnReport {
            a: ca,
            b: cb,
            max_abs,
            mean_abs: sum_abs / n,
            mean_a,
            mean_b,
            mean_diff,
            pass,
        });
    }
    Ok((reports, keep.len(), interpolated))
}

pub fn run(cli: &Cli, args: &CompareArgs) -> Result<(), CliError> {
    let a = Table::read(&args.run_a)?;
    let b = Table::read(&args.run_b)?;
    let (columns, points, interpolated) = compare(
        &a,
        &b,
        &args.columns,
        args.t_min,
        args.t_max,
        args.max_threshold,
        args.mean_threshold,
    )?;
    let pass = columns.iter().all(|c| c.pass);
    let report = Report {
        run_a: args.run_a.display().to_string(),
        run_b: args.run_b.display().to_string(),
        t_min: args.t_min,
        t_max: args.t_max,
        points,
        interpolated,
        columns,
        pass,
    };
    let text = serde_json::to_string_pretty(&report).expect("report is plain data");
    println!("{text}");
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join("compare.json");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        let mut m = Manifest::new("compare", None, cli.seedless, 1);
        m.add_output(&path);
        m.write(dir)?;
    }
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.columns.iter().filter(|c| !c.pass).map(|c| c.a.as_str()).collect();
        Err(CliError::CompareFailed(format!("columns over threshold: {}", failed.join(", "))))
    }
}
