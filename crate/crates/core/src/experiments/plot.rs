//! Reshapes finished runs into wide CSV tables, one per figure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::manifest::{RunManifest, RunStatus, MANIFEST_FILE};
use super::{ExperimentId, RunError};

pub const PLOT_DIR: &str = "plots";

fn read_table(dir: &Path, file: &str) -> Result<(csv::StringRecord, Vec<csv::StringRecord>), RunError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(RunError::Runtime(format!("missing results file {}", path.display())));
    }
    let mut r = csv::Reader::from_path(&path).map_err(|e| RunError::Runtime(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(RunError::runtime)?.clone();
    let rows = r
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RunError::Runtime(format!("{}: {e}", path.display())))?;
    Ok((header, rows))
}

fn column(header: &csv::StringRecord, name: &str, file: &str) -> Result<usize, RunError> {
    header.iter().position(|h| h == name).ok_or_else(|| RunError::Runtime(format!("{file} has no `{name}` column")))
}

/// `t → series index → (sum, count)`
type Pivot = BTreeMap<u64, BTreeMap<usize, (f64, u32)>>;

/// `series` in first-appearance order, and `t → series → value`.
fn pivot(
    rows: &[csv::StringRecord],
    series_col: usize,
    t_col: usize,
    value: impl Fn(&csv::StringRecord) -> Result<f64, RunError>,
) -> Result<(Vec<String>, Pivot), RunError> {
    let mut names: Vec<String> = Vec::new();
    let mut table = Pivot::new();
    for row in rows {
        let name = &row[series_col];
        let idx = names.iter().position(|n| n == name).unwrap_or_else(|| {
            names.push(name.to_string());
            names.len() - 1
        });
        let t: u64 = row[t_col].parse().map_err(|_| RunError::Runtime(format!("bad step `{}`", &row[t_col])))?;
        let cell = table.entry(t).or_default().entry(idx).or_insert((0.0, 0));
        cell.0 += value(row)?;
        cell.1 += 1;
    }
    Ok((names, table))
}

/// Wide table with one row per `t`; cells are means over duplicates and
/// empty where a series has no value.
fn wide_csv(names: &[String], table: &Pivot) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(RunError::runtime)?;
    for (t, cells) in table {
        let mut rec = vec![t.to_string()];
        rec.extend(
            (0..names.len()).map(|i| cells.get(&i).map_or(String::new(), |(s, n)| format!("{:.6}", s / f64::from(*n)))),
        );
        w.write_record(&rec).map_err(RunError::runtime)?;
    }
    w.into_inner().map_err(RunError::runtime)
}

fn parse_f64(row: &csv::StringRecord, col: usize) -> Result<f64, RunError> {
    row[col].parse().map_err(|_| RunError::Runtime(format!("bad number `{}`", &row[col])))
}

/// Writes plot tables for a completed run into `<results>/plots/` and returns
/// their paths.
///
/// * predict-sweep: `accuracy-<system>.csv`, mean accuracy by `t`, one column
///   per predictor.
/// * complexity-sweep: `khat.csv`, seed-averaged `khat_bits` by `t`, one
///   column per series.
/// * halting-sweep: `halting-histogram.csv`, machines per halting step.
pub fn emit_plot_data(results: &Path) -> Result<Vec<PathBuf>, RunError> {
    if !results.join(MANIFEST_FILE).is_file() {
        return Err(RunError::Runtime(format!("missing results file {}", results.join(MANIFEST_FILE).display())));
    }
    let manifest = RunManifest::load(results)?;
    if manifest.status != RunStatus::Completed {
        return Err(RunError::Runtime(format!("run in {} did not complete", results.display())));
    }
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    match manifest.experiment {
        ExperimentId::PredictSweep => {
            let file = "predict-curves.csv";
            let (h, rows) = read_table(results, file)?;
            let (sys, pred, t, acc) = (
                column(&h, "system", file)?,
                column(&h, "predictor", file)?,
                column(&h, "t", file)?,
                column(&h, "mean_accuracy", file)?,
            );
            let mut systems: Vec<String> = Vec::new();
            for r in &rows {
                if !systems.iter().any(|s| s == &r[sys]) {
                    systems.push(r[sys].to_string());
                }
            }
            for s in systems {
                let subset: Vec<_> = rows.iter().filter(|r| r[sys] == *s).cloned().collect();
                let (names, table) = pivot(&subset, pred, t, |r| parse_f64(r, acc))?;
                files.push((format!("accuracy-{s}.csv"), wide_csv(&names, &table)?));
            }
        }
        ExperimentId::ComplexitySweep => {
            let file = "complexity-curves.csv";
            let (h, rows) = read_table(results, file)?;
            let (series, t, k) = (column(&h, "series", file)?, column(&h, "t", file)?, column(&h, "khat_bits", file)?);
            let (names, table) = pivot(&rows, series, t, |r| parse_f64(r, k))?;
            files.push(("khat.csv".into(), wide_csv(&names, &table)?));
        }
        ExperimentId::HaltingSweep => {
            let file = "halting.csv";
            let (h, rows) = read_table(results, file)?;
            let (outcome, t) = (column(&h, "outcome", file)?, column(&h, "t", file)?);
            let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
            for r in rows.iter().filter(|r| &r[outcome] == "reached") {
                let step: u64 = r[t].parse().map_err(|_| RunError::Runtime(format!("bad step `{}`", &r[t])))?;
                *hist.entry(step).or_default() += 1;
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["halting_step", "machines"]).map_err(RunError::runtime)?;
            for (step, n) in hist {
                w.write_record([step.to_string(), n.to_string()]).map_err(RunError::runtime)?;
            }
            files.push(("halting-histogram.csv".into(), w.into_inner().map_err(RunError::runtime)?));
        }
        other => return Err(RunError::Runtime(format!("{other} runs have no plot tables"))),
    }
    let dir = results.join(PLOT_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
    files
        .into_iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| RunError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
