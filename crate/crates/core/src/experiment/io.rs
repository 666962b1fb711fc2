use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{ExperimentOutput, RunRecord, TimingRecord};
use super::tables::{compute_tables, Tables};
use crate::error::{Error, Result};

/// Files written by [`write_outputs`] whose bytes depend only on the
/// configuration and seed. `timings.jsonl` is written too but holds
/// wall-clock data.
pub const OUTPUT_FILES: [&str; 10] = [
    "config.json",
    "records.jsonl",
    "metrics.csv",
    "ranks.csv",
    "rank_horizons.csv",
    "overall_ranks.csv",
    "anova.csv",
    "mse.csv",
    "summary.json",
    "README.txt",
];

const TABLE_FILES: [&str; 6] = [
    "metrics.csv",
    "ranks.csv",
    "rank_horizons.csv",
    "overall_ranks.csv",
    "anova.csv",
    "mse.csv",
];

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut f = std::io::BufWriter::new(create(path)?);
    for row in rows {
        let line = serde_json::to_string(row).map_err(|e| Error::io(path, e))?;
        writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
    }
    f.flush().map_err(|e| Error::io(path, e))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(f)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| Error::Parse {
                row: i + 1,
                column: path.display().to_string(),
                message: e.to_string(),
            })
        })
        .collect()
}

fn table_rows(tables: &Tables, file: &str) -> Result<Vec<Vec<String>>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    macro_rules! dump {
        ($rows:expr) => {
            for r in $rows {
                w.serialize(r).map_err(|e| Error::io(file, e))?;
            }
        };
    }
    match file {
        "metrics.csv" => dump!(&tables.metrics),
        "ranks.csv" => dump!(&tables.ranks),
        "rank_horizons.csv" => dump!(&tables.rank_horizons),
        "overall_ranks.csv" => dump!(&tables.overall_ranks),
        "anova.csv" => dump!(&tables.anova),
        "mse.csv" => dump!(&tables.mse),
        other => return Err(Error::invalid(format!("unknown table `{other}`"))),
    }
    let bytes = w.into_inner().map_err(|e| Error::io(file, e.into_error()))?;
    parse_rows(&bytes, file)
}

fn parse_rows(bytes: &[u8], name: &str) -> Result<Vec<Vec<String>>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes)
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_string).collect())
                .map_err(|e| Error::io(name, e))
        })
        .collect()
}

fn summary(cfg: &ExperimentConfig, out: &ExperimentOutput, tables: &Tables) -> serde_json::Value {
    let series: Vec<&str> = {
        let mut s: Vec<&str> = out.records.iter().map(|r| r.series.as_str()).collect();
        s.dedup();
        s
    };
    let ranks: Vec<serde_json::Value> = tables
        .overall_ranks
        .iter()
        .map(|r| serde_json::json!({ "strategy": r.strategy, "average_rank": r.average_rank }))
        .collect();
    let mse: Vec<serde_json::Value> = tables
        .mse
        .iter()
        .map(|r| serde_json::json!({ "strategy": r.strategy, "mean_mse": r.mean_mse, "stddev": r.stddev }))
        .collect();
    let failures: Vec<serde_json::Value> = out
        .records
        .iter()
        .filter(|r| !r.ok())
        .map(|r| {
            serde_json::json!({
                "series": r.series, "strategy": r.strategy,
                "repetition": r.repetition, "error": r.error,
            })
        })
        .collect();
    serde_json::json!({
        "dataset": out.dataset,
        "series": series,
        "repetitions": cfg.repetitions,
        "horizon": cfg.horizon,
        "seed": cfg.seed,
        "records": out.records.len(),
        "failures": failures,
        "overall_average_rank": ranks,
        "holdout_mse": mse,
        "method_notes": [
            "deseasonalization: bypassed (identity)",
            "input selection: Delta test with forward-backward search for every strategy",
            format!(
                "mask fitness: rolling-origin MSE over the last {} points of the transformed estimation sample; sub-models trained on the rest",
                crate::optimizers::validation_len(cfg.horizon)
            ),
            "hidden size: AIC over {2,4,6,8,10}",
        ],
    })
}

const RUN_README: &str = "\
records.jsonl      one run record per (series, strategy, repetition)
timings.jsonl      wall-clock seconds per run (not deterministic)
metrics.csv        dataset,strategy,measure,h,mean,stddev over repetitions
ranks.csv          average rank over the horizon per measure
rank_horizons.csv  rank of every strategy at every step
overall_ranks.csv  average rank over the three measures
anova.csv          one-way ANOVA across strategies per measure and step
mse.csv            hold-out MSE per strategy
summary.json       run metadata and headline results
config.json        effective configuration
";

/// Writes records, timings and every aggregate table into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, out: &ExperimentOutput) -> Result<Tables> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tables = compute_tables(&out.records);
    let cfg_json = serde_json::to_string_pretty(cfg).map_err(|e| Error::io("config.json", e))?;
    fs::write(dir.join("config.json"), cfg_json + "\n").map_err(|e| Error::io(dir, e))?;
    write_jsonl(&dir.join("records.jsonl"), &out.records)?;
    write_jsonl(&dir.join("timings.jsonl"), &out.timings)?;
    write_csv(&dir.join("metrics.csv"), &tables.metrics)?;
    write_csv(&dir.join("ranks.csv"), &tables.ranks)?;
    write_csv(&dir.join("rank_horizons.csv"), &tables.rank_horizons)?;
    write_csv(&dir.join("overall_ranks.csv"), &tables.overall_ranks)?;
    write_csv(&dir.join("anova.csv"), &tables.anova)?;
    write_csv(&dir.join("mse.csv"), &tables.mse)?;
    let s = serde_json::to_string_pretty(&summary(cfg, out, &tables)).map_err(|e| Error::io("summary.json", e))?;
    fs::write(dir.join("summary.json"), s + "\n").map_err(|e| Error::io(dir, e))?;
    fs::write(dir.join("README.txt"), RUN_README).map_err(|e| Error::io(dir, e))?;
    Ok(tables)
}

pub fn read_records(dir: &Path) -> Result<Vec<RunRecord>> {
    read_jsonl(&dir.join("records.jsonl"))
}

pub fn read_timings(dir: &Path) -> Result<Vec<TimingRecord>> {
    read_jsonl(&dir.join("timings.jsonl"))
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub tables: Tables,
    pub max_abs_diff: f64,
    pub mismatches: Vec<String>,
}

impl CompareReport {
    pub fn consistent(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Tolerance when checking stored tables against a recomputation.
pub const COMPARE_TOL: f64 = 1e-12;

/// Recomputes every table from `records.jsonl` and checks the stored CSVs
/// against it cell by cell (numbers to [`COMPARE_TOL`]).
pub fn compare_run(dir: &Path) -> Result<CompareReport> {
    if !dir.is_dir() {
        return Err(Error::Io {
            path: dir.display().to_string(),
            message: "run directory not found".into(),
        });
    }
    let records = read_records(dir)?;
    let tables = compute_tables(&records);
    let mut report = CompareReport {
        tables,
        max_abs_diff: 0.0,
        mismatches: Vec::new(),
    };
    for file in TABLE_FILES {
        let path = dir.join(file);
        let stored = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let stored = parse_rows(&stored, file)?;
        let fresh = table_rows(&report.tables, file)?;
        if stored.len() != fresh.len() {
            report
                .mismatches
                .push(format!("{file}: {} stored rows vs {} recomputed", stored.len(), fresh.len()));
            continue;
        }
        for (i, (a, b)) in stored.iter().zip(&fresh).enumerate() {
            if a.len() != b.len() {
                report.mismatches.push(format!("{file} row {i}: column count"));
                continue;
            }
            for (x, y) in a.iter().zip(b) {
                match (x.parse::<f64>(), y.parse::<f64>()) {
                    (Ok(u), Ok(v)) => {
                        let same = u == v || (u.is_nan() && v.is_nan());
                        let diff = if same { 0.0 } else { (u - v).abs() };
                        report.max_abs_diff = report.max_abs_diff.max(if diff.is_nan() { f64::INFINITY } else { diff });
                        if !(diff <= COMPARE_TOL) {
                            report.mismatches.push(format!("{file} row {i}: {x} vs {y}"));
                        }
                    }
                    _ if x != y => report.mismatches.push(format!("{file} row {i}: `{x}` vs `{y}`")),
                    _ => {}
                }
            }
        }
    }
    Ok(report)
}

/// Writes one `generation,best_fitness,mean_fitness,seconds` CSV per mask
/// search plus `timing_summary.csv` (strategy, dataset, runs, mean_seconds).
/// Returns the trace files written.
pub fn export_traces(run_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let records = read_records(run_dir)?;
    let timings = read_timings(run_dir).unwrap_or_default();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let timing_of = |r: &RunRecord| {
        timings
            .iter()
            .find(|t| t.series == r.series && t.strategy == r.strategy && t.repetition == r.repetition)
    };
    let mut written = Vec::new();
    for r in &records {
        let Some(search) = &r.search else { continue };
        let name = format!(
            "trace__{}__{}__{}__rep{}__seed{}.csv",
            r.dataset, r.series, r.strategy, r.repetition, r.seed
        );
        let path = out_dir.join(name);
        let secs = timing_of(r).map(|t| t.generation_seconds.clone()).unwrap_or_default();
        let mut w = csv::Writer::from_writer(create(&path)?);
        w.write_record(["generation", "best_fitness", "mean_fitness", "seconds"])
            .map_err(|e| Error::io(&path, e))?;
        for (g, (best, mean)) in search.best_trace.iter().zip(&search.mean_trace).enumerate() {
            let s = secs.get(g).map_or_else(String::new, |s| s.to_string());
            w.write_record([g.to_string(), best.to_string(), mean.to_string(), s])
                .map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    let mut keys: Vec<(String, String)> = Vec::new();
    for t in &timings {
        let k = (t.strategy.clone(), t.dataset.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let path = out_dir.join("timing_summary.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["strategy", "dataset", "runs", "mean_seconds"])
        .map_err(|e| Error::io(&path, e))?;
    for (strategy, dataset) in keys {
        let secs: Vec<f64> = timings
            .iter()
            .filter(|t| t.strategy == strategy && t.dataset == dataset)
            .map(|t| t.seconds)
            .collect();
        let mean = secs.iter().sum::<f64>() / secs.len() as f64;
        w.write_record([strategy, dataset, secs.len().to_string(), mean.to_string()])
            .map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(written)
}
